// Copyright 2026 The Velo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VELO_CLI_HPP_
#define VELO_CLI_HPP_

#include <string>
#include <vector>

namespace velo {

// Entry point behind the `velo` binary, separated for testing. Returns the
// process exit code: 0 success, 1 operational error, 2 usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace velo

#endif  // VELO_CLI_HPP_
