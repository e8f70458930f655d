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

#ifndef VELO_ERRORS_HPP_
#define VELO_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace velo {

// Base class for every error raised by this library. Subclasses exist so
// callers can catch a specific failure mode by type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define VELO_DEFINE_ERROR(NAME)                              \
  class NAME : public Error {                                \
   public:                                                   \
    explicit NAME(const std::string& msg) : Error(msg) {}    \
  }

VELO_DEFINE_ERROR(MalformedManifest);
VELO_DEFINE_ERROR(EmptyManifest);
VELO_DEFINE_ERROR(EmptyInput);
VELO_DEFINE_ERROR(UnknownWordId);
VELO_DEFINE_ERROR(IoError);
VELO_DEFINE_ERROR(InvalidRate);
VELO_DEFINE_ERROR(EmptySignal);
VELO_DEFINE_ERROR(TokenOutOfRange);
VELO_DEFINE_ERROR(CorruptCheckpoint);
VELO_DEFINE_ERROR(LengthMismatch);
VELO_DEFINE_ERROR(LabelOutOfRange);
VELO_DEFINE_ERROR(ShapeMismatch);
VELO_DEFINE_ERROR(Divergence);
VELO_DEFINE_ERROR(TooFewSpeakers);
VELO_DEFINE_ERROR(ConfigError);

#undef VELO_DEFINE_ERROR

}  // namespace velo

#endif  // VELO_ERRORS_HPP_
