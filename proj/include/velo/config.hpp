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

#ifndef VELO_CONFIG_HPP_
#define VELO_CONFIG_HPP_

#include <string>
#include <vector>

#include "velo/augment.hpp"
#include "velo/corpus.hpp"
#include "velo/frontend.hpp"
#include "velo/model.hpp"
#include "velo/train.hpp"

namespace velo {

// Flat dotted-key view over every tunable. Files hold `key = value` lines
// (# comments allowed); unknown keys are rejected so typos cannot silently
// fall back to defaults.
struct RunConfig {
  SynthSpec corpus;
  FrontendConfig frontend;
  AugmentPolicy augment;
  ModelConfig model;
  TrainConfig train_asr = TrainConfig::asr_defaults();
  TrainConfig train_cls = TrainConfig::cls_defaults();
  int eval_folds = 5;
  std::string eval_aggregate = "mean";  // mean | vote
  bool eval_stratify = true;
  uint64_t seed = 1;

  RunConfig();

  // All known keys, sorted.
  static std::vector<std::string> keys();

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  // "key=value" strings, e.g. from repeated --set flags.
  void apply_overrides(const std::vector<std::string>& overrides);

  // Desk-scale profile: tiny model plus scaled batches/epochs.
  void apply_tiny();

  void validate() const;

  // Sorted `key = value` lines; load(serialize()) is the identity.
  std::string serialize() const;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

}  // namespace velo

#endif  // VELO_CONFIG_HPP_
