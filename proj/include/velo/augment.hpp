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

#ifndef VELO_AUGMENT_HPP_
#define VELO_AUGMENT_HPP_

#include "velo/frontend.hpp"
#include "velo/rng.hpp"

namespace velo {

// Time/frequency masking policy. Masks fill with 0, which is the
// per-channel mean after normalization, so masking is applied to
// normalized features.
struct AugmentPolicy {
  int F = 27;   // max frequency-mask width (channels)
  int mF = 2;   // number of frequency masks
  int T = 40;   // max time-mask width (frames)
  int mT = 2;   // number of time masks

  void validate(int n_channels) const;
};

// Applies mF frequency masks (width ~ Uniform{0..F}) and mT time masks
// (width ~ Uniform{0..min(T, frames)}), all start positions uniform.
// Unmasked cells are returned bit-identical.
FeatureMatrix spec_augment(const FeatureMatrix& features,
                           const AugmentPolicy& policy, Rng& rng);

}  // namespace velo

#endif  // VELO_AUGMENT_HPP_
