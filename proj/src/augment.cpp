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

#include "velo/augment.hpp"

#include <algorithm>

namespace velo {

void AugmentPolicy::validate(int n_channels) const {
  if (F < 0 || F > n_channels)
    throw Error("augment: F out of [0, channels]");
  if (T < 0 || mF < 0 || mT < 0)
    throw Error("augment: negative mask parameter");
}

FeatureMatrix spec_augment(const FeatureMatrix& features,
                           const AugmentPolicy& policy, Rng& rng) {
  if (features.frames == 0) throw EmptySignal("spec_augment: empty features");
  policy.validate(features.channels);
  FeatureMatrix out = features;
  const float mask_value = 0.0f;

  for (int i = 0; i < policy.mF; ++i) {
    const int f = static_cast<int>(rng.uniform_int(0, policy.F));
    if (f == 0) continue;
    const int f0 = static_cast<int>(rng.uniform_int(0, features.channels - f));
    for (int t = 0; t < out.frames; ++t) {
      float* row = out.row(t);
      for (int c = f0; c < f0 + f; ++c) row[c] = mask_value;
    }
  }

  const int max_t = std::min(policy.T, features.frames);
  for (int i = 0; i < policy.mT; ++i) {
    const int w = static_cast<int>(rng.uniform_int(0, max_t));
    if (w == 0) continue;
    const int t0 = static_cast<int>(rng.uniform_int(0, features.frames - w));
    for (int t = t0; t < t0 + w; ++t) {
      float* row = out.row(t);
      for (int c = 0; c < out.channels; ++c) row[c] = mask_value;
    }
  }
  return out;
}

}  // namespace velo
