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

#include <set>
#include <vector>

#include "doctest.h"
#include "velo/augment.hpp"
#include "velo/rng.hpp"

using namespace velo;

namespace {

FeatureMatrix nonzero_features(int frames, int channels, uint64_t seed) {
  FeatureMatrix f(frames, channels);
  Rng rng(seed);
  for (float& v : f.data)
    v = static_cast<float>(rng.uniform_real(0.5, 2.0));  // never zero
  return f;
}

}  // namespace

TEST_CASE("augment: masked cells are zero, others bit-identical") {
  const FeatureMatrix f = nonzero_features(120, 80, 1);
  AugmentPolicy policy;  // 27/2, 40/2
  Rng rng(42);
  const FeatureMatrix out = spec_augment(f, policy, rng);
  REQUIRE(out.frames == f.frames);
  REQUIRE(out.channels == f.channels);

  // Every input cell was nonzero, so a zero in the output marks a mask.
  std::set<int> masked_rows, masked_cols;
  for (int t = 0; t < f.frames; ++t) {
    bool whole_row_zero = true;
    for (int c = 0; c < f.channels; ++c)
      if (out.at(t, c) != 0.0f) whole_row_zero = false;
    if (whole_row_zero) masked_rows.insert(t);
  }
  for (int c = 0; c < f.channels; ++c) {
    bool whole_col_zero = true;
    for (int t = 0; t < f.frames; ++t)
      if (out.at(t, c) != 0.0f && masked_rows.count(t) == 0) whole_col_zero = false;
    if (whole_col_zero) masked_cols.insert(c);
  }

  // Each zero cell lies on a masked row or column; the rest are untouched
  // bit for bit.
  for (int t = 0; t < f.frames; ++t)
    for (int c = 0; c < f.channels; ++c) {
      if (out.at(t, c) == 0.0f)
        CHECK((masked_rows.count(t) == 1 || masked_cols.count(c) == 1));
      else
        CHECK(out.at(t, c) == f.at(t, c));
    }

  // Mask budget: widths are bounded by the policy.
  CHECK(static_cast<int>(masked_rows.size()) <= policy.mT * policy.T);
  CHECK(static_cast<int>(masked_cols.size()) <= policy.mF * policy.F);
}

TEST_CASE("augment: identical seeds give identical outputs") {
  const FeatureMatrix f = nonzero_features(90, 80, 2);
  AugmentPolicy policy;
  Rng r1(7), r2(7);
  const FeatureMatrix a = spec_augment(f, policy, r1);
  const FeatureMatrix b = spec_augment(f, policy, r2);
  CHECK(a.data == b.data);

  Rng r3(8);
  const FeatureMatrix c = spec_augment(f, policy, r3);
  CHECK(a.data != c.data);
}

TEST_CASE("augment: zero-mask policy is the identity") {
  const FeatureMatrix f = nonzero_features(50, 80, 3);
  AugmentPolicy policy;
  policy.mF = 0;
  policy.mT = 0;
  Rng rng(1);
  CHECK(spec_augment(f, policy, rng).data == f.data);

  AugmentPolicy zero_width;
  zero_width.F = 0;
  zero_width.T = 0;
  const FeatureMatrix out = spec_augment(f, zero_width, rng);
  CHECK(out.data == f.data);
}

TEST_CASE("augment: time masks clamp to short utterances") {
  // Fewer frames than T: masking must still work and never exceed the
  // frame count.
  const FeatureMatrix f = nonzero_features(12, 80, 4);
  AugmentPolicy policy;  // T = 40 > 12 frames
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const FeatureMatrix out = spec_augment(f, policy, rng);
    REQUIRE(out.frames == 12);
    int zero_rows = 0;
    for (int t = 0; t < out.frames; ++t) {
      bool all = true;
      for (int c = 0; c < out.channels; ++c)
        if (out.at(t, c) != 0.0f) all = false;
      zero_rows += all ? 1 : 0;
    }
    CHECK(zero_rows <= 12);
  }
}

TEST_CASE("augment: policy validation") {
  const FeatureMatrix f = nonzero_features(10, 40, 5);
  Rng rng(1);
  AugmentPolicy wide;
  wide.F = 41;  // wider than the channel count
  CHECK_THROWS_AS(spec_augment(f, wide, rng), Error);
  AugmentPolicy neg;
  neg.mT = -1;
  CHECK_THROWS_AS(spec_augment(f, neg, rng), Error);
  CHECK_THROWS_AS(spec_augment(FeatureMatrix{}, AugmentPolicy{}, rng), EmptySignal);
}
