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

#ifndef VELO_FRONTEND_HPP_
#define VELO_FRONTEND_HPP_

#include <string>
#include <vector>

#include "velo/errors.hpp"

namespace velo {

// Frontend constants live here so every stand-in choice (window, FFT size,
// mel range) is adjustable in one place. Defaults: 25 ms Hann window, 10 ms
// shift, 512-point FFT, 80 HTK-mel channels over 20..8000 Hz.
struct FrontendConfig {
  int sample_rate = 16000;
  int win_samples = 400;   // 25 ms
  int hop_samples = 160;   // 10 ms
  int fft_size = 512;
  int n_mels = 80;
  double fmin = 20.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;
};

// T x n_mels log-mel energies, stored as f32 row-major.
struct FeatureMatrix {
  int frames = 0;
  int channels = 0;
  std::vector<float> data;

  FeatureMatrix() = default;
  FeatureMatrix(int t, int c)
      : frames(t), channels(c), data(static_cast<size_t>(t) * c, 0.0f) {}

  float* row(int t) { return data.data() + static_cast<size_t>(t) * channels; }
  const float* row(int t) const {
    return data.data() + static_cast<size_t>(t) * channels;
  }
  float& at(int t, int c) { return data[static_cast<size_t>(t) * channels + c]; }
  float at(int t, int c) const {
    return data[static_cast<size_t>(t) * channels + c];
  }
};

// Triangular mel filters sampled at the one-sided FFT bin frequencies.
struct MelFilterbank {
  int n_mels = 0;
  int n_bins = 0;  // fft_size / 2 + 1
  std::vector<double> weights;  // n_mels x n_bins row-major
  std::vector<double> center_freq;  // Hz, per filter

  double at(int m, int b) const {
    return weights[static_cast<size_t>(m) * n_bins + b];
  }
};

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Windowed-sinc polyphase resampling to 16 kHz. Identity when src_rate is
// already 16000. Output length is round(n * 16000 / src_rate).
std::vector<float> resample(const std::vector<float>& samples, int src_rate,
                            int dst_rate = 16000);

// Number of frames for an n-sample signal: 1 + floor((n - win)/hop) when
// n >= win, else 0.
int frame_count(int64_t n_samples, const FrontendConfig& cfg = {});

MelFilterbank mel_filterbank(const FrontendConfig& cfg = {});

// Per frame: Hann window, zero-pad to fft_size, one-sided power spectrum,
// mel projection, log with floor.
FeatureMatrix logmel(const std::vector<float>& samples,
                     const FrontendConfig& cfg = {});

// Per-channel mean/variance normalization over the utterance's frames
// (std floor 1e-8).
FeatureMatrix normalize(const FeatureMatrix& features);

// Feature cache: magic "LMF1", u32 frames, u32 channels, then f32 LE
// row-major payload.
void write_feature_cache(const std::string& path, const FeatureMatrix& features);
FeatureMatrix read_feature_cache(const std::string& path);

}  // namespace velo

#endif  // VELO_FRONTEND_HPP_
