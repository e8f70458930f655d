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

#include "velo/frontend.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>

namespace velo {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

std::vector<float> resample(const std::vector<float>& samples, int src_rate,
                            int dst_rate) {
  if (src_rate <= 0) throw InvalidRate("source rate must be positive");
  if (dst_rate <= 0) throw InvalidRate("target rate must be positive");
  if (src_rate == dst_rate) return samples;

  const int64_t n_in = static_cast<int64_t>(samples.size());
  const int64_t n_out = static_cast<int64_t>(
      std::llround(static_cast<double>(n_in) * dst_rate / src_rate));
  std::vector<float> out(static_cast<size_t>(n_out), 0.0f);
  if (n_in == 0) return out;

  // Hann-windowed sinc, cut off at the lower of the two Nyquist rates.
  const double ratio = static_cast<double>(dst_rate) / src_rate;
  const double cutoff = std::min(1.0, ratio);
  const int half_taps = 24;
  const double width = half_taps / cutoff;

  for (int64_t i = 0; i < n_out; ++i) {
    const double center = static_cast<double>(i) / ratio;  // in input samples
    const int64_t j0 = static_cast<int64_t>(std::ceil(center - width));
    const int64_t j1 = static_cast<int64_t>(std::floor(center + width));
    double acc = 0.0;
    for (int64_t j = j0; j <= j1; ++j) {
      if (j < 0 || j >= n_in) continue;
      const double t = j - center;
      const double win = 0.5 + 0.5 * std::cos(M_PI * t / width);
      acc += samples[static_cast<size_t>(j)] * cutoff * sinc(cutoff * t) * win;
    }
    out[static_cast<size_t>(i)] = static_cast<float>(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FFT
// ---------------------------------------------------------------------------

namespace {

// Iterative radix-2 Cooley-Tukey; n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

// ---------------------------------------------------------------------------
// Framing and log-mel
// ---------------------------------------------------------------------------

int frame_count(int64_t n_samples, const FrontendConfig& cfg) {
  if (n_samples < cfg.win_samples) return 0;
  return 1 + static_cast<int>((n_samples - cfg.win_samples) / cfg.hop_samples);
}

MelFilterbank mel_filterbank(const FrontendConfig& cfg) {
  MelFilterbank fb;
  fb.n_mels = cfg.n_mels;
  fb.n_bins = cfg.fft_size / 2 + 1;
  fb.weights.assign(static_cast<size_t>(fb.n_mels) * fb.n_bins, 0.0);
  fb.center_freq.resize(fb.n_mels);

  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  // n_mels + 2 edge points, filters interpolate in mel space.
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    edges[i] = mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1);
  for (int m = 0; m < cfg.n_mels; ++m)
    fb.center_freq[m] = mel_to_hz(edges[m + 1]);

  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;
  for (int b = 0; b < fb.n_bins; ++b) {
    const double mel = hz_to_mel(b * bin_hz);
    for (int m = 0; m < cfg.n_mels; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      double w = 0.0;
      if (mel > lo && mel < hi)
        w = (mel <= mid) ? (mel - lo) / (mid - lo) : (hi - mel) / (hi - mid);
      fb.weights[static_cast<size_t>(m) * fb.n_bins + b] = w;
    }
  }
  return fb;
}

FeatureMatrix logmel(const std::vector<float>& samples, const FrontendConfig& cfg) {
  if (!is_pow2(cfg.fft_size)) throw Error("fft_size must be a power of two");
  const int T = frame_count(static_cast<int64_t>(samples.size()), cfg);
  if (T == 0) throw EmptySignal("signal shorter than one window");

  const MelFilterbank fb = mel_filterbank(cfg);
  std::vector<double> window(cfg.win_samples);
  for (int i = 0; i < cfg.win_samples; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (cfg.win_samples - 1));

  FeatureMatrix feats(T, cfg.n_mels);
  std::vector<std::complex<double>> buf(cfg.fft_size);
  std::vector<double> power(fb.n_bins);
  for (int t = 0; t < T; ++t) {
    const size_t off = static_cast<size_t>(t) * cfg.hop_samples;
    for (int i = 0; i < cfg.fft_size; ++i) {
      const double v = (i < cfg.win_samples)
                            ? static_cast<double>(samples[off + i]) * window[i]
                            : 0.0;
      buf[i] = {v, 0.0};
    }
    fft_inplace(buf);
    for (int b = 0; b < fb.n_bins; ++b) power[b] = std::norm(buf[b]);
    float* out = feats.row(t);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      const double* w = fb.weights.data() + static_cast<size_t>(m) * fb.n_bins;
      for (int b = 0; b < fb.n_bins; ++b) e += w[b] * power[b];
      out[m] = static_cast<float>(std::log(std::max(e, cfg.log_floor)));
    }
  }
  return feats;
}

FeatureMatrix normalize(const FeatureMatrix& features) {
  if (features.frames < 1) throw EmptySignal("normalize: no frames");
  const int T = features.frames, C = features.channels;
  FeatureMatrix out(T, C);
  for (int c = 0; c < C; ++c) {
    double mean = 0.0;
    for (int t = 0; t < T; ++t) mean += features.at(t, c);
    mean /= T;
    double var = 0.0;
    for (int t = 0; t < T; ++t) {
      const double d = features.at(t, c) - mean;
      var += d * d;
    }
    var /= T;
    const double inv = 1.0 / std::max(std::sqrt(var), 1e-8);
    for (int t = 0; t < T; ++t)
      out.at(t, c) = static_cast<float>((features.at(t, c) - mean) * inv);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature cache
// ---------------------------------------------------------------------------

void write_feature_cache(const std::string& path, const FeatureMatrix& features) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("LMF1", 4);
  const uint32_t t = static_cast<uint32_t>(features.frames);
  const uint32_t c = static_cast<uint32_t>(features.channels);
  os.write(reinterpret_cast<const char*>(&t), 4);
  os.write(reinterpret_cast<const char*>(&c), 4);
  os.write(reinterpret_cast<const char*>(features.data.data()),
           static_cast<std::streamsize>(features.data.size() * sizeof(float)));
  if (!os) throw IoError("write failed: " + path);
}

FeatureMatrix read_feature_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::strncmp(magic, "LMF1", 4) != 0)
    throw IoError("bad feature cache magic: " + path);
  uint32_t t = 0, c = 0;
  is.read(reinterpret_cast<char*>(&t), 4);
  is.read(reinterpret_cast<char*>(&c), 4);
  if (!is) throw IoError("truncated feature cache: " + path);
  FeatureMatrix feats(static_cast<int>(t), static_cast<int>(c));
  is.read(reinterpret_cast<char*>(feats.data.data()),
          static_cast<std::streamsize>(feats.data.size() * sizeof(float)));
  if (!is) throw IoError("truncated feature cache payload: " + path);
  return feats;
}

}  // namespace velo
