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

#ifndef VELO_MODEL_HPP_
#define VELO_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "velo/corpus.hpp"
#include "velo/errors.hpp"
#include "velo/frontend.hpp"
#include "velo/graph.hpp"
#include "velo/rng.hpp"
#include "velo/tensor.hpp"

namespace velo {

// Architecture constants. The convolutional subsampler outputs
// conv_channels, followed by one linear projection down to hidden.
struct ModelConfig {
  int conv_layers = 2;
  int conv_stride = 2;
  int conv_kernel = 5;
  int conv_channels = 1024;
  int enc_layers = 12;
  int dec_layers = 12;
  int hidden = 512;
  int ffn = 2048;
  int heads = 8;
  float dropout = 0.1f;
  int input_dim = 80;
  int vocab_size = 0;   // set from the Vocabulary
  int n_classes = 4;    // 2 = detection, 4 = assessment
  int max_positions = 2048;
  std::string pooling = "mean";  // mean | max | first

  void validate() const;
  // Laptop-scale profile used by the test suites.
  void apply_tiny();
};

// Which parameter groups a model instance carries.
enum class Stage {
  kAsr,   // encoder + decoder
  kCls,   // encoder + classifier
  kFull,  // all three groups
};

struct TensorShapeSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
};

// Canonical tensor directory for a config/stage. Names are prefixed
// enc. / dec. / cls., which is also the parameter partition.
std::vector<TensorShapeSpec> tensor_specs(const ModelConfig& cfg, Stage stage);

enum class ParamGroup { kEncoder, kDecoder, kClassifier };
ParamGroup param_group(const std::string& name);

// Ordered named-tensor set. Order is the canonical directory order.
template <typename S>
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Tensor<S>> values;
  std::unordered_map<std::string, int> index;

  int count() const { return static_cast<int>(names.size()); }

  bool has(const std::string& name) const { return index.count(name) != 0; }

  Tensor<S>& get(const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw ShapeMismatch("missing tensor: " + name);
    return values[it->second];
  }

  const Tensor<S>& get(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw ShapeMismatch("missing tensor: " + name);
    return values[it->second];
  }

  void add(const std::string& name, Tensor<S> t) {
    if (has(name)) throw Error("duplicate tensor: " + name);
    index[name] = static_cast<int>(names.size());
    names.push_back(name);
    values.push_back(std::move(t));
  }

  int64_t total_size() const {
    int64_t n = 0;
    for (const auto& t : values) n += static_cast<int64_t>(t.size());
    return n;
  }

  template <typename T>
  ParamSet<T> cast() const {
    ParamSet<T> out;
    for (int i = 0; i < count(); ++i) out.add(names[i], values[i].template cast<T>());
    return out;
  }
};

using Params = ParamSet<float>;

// Deterministic per-seed initialization: weights ~ uniform(+-sqrt(1/fan_in)),
// biases 0, layer-norm gains 1, embeddings ~ normal(0, hidden^-0.5). Each
// tensor gets its own seed derived from (seed, name).
template <typename S>
ParamSet<S> init_parameters(const ModelConfig& cfg, Stage stage, uint64_t seed);

// Validates that params exactly matches the directory for (cfg, stage);
// throws ShapeMismatch naming the first offending tensor.
template <typename S>
void check_shapes(const ParamSet<S>& params, const ModelConfig& cfg, Stage stage);

// Subsampled sequence length after the conv stack.
int subsampled_length(int frames, const ModelConfig& cfg);

// Sinusoidal position table rows [0, len).
template <typename S>
Tensor<S> sinusoid_positions(int len, int dim);

struct EncoderOutput {
  Tensor<float> h;    // L x hidden
  int valid_len = 0;  // rows of h that correspond to real input frames
};

// ---------------------------------------------------------------------------
// Graph-building forward passes, shared by training and inference.
// ---------------------------------------------------------------------------

template <typename S>
class Forward {
 public:
  struct Enc {
    int node = -1;
    int padded_len = 0;
    int valid_len = 0;
  };

  Forward(const ModelConfig& cfg, const ParamSet<S>& params, bool train,
          uint64_t dropout_seed)
      : cfg_(cfg), params_(params), train_(train), rng_(dropout_seed) {}

  Graph<S>& graph() { return g_; }

  // features: (T x input_dim); rows >= valid_frames are padding.
  Enc encode(const Tensor<S>& features, int valid_frames) {
    if (features.rows < 1) throw EmptyInput("encode: no frames");
    if (features.cols != cfg_.input_dim)
      throw ShapeMismatch("encode: feature dim " + std::to_string(features.cols) +
                          " != input_dim " + std::to_string(cfg_.input_dim));
    if (valid_frames < 1 || valid_frames > features.rows)
      throw EmptyInput("encode: invalid frame count");

    // Padding rows must stay exactly zero through the conv stack so that
    // windows near the valid boundary match what im2col's own zero padding
    // would produce on the unpadded sequence. Each conv layer's bias and
    // GELU would otherwise leave nonzero values in pad rows.
    Tensor<S> clean = features;
    for (int r = valid_frames; r < clean.rows; ++r) {
      S* row = clean.row(r);
      for (int c = 0; c < clean.cols; ++c) row[c] = S(0);
    }
    int x = g_.constant(std::move(clean));
    const int pad = cfg_.conv_kernel / 2;
    int valid = valid_frames;
    for (int i = 0; i < cfg_.conv_layers; ++i) {
      const std::string base = "enc.conv" + std::to_string(i + 1);
      x = g_.im2col(x, cfg_.conv_kernel, cfg_.conv_stride, pad);
      x = linear(x, base + ".w", base + ".b");
      x = g_.gelu(x);
      valid = (valid + 2 * pad - cfg_.conv_kernel) / cfg_.conv_stride + 1;
      if (g_.value(x).rows > valid) {
        Tensor<S> keep(g_.value(x).rows, g_.value(x).cols, S(1));
        for (int r = valid; r < keep.rows; ++r) {
          S* row = keep.row(r);
          for (int c = 0; c < keep.cols; ++c) row[c] = S(0);
        }
        x = g_.mul_const(x, std::move(keep));
      }
    }
    x = linear(x, "enc.proj.w", "enc.proj.b");

    const int L_pad = g_.value(x).rows;
    const int L_valid = subsampled_length(valid_frames, cfg_);
    if (L_pad > cfg_.max_positions)
      throw Error("encode: sequence longer than max_positions");
    x = g_.add_const(x, sinusoid_positions<S>(L_pad, cfg_.hidden));
    x = dropout(x);

    const Tensor<S> mask = key_mask(L_pad, L_pad, L_valid, /*causal=*/false);
    for (int l = 0; l < cfg_.enc_layers; ++l) {
      const std::string base = "enc.l" + std::to_string(l);
      x = self_attention(x, x, base + ".attn", base + ".ln1", mask);
      x = ffn_block(x, base);
    }
    x = g_.layer_norm(x, pid("enc.ln_out.g"), pid("enc.ln_out.b"));
    return Enc{x, L_pad, L_valid};
  }

  // Wraps an externally computed encoder state (e.g. loaded activations).
  Enc inject_encoder_state(const Tensor<S>& h, int valid_len) {
    return Enc{g_.constant(h), h.rows, valid_len};
  }

  // Teacher-forcing decoder: tokens must begin with BOS; rows >= valid_tokens
  // are padding. Returns (|tokens| x vocab) logits.
  int decode(const std::vector<int>& tokens, int valid_tokens, const Enc& enc) {
    if (tokens.empty() || valid_tokens < 1 ||
        valid_tokens > static_cast<int>(tokens.size()))
      throw EmptyInput("decode: no tokens");
    if (tokens[0] != Vocabulary::kBos) throw Error("decode: tokens must begin with BOS");
    for (int t : tokens) {
      if (t < 0 || t >= cfg_.vocab_size)
        throw TokenOutOfRange("token id " + std::to_string(t) + " outside vocab of " +
                              std::to_string(cfg_.vocab_size));
    }
    const int n = static_cast<int>(tokens.size());
    if (n > cfg_.max_positions) throw Error("decode: sequence longer than max_positions");

    int x = g_.gather_rows(pid("dec.embed"), tokens);
    x = g_.add_const(x, sinusoid_positions<S>(n, cfg_.hidden));
    x = dropout(x);

    const Tensor<S> self_mask = key_mask(n, n, valid_tokens, /*causal=*/true);
    const Tensor<S> cross_mask = key_mask(n, enc.padded_len, enc.valid_len,
                                          /*causal=*/false);
    for (int l = 0; l < cfg_.dec_layers; ++l) {
      const std::string base = "dec.l" + std::to_string(l);
      x = self_attention(x, x, base + ".self", base + ".ln1", self_mask);
      x = self_attention(x, enc.node, base + ".cross", base + ".ln2", cross_mask);
      x = ffn_block(x, base, ".ln3");
    }
    x = g_.layer_norm(x, pid("dec.ln_out.g"), pid("dec.ln_out.b"));
    return linear(x, "dec.out.w", "dec.out.b");
  }

  // Pools the encoder state and applies the classifier layer -> (1 x |C|).
  int classify_logits(const Enc& enc) {
    int pooled;
    if (cfg_.pooling == "mean") {
      pooled = g_.mean_rows(enc.node, enc.valid_len);
    } else if (cfg_.pooling == "max") {
      pooled = g_.max_rows(enc.node, enc.valid_len);
    } else if (cfg_.pooling == "first") {
      pooled = g_.slice_rows(enc.node, 0, 1);
    } else {
      throw ConfigError("unknown pooling: " + cfg_.pooling);
    }
    return linear(pooled, "cls.w", "cls.b");
  }

  // Gradient of the named parameter after backward(), or nullptr if the
  // parameter was not used in this graph.
  const Tensor<S>* param_grad(const std::string& name) const {
    auto it = param_nodes_.find(name);
    if (it == param_nodes_.end()) return nullptr;
    return &g_.grad(it->second);
  }

  const std::unordered_map<std::string, int>& param_nodes() const {
    return param_nodes_;
  }

 private:
  int pid(const std::string& name) {
    auto it = param_nodes_.find(name);
    if (it != param_nodes_.end()) return it->second;
    const int id = g_.leaf(params_.get(name));
    param_nodes_[name] = id;
    return id;
  }

  int linear(int x, const std::string& w, const std::string& b) {
    return g_.add_rowvec(g_.matmul_nt(x, pid(w)), pid(b));
  }

  int dropout(int x) {
    if (!train_ || cfg_.dropout <= 0.0f) return x;
    const Tensor<S>& v = g_.value(x);
    Tensor<S> mask(v.rows, v.cols);
    const S keep = S(1) - S(cfg_.dropout);
    const S inv_keep = S(1) / keep;
    for (auto& m : mask.data)
      m = (rng_.uniform_real() < static_cast<double>(keep)) ? inv_keep : S(0);
    return g_.mul_const(x, std::move(mask));
  }

  // Additive mask (n_q x n_k): key positions >= valid and, when causal,
  // keys ahead of the query are pushed to -inf.
  Tensor<S> key_mask(int n_q, int n_k, int valid, bool causal) const {
    Tensor<S> m(n_q, n_k);
    for (int i = 0; i < n_q; ++i) {
      S* row = m.row(i);
      for (int j = 0; j < n_k; ++j)
        if (j >= valid || (causal && j > i)) row[j] = kMaskNeg<S>;
    }
    return m;
  }

  int self_attention(int q_in, int kv_in, const std::string& base,
                     const std::string& ln, const Tensor<S>& mask) {
    const int q_norm = g_.layer_norm(q_in, pid(ln + ".g"), pid(ln + ".b"));
    const int kv_norm =
        (kv_in == q_in) ? q_norm
                        : kv_in;  // cross-attention keys use the encoder output as-is
    const int q = linear(q_norm, base + ".wq", base + ".bq");
    const int k = linear(kv_norm, base + ".wk", base + ".bk");
    const int v = linear(kv_norm, base + ".wv", base + ".bv");
    const int dh = cfg_.hidden / cfg_.heads;
    const S inv_sqrt_dh = S(1) / std::sqrt(S(dh));
    std::vector<int> heads;
    for (int h = 0; h < cfg_.heads; ++h) {
      const int c0 = h * dh, c1 = (h + 1) * dh;
      const int qh = g_.slice_cols(q, c0, c1);
      const int kh = g_.slice_cols(k, c0, c1);
      const int vh = g_.slice_cols(v, c0, c1);
      int scores = g_.scale(g_.matmul_nt(qh, kh), inv_sqrt_dh);
      scores = g_.add_const(scores, mask);
      int probs = g_.softmax_rows(scores);
      probs = dropout(probs);
      heads.push_back(g_.matmul(probs, vh));
    }
    int out = g_.concat_cols(heads);
    out = linear(out, base + ".wo", base + ".bo");
    out = dropout(out);
    return g_.add(q_in, out);
  }

  int ffn_block(int x, const std::string& base, const std::string& ln = ".ln2") {
    const int norm = g_.layer_norm(x, pid(base + ln + ".g"), pid(base + ln + ".b"));
    int f = linear(norm, base + ".ffn.w1", base + ".ffn.b1");
    f = g_.gelu(f);
    f = dropout(f);
    f = linear(f, base + ".ffn.w2", base + ".ffn.b2");
    f = dropout(f);
    return g_.add(x, f);
  }

  const ModelConfig& cfg_;
  const ParamSet<S>& params_;
  bool train_;
  Rng rng_;
  Graph<S> g_;
  std::unordered_map<std::string, int> param_nodes_;
};

// ---------------------------------------------------------------------------
// Inference entry points
// ---------------------------------------------------------------------------

// Runs the encoder in eval mode over a whole (unpadded) feature matrix.
EncoderOutput encode(const FeatureMatrix& features, const Params& params,
                     const ModelConfig& cfg);

// Teacher-forcing logits for a token sequence against a fixed encoder state.
Tensor<float> decode(const std::vector<int>& tokens, const EncoderOutput& enc,
                     const Params& params, const ModelConfig& cfg);

// Pool -> linear -> softmax probabilities over |C| classes.
std::vector<float> classify(const EncoderOutput& enc, const Params& params,
                            const ModelConfig& cfg);

// ---------------------------------------------------------------------------
// Checkpoints: magic "NTCK", JSON header (config, vocab, tensor directory,
// run-config snapshot), then f32 LE payloads in directory order.
// ---------------------------------------------------------------------------

struct Checkpoint {
  Params params;
  ModelConfig config;
  Vocabulary vocab;
  std::unordered_map<std::string, std::string> run_config;
};

void save_checkpoint(const std::string& path, const Params& params,
                     const ModelConfig& cfg, const Vocabulary& vocab,
                     const std::unordered_map<std::string, std::string>& run_config = {});
Checkpoint load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Template definitions
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> sinusoid_positions(int len, int dim) {
  Tensor<S> pe(len, dim);
  for (int pos = 0; pos < len; ++pos) {
    S* row = pe.row(pos);
    for (int i = 0; i < dim / 2; ++i) {
      const double freq = std::exp(-std::log(10000.0) * (2.0 * i / dim));
      row[2 * i] = static_cast<S>(std::sin(pos * freq));
      row[2 * i + 1] = static_cast<S>(std::cos(pos * freq));
    }
  }
  return pe;
}

template <typename S>
ParamSet<S> init_parameters(const ModelConfig& cfg, Stage stage, uint64_t seed) {
  cfg.validate();
  ParamSet<S> params;
  for (const auto& spec : tensor_specs(cfg, stage)) {
    Tensor<S> t(spec.rows, spec.cols);
    Rng rng(derive_seed(seed, spec.name));
    const std::string& n = spec.name;
    const bool is_gain = n.ends_with(".g");
    const bool is_bias = n.ends_with(".b") || n.ends_with(".b1") ||
                         n.ends_with(".b2") || n.ends_with(".bq") ||
                         n.ends_with(".bk") || n.ends_with(".bv") ||
                         n.ends_with(".bo");
    const bool is_embed = spec.name == "dec.embed";
    if (is_gain) {
      t.fill(S(1));
    } else if (is_bias) {
      // zeros
    } else if (is_embed) {
      const double std = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
      for (auto& v : t.data) v = static_cast<S>(rng.normal(0.0, std));
    } else {
      const double bound = std::sqrt(1.0 / t.cols);  // fan-in = cols (out x in)
      for (auto& v : t.data)
        v = static_cast<S>(rng.uniform_real(-bound, bound));
    }
    params.add(spec.name, std::move(t));
  }
  return params;
}

template <typename S>
void check_shapes(const ParamSet<S>& params, const ModelConfig& cfg, Stage stage) {
  const auto specs = tensor_specs(cfg, stage);
  for (const auto& spec : specs) {
    if (!params.has(spec.name))
      throw ShapeMismatch("missing tensor: " + spec.name);
    const auto& t = params.get(spec.name);
    if (t.rows != spec.rows || t.cols != spec.cols)
      throw ShapeMismatch("tensor " + spec.name + " has shape " +
                          std::to_string(t.rows) + "x" + std::to_string(t.cols) +
                          ", expected " + std::to_string(spec.rows) + "x" +
                          std::to_string(spec.cols));
  }
  if (params.count() != static_cast<int>(specs.size()))
    throw ShapeMismatch("parameter set has " + std::to_string(params.count()) +
                        " tensors, expected " + std::to_string(specs.size()));
}

}  // namespace velo

#endif  // VELO_MODEL_HPP_
