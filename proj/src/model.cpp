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

#include "velo/model.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace velo {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload assumes a little-endian host");

using json = nlohmann::json;

void ModelConfig::validate() const {
  if (conv_layers < 1 || conv_stride < 1 || conv_kernel < 1 || conv_channels < 1)
    throw ConfigError("conv dimensions must be positive");
  if (conv_kernel % 2 == 0) throw ConfigError("conv_kernel must be odd");
  if (enc_layers < 1 || dec_layers < 1 || hidden < 1 || ffn < 1 || heads < 1)
    throw ConfigError("transformer dimensions must be positive");
  if (hidden % heads != 0) throw ConfigError("hidden must be divisible by heads");
  if (dropout < 0.0f || dropout >= 1.0f) throw ConfigError("dropout must be in [0, 1)");
  if (input_dim < 1) throw ConfigError("input_dim must be positive");
  if (n_classes < 2) throw ConfigError("n_classes must be at least 2");
  if (max_positions < 1) throw ConfigError("max_positions must be positive");
  if (pooling != "mean" && pooling != "max" && pooling != "first")
    throw ConfigError("unknown pooling: " + pooling);
}

void ModelConfig::apply_tiny() {
  conv_channels = 64;
  enc_layers = 2;
  dec_layers = 2;
  hidden = 64;
  ffn = 128;
  heads = 4;
}

ParamGroup param_group(const std::string& name) {
  if (name.rfind("enc.", 0) == 0) return ParamGroup::kEncoder;
  if (name.rfind("dec.", 0) == 0) return ParamGroup::kDecoder;
  if (name.rfind("cls.", 0) == 0) return ParamGroup::kClassifier;
  throw Error("tensor outside the enc./dec./cls. partition: " + name);
}

int subsampled_length(int frames, const ModelConfig& cfg) {
  if (frames < 1) throw EmptyInput("subsampled_length: no frames");
  int len = frames;
  const int pad = cfg.conv_kernel / 2;
  for (int i = 0; i < cfg.conv_layers; ++i)
    len = (len + 2 * pad - cfg.conv_kernel) / cfg.conv_stride + 1;
  return len;
}

namespace {

void add_attention(std::vector<TensorShapeSpec>& out, const std::string& base,
                   int hidden) {
  for (const char* p : {"q", "k", "v", "o"}) {
    out.push_back({base + ".w" + p, hidden, hidden});
    out.push_back({base + ".b" + p, 1, hidden});
  }
}

void add_layer_norm(std::vector<TensorShapeSpec>& out, const std::string& base,
                    int hidden) {
  out.push_back({base + ".g", 1, hidden});
  out.push_back({base + ".b", 1, hidden});
}

void add_ffn(std::vector<TensorShapeSpec>& out, const std::string& base, int hidden,
             int ffn) {
  out.push_back({base + ".ffn.w1", ffn, hidden});
  out.push_back({base + ".ffn.b1", 1, ffn});
  out.push_back({base + ".ffn.w2", hidden, ffn});
  out.push_back({base + ".ffn.b2", 1, hidden});
}

}  // namespace

std::vector<TensorShapeSpec> tensor_specs(const ModelConfig& cfg, Stage stage) {
  cfg.validate();
  std::vector<TensorShapeSpec> out;

  int in_ch = cfg.input_dim;
  for (int i = 0; i < cfg.conv_layers; ++i) {
    const std::string base = "enc.conv" + std::to_string(i + 1);
    out.push_back({base + ".w", cfg.conv_channels, cfg.conv_kernel * in_ch});
    out.push_back({base + ".b", 1, cfg.conv_channels});
    in_ch = cfg.conv_channels;
  }
  out.push_back({"enc.proj.w", cfg.hidden, cfg.conv_channels});
  out.push_back({"enc.proj.b", 1, cfg.hidden});
  for (int l = 0; l < cfg.enc_layers; ++l) {
    const std::string base = "enc.l" + std::to_string(l);
    add_layer_norm(out, base + ".ln1", cfg.hidden);
    add_attention(out, base + ".attn", cfg.hidden);
    add_layer_norm(out, base + ".ln2", cfg.hidden);
    add_ffn(out, base, cfg.hidden, cfg.ffn);
  }
  add_layer_norm(out, "enc.ln_out", cfg.hidden);

  if (stage == Stage::kAsr || stage == Stage::kFull) {
    if (cfg.vocab_size < 4)
      throw ConfigError("vocab_size must cover the reserved tokens");
    out.push_back({"dec.embed", cfg.vocab_size, cfg.hidden});
    for (int l = 0; l < cfg.dec_layers; ++l) {
      const std::string base = "dec.l" + std::to_string(l);
      add_layer_norm(out, base + ".ln1", cfg.hidden);
      add_attention(out, base + ".self", cfg.hidden);
      add_layer_norm(out, base + ".ln2", cfg.hidden);
      add_attention(out, base + ".cross", cfg.hidden);
      add_layer_norm(out, base + ".ln3", cfg.hidden);
      add_ffn(out, base, cfg.hidden, cfg.ffn);
    }
    add_layer_norm(out, "dec.ln_out", cfg.hidden);
    out.push_back({"dec.out.w", cfg.vocab_size, cfg.hidden});
    out.push_back({"dec.out.b", 1, cfg.vocab_size});
  }

  if (stage == Stage::kCls || stage == Stage::kFull) {
    out.push_back({"cls.w", cfg.n_classes, cfg.hidden});
    out.push_back({"cls.b", 1, cfg.n_classes});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

EncoderOutput encode(const FeatureMatrix& features, const Params& params,
                     const ModelConfig& cfg) {
  if (features.frames < 1) throw EmptyInput("encode: no frames");
  Tensor<float> x(features.frames, features.channels);
  x.data = features.data;
  Forward<float> fwd(cfg, params, /*train=*/false, /*dropout_seed=*/0);
  const auto enc = fwd.encode(x, features.frames);
  EncoderOutput out;
  out.h = fwd.graph().value(enc.node);
  out.valid_len = enc.valid_len;
  return out;
}

Tensor<float> decode(const std::vector<int>& tokens, const EncoderOutput& enc,
                     const Params& params, const ModelConfig& cfg) {
  Forward<float> fwd(cfg, params, /*train=*/false, /*dropout_seed=*/0);
  const auto state = fwd.inject_encoder_state(enc.h, enc.valid_len);
  const int logits = fwd.decode(tokens, static_cast<int>(tokens.size()), state);
  return fwd.graph().value(logits);
}

std::vector<float> classify(const EncoderOutput& enc, const Params& params,
                            const ModelConfig& cfg) {
  if (enc.valid_len < 1 || enc.valid_len > enc.h.rows)
    throw EmptyInput("classify: no valid encoder rows");
  const int D = enc.h.cols;
  std::vector<double> pooled(D, 0.0);
  if (cfg.pooling == "mean") {
    for (int i = 0; i < enc.valid_len; ++i)
      for (int j = 0; j < D; ++j) pooled[j] += enc.h.at(i, j);
    for (auto& v : pooled) v /= enc.valid_len;
  } else if (cfg.pooling == "max") {
    for (int j = 0; j < D; ++j) {
      float best = enc.h.at(0, j);
      for (int i = 1; i < enc.valid_len; ++i) best = std::max(best, enc.h.at(i, j));
      pooled[j] = best;
    }
  } else if (cfg.pooling == "first") {
    for (int j = 0; j < D; ++j) pooled[j] = enc.h.at(0, j);
  } else {
    throw ConfigError("unknown pooling: " + cfg.pooling);
  }

  const auto& w = params.get("cls.w");
  const auto& b = params.get("cls.b");
  if (w.cols != D) throw ShapeMismatch("classifier width does not match encoder");
  std::vector<double> logits(w.rows);
  for (int c = 0; c < w.rows; ++c) {
    double acc = b.at(0, c);
    for (int j = 0; j < D; ++j) acc += static_cast<double>(w.at(c, j)) * pooled[j];
    logits[c] = acc;
  }
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - mx);
  std::vector<float> probs(w.rows);
  for (int c = 0; c < w.rows; ++c)
    probs[c] = static_cast<float>(std::exp(logits[c] - mx) / denom);
  return probs;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'N', 'T', 'C', 'K'};
constexpr uint32_t kVersion = 1;

json config_to_json(const ModelConfig& c) {
  return json{{"conv_layers", c.conv_layers},
              {"conv_stride", c.conv_stride},
              {"conv_kernel", c.conv_kernel},
              {"conv_channels", c.conv_channels},
              {"enc_layers", c.enc_layers},
              {"dec_layers", c.dec_layers},
              {"hidden", c.hidden},
              {"ffn", c.ffn},
              {"heads", c.heads},
              {"dropout", c.dropout},
              {"input_dim", c.input_dim},
              {"vocab_size", c.vocab_size},
              {"n_classes", c.n_classes},
              {"max_positions", c.max_positions},
              {"pooling", c.pooling}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.conv_layers = j.at("conv_layers").get<int>();
  c.conv_stride = j.at("conv_stride").get<int>();
  c.conv_kernel = j.at("conv_kernel").get<int>();
  c.conv_channels = j.at("conv_channels").get<int>();
  c.enc_layers = j.at("enc_layers").get<int>();
  c.dec_layers = j.at("dec_layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.ffn = j.at("ffn").get<int>();
  c.heads = j.at("heads").get<int>();
  c.dropout = j.at("dropout").get<float>();
  c.input_dim = j.at("input_dim").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.n_classes = j.at("n_classes").get<int>();
  c.max_positions = j.at("max_positions").get<int>();
  c.pooling = j.at("pooling").get<std::string>();
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Params& params,
                     const ModelConfig& cfg, const Vocabulary& vocab,
                     const std::unordered_map<std::string, std::string>& run_config) {
  json header;
  header["config"] = config_to_json(cfg);
  header["vocab"] = vocab.tokens;
  json run = json::object();
  {
    // Deterministic key order in the serialized header.
    std::vector<std::string> keys;
    for (const auto& kv : run_config) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) run[k] = run_config.at(k);
  }
  header["run_config"] = run;
  json dir = json::array();
  for (int i = 0; i < params.count(); ++i) {
    dir.push_back(json{{"name", params.names[i]},
                       {"rows", params.values[i].rows},
                       {"cols", params.values[i].cols}});
  }
  header["tensors"] = dir;
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, 4);
  const uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  const uint64_t head_len = head.size();
  out.write(reinterpret_cast<const char*>(&head_len), sizeof head_len);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& t : params.values) {
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  out.flush();
  if (!out) throw IoError("short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw CorruptCheckpoint(path + ": bad magic");
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in || version != kVersion)
    throw CorruptCheckpoint(path + ": unsupported version");
  uint64_t head_len = 0;
  in.read(reinterpret_cast<char*>(&head_len), sizeof head_len);
  if (!in || head_len == 0 || head_len > (1ull << 30))
    throw CorruptCheckpoint(path + ": bad header length");
  std::string head(head_len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!in) throw CorruptCheckpoint(path + ": truncated header");

  json header;
  try {
    header = json::parse(head);
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(path + ": header is not valid JSON");
  }

  Checkpoint ck;
  try {
    ck.config = config_from_json(header.at("config"));
    ck.vocab.tokens = header.at("vocab").get<std::vector<std::string>>();
    if (header.contains("run_config")) {
      for (const auto& [k, v] : header.at("run_config").items())
        ck.run_config[k] = v.get<std::string>();
    }
    for (const auto& entry : header.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const int rows = entry.at("rows").get<int>();
      const int cols = entry.at("cols").get<int>();
      if (rows < 1 || cols < 1)
        throw CorruptCheckpoint(path + ": bad shape for " + name);
      Tensor<float> t(rows, cols);
      in.read(reinterpret_cast<char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
      if (!in) throw CorruptCheckpoint(path + ": truncated payload at " + name);
      ck.params.add(name, std::move(t));
    }
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(path + ": malformed header field: " + e.what());
  }
  // Any trailing bytes mean the file does not match its directory.
  in.peek();
  if (!in.eof()) throw CorruptCheckpoint(path + ": trailing bytes after payload");
  return ck;
}

}  // namespace velo
