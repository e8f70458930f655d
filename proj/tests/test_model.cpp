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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "velo/model.hpp"
#include "velo/rng.hpp"

namespace fs = std::filesystem;
using namespace velo;

namespace {

ModelConfig tiny_config(int vocab = 8) {
  ModelConfig cfg;
  cfg.apply_tiny();
  cfg.vocab_size = vocab;
  return cfg;
}

FeatureMatrix random_features(int frames, int channels, uint64_t seed) {
  FeatureMatrix f(frames, channels);
  Rng rng(seed);
  for (float& v : f.data) v = static_cast<float>(rng.uniform_real(-1.0, 1.0));
  return f;
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("velo_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("model: parameter totals match the closed-form count") {
  for (Stage stage : {Stage::kAsr, Stage::kCls, Stage::kFull}) {
    const ModelConfig tiny = tiny_config(29);
    const auto p = init_parameters<float>(tiny, stage, 1);
    CHECK(p.total_size() == oracle::param_count(tiny, stage));
  }
  // Full-size config, counted without materializing the tensors elsewhere.
  ModelConfig full;
  full.vocab_size = 31;
  const auto p = init_parameters<float>(full, Stage::kAsr, 1);
  CHECK(p.total_size() == oracle::param_count(full, Stage::kAsr));
  // Sanity: the full ASR model sits in the tens of millions of parameters.
  CHECK(p.total_size() > 50'000'000);
  CHECK(p.total_size() < 120'000'000);
}

TEST_CASE("model: subsampled length is ceil(ceil(T/2)/2)") {
  const ModelConfig cfg = tiny_config();
  for (int t = 1; t <= 2000; ++t) {
    const int want = static_cast<int>(std::ceil(std::ceil(t / 2.0) / 2.0));
    CHECK(subsampled_length(t, cfg) == want);
  }
}

TEST_CASE("model: initialization is seed-deterministic with documented stats") {
  const ModelConfig cfg = tiny_config();
  const auto a = init_parameters<float>(cfg, Stage::kFull, 5);
  const auto b = init_parameters<float>(cfg, Stage::kFull, 5);
  REQUIRE(a.count() == b.count());
  for (int i = 0; i < a.count(); ++i) {
    CHECK(a.names[i] == b.names[i]);
    CHECK(a.values[i].data == b.values[i].data);
  }
  const auto c = init_parameters<float>(cfg, Stage::kFull, 6);
  bool any_diff = false;
  for (int i = 0; i < a.count(); ++i)
    if (a.values[i].data != c.values[i].data) any_diff = true;
  CHECK(any_diff);

  // Gains 1, biases 0, weights inside the fan-in bound.
  for (float v : a.get("enc.l0.ln1.g").data) CHECK(v == 1.0f);
  for (float v : a.get("enc.l0.attn.bq").data) CHECK(v == 0.0f);
  for (float v : a.get("dec.out.b").data) CHECK(v == 0.0f);
  const auto& w = a.get("enc.l0.attn.wq");
  const float bound = std::sqrt(1.0f / w.cols);
  for (float v : w.data) {
    CHECK(v <= bound);
    CHECK(v >= -bound);
  }
  // Embedding standard deviation near hidden^-0.5.
  const auto& e = a.get("dec.embed");
  double s1 = 0.0, s2 = 0.0;
  for (float v : e.data) {
    s1 += v;
    s2 += static_cast<double>(v) * v;
  }
  const double mean = s1 / e.size();
  const double stdv = std::sqrt(s2 / e.size() - mean * mean);
  CHECK(std::abs(mean) < 0.02);
  CHECK(stdv == doctest::Approx(1.0 / std::sqrt(cfg.hidden)).epsilon(0.1));
}

TEST_CASE("model: check_shapes names the first offender") {
  const ModelConfig cfg = tiny_config();
  auto p = init_parameters<float>(cfg, Stage::kCls, 1);
  check_shapes(p, cfg, Stage::kCls);  // passes as built

  auto wrong = p;
  wrong.get("enc.proj.w") = Tensor<float>(3, 3);
  CHECK_THROWS_WITH_AS(check_shapes(wrong, cfg, Stage::kCls),
                       doctest::Contains("enc.proj.w"), ShapeMismatch);

  ParamSet<float> missing;
  for (int i = 0; i < p.count(); ++i)
    if (p.names[i] != "cls.b") missing.add(p.names[i], p.values[i]);
  CHECK_THROWS_WITH_AS(check_shapes(missing, cfg, Stage::kCls),
                       doctest::Contains("cls.b"), ShapeMismatch);

  auto extra = p;
  extra.add("stray.w", Tensor<float>(1, 1));
  CHECK_THROWS_AS(check_shapes(extra, cfg, Stage::kCls), ShapeMismatch);
}

TEST_CASE("model: config validation") {
  ModelConfig cfg = tiny_config();
  cfg.conv_kernel = 4;  // even kernels break the symmetric padding
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.hidden = 65;  // not divisible by heads
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.dropout = 1.0f;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.pooling = "median";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("model: sinusoid positions follow the sin/cos interleave") {
  const auto pe = sinusoid_positions<double>(5, 8);
  CHECK(pe.rows == 5);
  CHECK(pe.cols == 8);
  for (int i = 0; i < 4; ++i) {
    CHECK(pe.at(0, 2 * i) == 0.0);      // sin(0)
    CHECK(pe.at(0, 2 * i + 1) == 1.0);  // cos(0)
  }
  for (int pos = 0; pos < 5; ++pos)
    for (int i = 0; i < 4; ++i) {
      const double freq = std::exp(-std::log(10000.0) * (2.0 * i / 8));
      CHECK(pe.at(pos, 2 * i) == doctest::Approx(std::sin(pos * freq)).epsilon(1e-12));
      CHECK(pe.at(pos, 2 * i + 1) ==
            doctest::Approx(std::cos(pos * freq)).epsilon(1e-12));
    }
}

TEST_CASE("model: encoder output shape and eval determinism") {
  const ModelConfig cfg = tiny_config();
  const auto params = init_parameters<float>(cfg, Stage::kCls, 3);
  const FeatureMatrix f = random_features(37, cfg.input_dim, 11);
  const EncoderOutput a = encode(f, params, cfg);
  CHECK(a.h.rows == subsampled_length(37, cfg));
  CHECK(a.h.cols == cfg.hidden);
  CHECK(a.valid_len == a.h.rows);
  const EncoderOutput b = encode(f, params, cfg);
  CHECK(a.h.data == b.h.data);  // eval mode is bitwise repeatable
}

TEST_CASE("model: padding rows never change valid encoder rows") {
  // Zero-pad the features by extra rows and keep valid_frames fixed: valid
  // output rows and classifier logits must match the unpadded run exactly.
  const ModelConfig cfg = tiny_config();
  const auto params = init_parameters<float>(cfg, Stage::kCls, 4);
  const int T = 23;
  const FeatureMatrix f = random_features(T, cfg.input_dim, 21);

  Tensor<float> x(T, cfg.input_dim);
  x.data = f.data;
  Forward<float> plain(cfg, params, /*train=*/false, 0);
  const auto enc_plain = plain.encode(x, T);

  for (int extra : {1, 5, 16}) {
    Tensor<float> padded(T + extra, cfg.input_dim);
    std::copy(f.data.begin(), f.data.end(), padded.data.begin());
    Forward<float> pad(cfg, params, /*train=*/false, 0);
    const auto enc_pad = pad.encode(padded, T);
    CHECK(enc_pad.valid_len == enc_plain.valid_len);

    const auto& hp = plain.graph().value(enc_plain.node);
    const auto& hq = pad.graph().value(enc_pad.node);
    for (int r = 0; r < enc_plain.valid_len; ++r)
      for (int c = 0; c < cfg.hidden; ++c) CHECK(hq.at(r, c) == hp.at(r, c));

    const int lp = plain.classify_logits(enc_plain);
    const int lq = pad.classify_logits(enc_pad);
    CHECK(pad.graph().value(lq).data == plain.graph().value(lp).data);
  }
}

TEST_CASE("model: padding rows never change decoder logits") {
  const ModelConfig cfg = tiny_config(9);
  const auto params = init_parameters<float>(cfg, Stage::kAsr, 5);
  const int T = 17;
  Tensor<float> x(T, cfg.input_dim);
  Rng rng(31);
  for (auto& v : x.data) v = static_cast<float>(rng.uniform_real(-1.0, 1.0));
  const std::vector<int> tokens = {1, 4, 5, 6, 2};  // BOS ... EOS

  Forward<float> plain(cfg, params, false, 0);
  const int lp = plain.decode(tokens, 5, plain.encode(x, T));

  // Pad features and tokens; valid counts unchanged.
  Tensor<float> xp(T + 6, cfg.input_dim);
  std::copy(x.data.begin(), x.data.end(), xp.data.begin());
  std::vector<int> tp = tokens;
  tp.insert(tp.end(), 3, Vocabulary::kPad);
  Forward<float> pad(cfg, params, false, 0);
  const int lq = pad.decode(tp, 5, pad.encode(xp, T));

  const auto& a = plain.graph().value(lp);
  const auto& b = pad.graph().value(lq);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < cfg.vocab_size; ++c) CHECK(b.at(r, c) == a.at(r, c));
}

TEST_CASE("model: decoder is causal") {
  const ModelConfig cfg = tiny_config(9);
  const auto params = init_parameters<float>(cfg, Stage::kAsr, 6);
  Tensor<float> x(12, cfg.input_dim);
  Rng rng(32);
  for (auto& v : x.data) v = static_cast<float>(rng.uniform_real(-1.0, 1.0));

  Forward<float> f1(cfg, params, false, 0);
  const int l1 = f1.decode({1, 4, 5, 6}, 4, f1.encode(x, 12));
  Forward<float> f2(cfg, params, false, 0);
  const int l2 = f2.decode({1, 4, 5, 8}, 4, f2.encode(x, 12));

  // Positions before the changed token are unaffected; the changed position
  // itself feeds only later rows, so row 3 differs through its own embed.
  const auto& a = f1.graph().value(l1);
  const auto& b = f2.graph().value(l2);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < cfg.vocab_size; ++c) CHECK(b.at(r, c) == a.at(r, c));
  bool differs = false;
  for (int c = 0; c < cfg.vocab_size; ++c)
    if (a.at(3, c) != b.at(3, c)) differs = true;
  CHECK(differs);
}

TEST_CASE("model: decode input validation") {
  const ModelConfig cfg = tiny_config(9);
  const auto params = init_parameters<float>(cfg, Stage::kAsr, 7);
  const FeatureMatrix f = random_features(10, cfg.input_dim, 41);
  const EncoderOutput enc = encode(f, params, cfg);
  CHECK_THROWS_AS(decode({}, enc, params, cfg), EmptyInput);
  CHECK_THROWS_AS(decode({4, 5}, enc, params, cfg), Error);  // missing BOS
  CHECK_THROWS_AS(decode({1, 9}, enc, params, cfg), TokenOutOfRange);
  CHECK_THROWS_AS(decode({1, -1}, enc, params, cfg), TokenOutOfRange);
  const Tensor<float> logits = decode({1, 4, 2}, enc, params, cfg);
  CHECK(logits.rows == 3);
  CHECK(logits.cols == cfg.vocab_size);
}

TEST_CASE("model: classify returns a probability vector") {
  for (const char* pooling : {"mean", "max", "first"}) {
    ModelConfig cfg = tiny_config();
    cfg.pooling = pooling;
    const auto params = init_parameters<float>(cfg, Stage::kCls, 8);
    const FeatureMatrix f = random_features(29, cfg.input_dim, 51);
    const std::vector<float> probs = classify(encode(f, params, cfg), params, cfg);
    REQUIRE(static_cast<int>(probs.size()) == cfg.n_classes);
    float sum = 0.0f;
    for (float p : probs) {
      CHECK(p >= 0.0f);
      CHECK(p <= 1.0f);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0f).epsilon(1e-5));
  }
}

TEST_CASE("model: dropout is seed-deterministic in train mode") {
  const ModelConfig cfg = tiny_config(9);
  const auto params = init_parameters<float>(cfg, Stage::kAsr, 9);
  Tensor<float> x(15, cfg.input_dim);
  Rng rng(61);
  for (auto& v : x.data) v = static_cast<float>(rng.uniform_real(-1.0, 1.0));
  const std::vector<int> tokens = {1, 4, 5, 2};

  auto run = [&](uint64_t seed) {
    Forward<float> fwd(cfg, params, /*train=*/true, seed);
    const int logits = fwd.decode(tokens, 4, fwd.encode(x, 15));
    return fwd.graph().value(logits).data;
  };
  CHECK(run(100) == run(100));
  CHECK(run(100) != run(101));
}

TEST_CASE("model: checkpoint round trips bitwise") {
  const fs::path dir = temp_dir("ckpt");
  const ModelConfig cfg = tiny_config(11);
  const auto params = init_parameters<float>(cfg, Stage::kAsr, 10);
  Vocabulary vocab;
  vocab.tokens = {"<pad>", "<s>", "</s>", "<unk>", " ", "a", "b", "m", "n", "s", "u"};
  const std::string path = (dir / "m.ckpt").string();
  save_checkpoint(path, params, cfg, vocab, {{"stage", "asr"}, {"seed", "7"}});

  const Checkpoint ck = load_checkpoint(path);
  CHECK(ck.config.hidden == cfg.hidden);
  CHECK(ck.config.enc_layers == cfg.enc_layers);
  CHECK(ck.config.vocab_size == cfg.vocab_size);
  CHECK(ck.config.pooling == cfg.pooling);
  CHECK(ck.vocab.tokens == vocab.tokens);
  CHECK(ck.run_config.at("stage") == "asr");
  CHECK(ck.run_config.at("seed") == "7");
  REQUIRE(ck.params.count() == params.count());
  for (int i = 0; i < params.count(); ++i) {
    CHECK(ck.params.names[i] == params.names[i]);
    CHECK(ck.params.values[i].data == params.values[i].data);
  }

  // Saving the loaded model reproduces the file byte for byte.
  const std::string path2 = (dir / "m2.ckpt").string();
  save_checkpoint(path2, ck.params, ck.config, ck.vocab, ck.run_config);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  CHECK(!b1.empty());
}

TEST_CASE("model: corrupt checkpoints are rejected") {
  const fs::path dir = temp_dir("ckptbad");
  const ModelConfig cfg = tiny_config();
  const auto params = init_parameters<float>(cfg, Stage::kCls, 11);
  const std::string good = (dir / "good.ckpt").string();
  save_checkpoint(good, params, cfg, Vocabulary{});

  CHECK_THROWS_AS(load_checkpoint((dir / "absent.ckpt").string()), IoError);

  auto bytes_of = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), {});
  };
  auto write_bytes = [&](const std::string& name, const std::string& body) {
    const std::string p = (dir / name).string();
    std::ofstream(p, std::ios::binary) << body;
    return p;
  };
  const std::string base = bytes_of(good);

  std::string bad_magic = base;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(load_checkpoint(write_bytes("magic.ckpt", bad_magic)),
                  CorruptCheckpoint);

  std::string bad_version = base;
  bad_version[4] = 9;
  CHECK_THROWS_AS(load_checkpoint(write_bytes("version.ckpt", bad_version)),
                  CorruptCheckpoint);

  CHECK_THROWS_AS(
      load_checkpoint(write_bytes("trunc.ckpt", base.substr(0, base.size() / 2))),
      CorruptCheckpoint);

  CHECK_THROWS_AS(
      load_checkpoint(write_bytes("trailing.ckpt", base + "extra bytes")),
      CorruptCheckpoint);

  // Garbage where the JSON header should be.
  std::string bad_json = base;
  for (size_t i = 16; i < 48 && i < bad_json.size(); ++i) bad_json[i] = '#';
  CHECK_THROWS_AS(load_checkpoint(write_bytes("json.ckpt", bad_json)),
                  CorruptCheckpoint);
}

TEST_CASE("model: encode rejects wrong feature dimensionality") {
  const ModelConfig cfg = tiny_config();
  const auto params = init_parameters<float>(cfg, Stage::kCls, 12);
  Forward<float> fwd(cfg, params, false, 0);
  Tensor<float> wrong(10, cfg.input_dim + 1);
  CHECK_THROWS_AS(fwd.encode(wrong, 10), ShapeMismatch);
  Tensor<float> empty;
  CHECK_THROWS_AS(fwd.encode(empty, 0), EmptyInput);
}
