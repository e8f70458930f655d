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

#include "velo/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace velo {

namespace fs = std::filesystem;
using json = nlohmann::json;

TrainConfig TrainConfig::asr_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::cls_defaults() {
  TrainConfig c;
  c.stage = "cls";
  c.batch_size = 32;
  c.learning_rate = 2e-4;
  c.epochs = 30;
  c.warmup_fraction = 0.0;
  c.augment = false;
  return c;
}

void TrainConfig::validate() const {
  if (stage != "asr" && stage != "cls") throw ConfigError("unknown stage: " + stage);
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw ConfigError("adam betas must be in [0, 1)");
  if (eps <= 0.0) throw ConfigError("adam eps must be positive");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
    throw ConfigError("warmup_fraction must be in [0, 1)");
}

std::string TrainConfig::to_json() const {
  json j{{"stage", stage},
         {"batch_size", batch_size},
         {"learning_rate", learning_rate},
         {"epochs", epochs},
         {"beta1", beta1},
         {"beta2", beta2},
         {"eps", eps},
         {"grad_clip", grad_clip},
         {"warmup_fraction", warmup_fraction},
         {"seed", seed},
         {"augment", augment},
         {"stop_cer", stop_cer}};
  return j.dump();
}

void TrainLog::add(int64_t step, double loss, std::string metric) {
  entries.push_back(Entry{step, loss, std::move(metric)});
}

void TrainLog::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "# seed\t" << seed << "\n";
  out << "# config\t" << config_snapshot << "\n";
  char buf[64];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.loss);
    out << e.step << "\t" << buf << "\t" << e.metric << "\n";
  }
  if (!out.flush()) throw IoError("short write to " + path);
}

TrainLog TrainLog::parse(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  TrainLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      std::string rest;
      std::getline(ss, rest);
      if (!rest.empty() && rest[0] == '\t') rest.erase(0, 1);
      while (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      if (key == "seed") log.seed = std::stoull(rest);
      if (key == "config") log.config_snapshot = rest;
      continue;
    }
    std::istringstream ss(line);
    Entry e;
    std::string loss_s;
    if (!(std::getline(ss, loss_s, '\t'))) throw IoError(path + ": bad log line");
    e.step = std::stoll(loss_s);
    if (!(std::getline(ss, loss_s, '\t'))) throw IoError(path + ": bad log line");
    e.loss = std::stod(loss_s);
    if (!(std::getline(ss, e.metric, '\t'))) throw IoError(path + ": bad log line");
    log.entries.push_back(std::move(e));
  }
  return log;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

double asr_loss(const Tensor<float>& logits, const std::vector<int>& targets) {
  if (static_cast<int>(targets.size()) != logits.rows)
    throw LengthMismatch("asr_loss: " + std::to_string(targets.size()) +
                         " targets for " + std::to_string(logits.rows) + " rows");
  double total = 0.0;
  int n = 0;
  for (int r = 0; r < logits.rows; ++r) {
    const int t = targets[r];
    if (t == Vocabulary::kPad) continue;
    if (t < 0 || t >= logits.cols)
      throw TokenOutOfRange("asr_loss: target " + std::to_string(t));
    const float* x = logits.row(r);
    double m = x[0];
    for (int c = 1; c < logits.cols; ++c) m = std::max(m, static_cast<double>(x[c]));
    double z = 0.0;
    for (int c = 0; c < logits.cols; ++c) z += std::exp(x[c] - m);
    total += (m + std::log(z)) - x[t];
    ++n;
  }
  if (n == 0) throw EmptyInput("asr_loss: only PAD targets");
  return total / n;
}

double cls_loss(const std::vector<float>& probs, int label) {
  if (label < 0 || label >= static_cast<int>(probs.size()))
    throw LabelOutOfRange("cls_loss: label " + std::to_string(label) + " for " +
                          std::to_string(probs.size()) + " classes");
  return -std::log(static_cast<double>(probs[label]));
}

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

double lr_at(const TrainConfig& cfg, int64_t step, int64_t total_steps) {
  if (cfg.warmup_fraction <= 0.0) return cfg.learning_rate;
  const int64_t warm = std::max<int64_t>(
      1, std::llround(cfg.warmup_fraction * static_cast<double>(total_steps)));
  if (step <= warm)
    return cfg.learning_rate * static_cast<double>(step) / static_cast<double>(warm);
  return cfg.learning_rate *
         std::sqrt(static_cast<double>(warm) / static_cast<double>(step));
}

// ---------------------------------------------------------------------------
// Decoding and CER
// ---------------------------------------------------------------------------

int levenshtein(const std::string& a, const std::string& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  std::vector<int> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (int i = 1; i <= n; ++i) {
    cur[0] = i;
    for (int j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double cer(const std::string& hyp, const std::string& ref) {
  if (ref.empty()) throw EmptyInput("cer: empty reference");
  return static_cast<double>(levenshtein(hyp, ref)) /
         static_cast<double>(ref.size());
}

std::vector<int> greedy_decode(const EncoderOutput& enc, const Params& params,
                               const ModelConfig& cfg, int max_len) {
  if (max_len < 1) throw EmptyInput("greedy_decode: max_len must be positive");
  std::vector<int> seq{Vocabulary::kBos};
  for (int i = 0; i < max_len; ++i) {
    const Tensor<float> logits = decode(seq, enc, params, cfg);
    const float* row = logits.row(logits.rows - 1);
    int best = 0;
    for (int c = 1; c < logits.cols; ++c)
      if (row[c] > row[best]) best = c;
    seq.push_back(best);
    if (best == Vocabulary::kEos) break;
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Shared loop plumbing
// ---------------------------------------------------------------------------

namespace {

FeatureMatrix features_for(const fs::path& manifest_dir, const ManifestRecord& rec,
                           const FrontendConfig& fcfg) {
  int rate = 0;
  auto samples = read_wav((manifest_dir / rec.audio_path).string(), &rate);
  if (rate != fcfg.sample_rate) samples = resample(samples, rate, fcfg.sample_rate);
  return normalize(logmel(samples, fcfg));
}

Tensor<float> pad_features(const FeatureMatrix& f, int rows) {
  Tensor<float> x(rows, f.channels);
  std::copy(f.data.begin(), f.data.end(), x.data.begin());
  return x;
}

std::vector<Tensor<float>> zero_like(const Params& params) {
  std::vector<Tensor<float>> grads;
  grads.reserve(params.values.size());
  for (const auto& t : params.values) grads.emplace_back(t.rows, t.cols);
  return grads;
}

void accumulate(const Forward<float>& fwd, const Params& params,
                std::vector<Tensor<float>>& grads) {
  for (size_t i = 0; i < params.names.size(); ++i) {
    const Tensor<float>* g = fwd.param_grad(params.names[i]);
    if (g == nullptr || g->size() == 0) continue;
    float* acc = grads[i].data.data();
    const float* src = g->data.data();
    for (size_t j = 0; j < grads[i].data.size(); ++j) acc[j] += src[j];
  }
}

[[noreturn]] void diverge(const std::string& dump_dir, const std::string& stage,
                          int epoch, int64_t step, double loss, double lr,
                          const Params& params) {
  if (!dump_dir.empty()) {
    std::ofstream out(fs::path(dump_dir) / "divergence.txt");
    out << "stage\t" << stage << "\nepoch\t" << epoch << "\nstep\t" << step
        << "\nloss\t" << loss << "\nlr\t" << lr << "\n";
    for (int i = 0; i < params.count(); ++i) {
      double mx = 0.0;
      for (float v : params.values[i].data)
        mx = std::max(mx, static_cast<double>(std::abs(v)));
      out << "max_abs\t" << params.names[i] << "\t" << mx << "\n";
    }
  }
  throw Divergence("non-finite " + stage + " loss " + std::to_string(loss) +
                   " at step " + std::to_string(step));
}

std::vector<std::vector<int>> batch_plan(int n, int batch_size,
                                         const std::vector<int>& order) {
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < n; start += batch_size) {
    const int end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

}  // namespace

// ---------------------------------------------------------------------------
// ASR pretraining
// ---------------------------------------------------------------------------

PretrainResult pretrain_asr(const std::string& asr_manifest,
                            const std::string& dev_manifest, ModelConfig mcfg,
                            const TrainConfig& tcfg, const FrontendConfig& fcfg,
                            const AugmentPolicy& aug, const std::string& out_dir) {
  const auto t_start = std::chrono::steady_clock::now();
  tcfg.validate();
  if (tcfg.stage != "asr") throw ConfigError("pretrain_asr requires stage asr");
  if (tcfg.augment) aug.validate(fcfg.n_mels);
  fs::create_directories(out_dir);

  const auto train_recs = load_manifest(asr_manifest);
  const auto dev_recs = load_manifest(dev_manifest);
  const fs::path train_dir = fs::path(asr_manifest).parent_path();
  const fs::path dev_dir = fs::path(dev_manifest).parent_path();

  std::vector<std::string> texts;
  for (const auto& r : train_recs) {
    if (r.text.empty())
      throw MalformedManifest(r.id + ": pretraining requires a transcript");
    texts.push_back(r.text);
  }
  const Vocabulary vocab = build_vocabulary(texts);
  mcfg.vocab_size = vocab.size();
  mcfg.validate();

  const int n = static_cast<int>(train_recs.size());
  std::vector<FeatureMatrix> feats(n);
  std::vector<std::vector<int>> tokens(n);
  for (int i = 0; i < n; ++i) {
    feats[i] = features_for(train_dir, train_recs[i], fcfg);
    tokens[i] = encode_text(train_recs[i].text, vocab);
  }
  std::vector<FeatureMatrix> dev_feats(dev_recs.size());
  for (size_t i = 0; i < dev_recs.size(); ++i) {
    if (dev_recs[i].text.empty())
      throw MalformedManifest(dev_recs[i].id + ": dev record lacks a transcript");
    dev_feats[i] = features_for(dev_dir, dev_recs[i], fcfg);
  }

  Params params = init_parameters<float>(mcfg, Stage::kAsr,
                                         derive_seed(tcfg.seed, "init"));
  Adam<float> opt(params);
  const int steps_per_epoch = (n + tcfg.batch_size - 1) / tcfg.batch_size;
  const int64_t total_steps =
      static_cast<int64_t>(steps_per_epoch) * tcfg.epochs;

  TrainLog log;
  log.seed = tcfg.seed;
  log.config_snapshot = tcfg.to_json();

  const std::string ckpt_path = (fs::path(out_dir) / "asr.ckpt").string();
  double best_cer = std::numeric_limits<double>::infinity();
  int64_t step = 0;
  uint64_t draw = 0;  // per-utterance augmentation/dropout seed tag
  char metric_buf[64];
  bool stop = false;

  for (int epoch = 0; epoch < tcfg.epochs && !stop; ++epoch) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(tcfg.seed, "shuffle", static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    int epoch_batches = 0;
    for (const auto& members : batch_plan(n, tcfg.batch_size, order)) {
      int64_t total_targets = 0;
      int max_frames = 0;
      int max_tok = 0;
      for (int idx : members) {
        total_targets += static_cast<int64_t>(tokens[idx].size()) - 1;
        max_frames = std::max(max_frames, feats[idx].frames);
        max_tok = std::max(max_tok, static_cast<int>(tokens[idx].size()));
      }

      auto grads = zero_like(params);
      double batch_sum = 0.0;
      for (int idx : members) {
        const uint64_t tag = draw++;
        FeatureMatrix f = feats[idx];
        if (tcfg.augment) {
          Rng aug_rng(derive_seed(tcfg.seed, "augment", tag));
          f = spec_augment(f, aug, aug_rng);
        }
        Forward<float> fwd(mcfg, params, /*train=*/true,
                           derive_seed(tcfg.seed, "dropout", tag));
        const auto enc = fwd.encode(pad_features(f, max_frames), f.frames);

        std::vector<int> padded = tokens[idx];
        padded.resize(max_tok, Vocabulary::kPad);
        const int n_valid = static_cast<int>(tokens[idx].size()) - 1;
        const std::vector<int> input(padded.begin(), padded.end() - 1);
        const int logits = fwd.decode(input, n_valid, enc);
        std::vector<int> targets(padded.begin() + 1, padded.end());
        std::vector<float> weights(targets.size(), 0.0f);
        for (int r = 0; r < n_valid; ++r) weights[r] = 1.0f;
        const int loss_node =
            fwd.graph().softmax_xent(logits, std::move(targets), std::move(weights));
        batch_sum += fwd.graph().value(loss_node).data[0];
        fwd.graph().backward(loss_node,
                             1.0f / static_cast<float>(total_targets));
        accumulate(fwd, params, grads);
      }

      const double batch_loss = batch_sum / static_cast<double>(total_targets);
      const double lr = lr_at(tcfg, step + 1, total_steps);
      if (!std::isfinite(batch_loss))
        diverge(out_dir, "asr", epoch, step + 1, batch_loss, lr, params);
      clip_global_norm(grads, tcfg.grad_clip);
      ++step;
      opt.step(params, grads, lr, tcfg);
      log.add(step, batch_loss);
      epoch_loss += batch_loss;
      ++epoch_batches;
    }

    double cer_sum = 0.0;
    for (size_t i = 0; i < dev_recs.size(); ++i) {
      const auto enc = encode(dev_feats[i], params, mcfg);
      const int cap = 2 * (static_cast<int>(dev_recs[i].text.size()) + 2);
      const auto seq = greedy_decode(enc, params, mcfg, cap);
      cer_sum += cer(decode_tokens(seq, vocab), dev_recs[i].text);
    }
    const double dev_cer = cer_sum / static_cast<double>(dev_recs.size());
    std::snprintf(metric_buf, sizeof metric_buf, "%.6f", dev_cer);
    log.add(step, epoch_loss / epoch_batches, metric_buf);

    if (dev_cer < best_cer) {
      best_cer = dev_cer;
      save_checkpoint(ckpt_path, params, mcfg, vocab,
                      {{"stage", "asr"}, {"seed", std::to_string(tcfg.seed)}});
    }
    if (tcfg.stop_cer >= 0.0 && dev_cer <= tcfg.stop_cer) stop = true;
  }

  log.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  log.save((fs::path(out_dir) / "asr_train_log.tsv").string());
  return PretrainResult{ckpt_path, std::move(log), best_cer};
}

// ---------------------------------------------------------------------------
// Encoder transfer
// ---------------------------------------------------------------------------

Params transfer_encoder(const Checkpoint& asr_ckpt, const ModelConfig& cls_cfg,
                        uint64_t cls_seed) {
  cls_cfg.validate();
  Params out = init_parameters<float>(cls_cfg, Stage::kCls, cls_seed);
  for (const auto& spec : tensor_specs(cls_cfg, Stage::kCls)) {
    if (param_group(spec.name) != ParamGroup::kEncoder) continue;
    if (!asr_ckpt.params.has(spec.name))
      throw ShapeMismatch("checkpoint lacks tensor " + spec.name);
    const auto& src = asr_ckpt.params.get(spec.name);
    if (src.rows != spec.rows || src.cols != spec.cols)
      throw ShapeMismatch("tensor " + spec.name + " has shape " +
                          std::to_string(src.rows) + "x" + std::to_string(src.cols) +
                          ", expected " + std::to_string(spec.rows) + "x" +
                          std::to_string(spec.cols));
    out.get(spec.name) = src;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classifier fine-tuning
// ---------------------------------------------------------------------------

int remap_rating(int rating, int n_classes) {
  if (rating < 0 || rating > 3)
    throw LabelOutOfRange("rating " + std::to_string(rating));
  if (n_classes == 4) return rating;
  if (n_classes == 2) return rating > 0 ? 1 : 0;
  throw ConfigError("rating remap defined for 2 or 4 classes");
}

std::vector<LabeledExample> load_labeled_examples(const std::string& manifest,
                                                  const FrontendConfig& fcfg,
                                                  int n_classes) {
  const auto recs = load_manifest(manifest);
  const fs::path dir = fs::path(manifest).parent_path();
  std::vector<LabeledExample> out;
  out.reserve(recs.size());
  for (const auto& r : recs) {
    if (r.rating < 0)
      throw MalformedManifest(r.id + ": classifier training requires a rating");
    LabeledExample e;
    e.id = r.id;
    e.speaker = r.speaker_id;
    e.feats = features_for(dir, r, fcfg);
    e.label = remap_rating(r.rating, n_classes);
    out.push_back(std::move(e));
  }
  return out;
}

double train_accuracy(const std::vector<LabeledExample>& examples,
                      const Params& params, const ModelConfig& mcfg) {
  if (examples.empty()) throw EmptyInput("train_accuracy: no examples");
  int hits = 0;
  for (const auto& e : examples) {
    const auto probs = classify(encode(e.feats, params, mcfg), params, mcfg);
    int best = 0;
    for (int c = 1; c < static_cast<int>(probs.size()); ++c)
      if (probs[c] > probs[best]) best = c;
    if (best == e.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

bool finetune_core(const std::vector<LabeledExample>& examples, Params& params,
                   const ModelConfig& mcfg, const TrainConfig& tcfg,
                   TrainLog& log, const std::string& dump_dir) {
  tcfg.validate();
  if (tcfg.stage != "cls") throw ConfigError("finetune requires stage cls");
  mcfg.validate();
  check_shapes(params, mcfg, Stage::kCls);
  if (examples.empty()) throw EmptyInput("finetune: no examples");

  std::vector<int> counts(mcfg.n_classes, 0);
  for (const auto& e : examples) {
    if (e.label < 0 || e.label >= mcfg.n_classes)
      throw LabelOutOfRange("label " + std::to_string(e.label));
    ++counts[e.label];
  }
  bool empty_class = false;
  for (int c = 0; c < mcfg.n_classes; ++c) {
    if (counts[c] == 0) {
      empty_class = true;
      std::fprintf(stderr, "warning: EmptyClass: class %d has no training examples\n", c);
    }
  }

  const int n = static_cast<int>(examples.size());
  Adam<float> opt(params);
  const int steps_per_epoch = (n + tcfg.batch_size - 1) / tcfg.batch_size;
  const int64_t total_steps = static_cast<int64_t>(steps_per_epoch) * tcfg.epochs;
  int64_t step = 0;
  uint64_t draw = 0;
  char metric_buf[64];

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(tcfg.seed, "shuffle", static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    int epoch_batches = 0;
    for (const auto& members : batch_plan(n, tcfg.batch_size, order)) {
      int max_frames = 0;
      for (int idx : members) max_frames = std::max(max_frames, examples[idx].feats.frames);

      auto grads = zero_like(params);
      double batch_sum = 0.0;
      for (int idx : members) {
        const uint64_t tag = draw++;
        Forward<float> fwd(mcfg, params, /*train=*/true,
                           derive_seed(tcfg.seed, "dropout", tag));
        const auto enc = fwd.encode(pad_features(examples[idx].feats, max_frames),
                                    examples[idx].feats.frames);
        const int logits = fwd.classify_logits(enc);
        const int loss_node =
            fwd.graph().softmax_xent(logits, {examples[idx].label}, {1.0f});
        batch_sum += fwd.graph().value(loss_node).data[0];
        fwd.graph().backward(loss_node, 1.0f / static_cast<float>(members.size()));
        accumulate(fwd, params, grads);
      }

      const double batch_loss = batch_sum / static_cast<double>(members.size());
      const double lr = lr_at(tcfg, step + 1, total_steps);
      if (!std::isfinite(batch_loss))
        diverge(dump_dir, "cls", epoch, step + 1, batch_loss, lr, params);
      clip_global_norm(grads, tcfg.grad_clip);
      ++step;
      opt.step(params, grads, lr, tcfg);
      log.add(step, batch_loss);
      epoch_loss += batch_loss;
      ++epoch_batches;
    }

    std::snprintf(metric_buf, sizeof metric_buf, "%.6f",
                  train_accuracy(examples, params, mcfg));
    log.add(step, epoch_loss / epoch_batches, metric_buf);
  }
  return empty_class;
}

FinetuneResult finetune_cls(const std::string& clp_manifest, const Params& init,
                            const ModelConfig& mcfg, const TrainConfig& tcfg,
                            const FrontendConfig& fcfg, const std::string& out_dir) {
  const auto t_start = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  const auto examples = load_labeled_examples(clp_manifest, fcfg, mcfg.n_classes);

  Params params = init;
  TrainLog log;
  log.seed = tcfg.seed;
  log.config_snapshot = tcfg.to_json();
  const bool empty_class = finetune_core(examples, params, mcfg, tcfg, log, out_dir);

  const std::string ckpt_path = (fs::path(out_dir) / "cls.ckpt").string();
  save_checkpoint(ckpt_path, params, mcfg, Vocabulary{},
                  {{"stage", "cls"}, {"seed", std::to_string(tcfg.seed)}});
  log.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  log.save((fs::path(out_dir) / "cls_train_log.tsv").string());
  return FinetuneResult{ckpt_path, std::move(log), empty_class};
}

}  // namespace velo
