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

#ifndef VELO_TRAIN_HPP_
#define VELO_TRAIN_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "velo/augment.hpp"
#include "velo/corpus.hpp"
#include "velo/frontend.hpp"
#include "velo/model.hpp"

namespace velo {

// Optimization constants. Stage defaults follow the ASR / CLS columns of
// the experimental setup; the schedule (linear warmup then inverse-sqrt
// decay for ASR, constant for CLS) is our choice, only peak rates are given.
struct TrainConfig {
  std::string stage = "asr";  // asr | cls
  int batch_size = 256;
  double learning_rate = 2e-3;
  int epochs = 100;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
  double grad_clip = 10.0;        // global norm; <= 0 disables
  double warmup_fraction = 0.1;   // asr only
  uint64_t seed = 1;
  bool augment = true;            // SpecAugment during ASR training only
  double stop_cer = -1.0;         // asr early stop when dev CER <= this; < 0 disables

  static TrainConfig asr_defaults();
  static TrainConfig cls_defaults();
  void validate() const;
  std::string to_json() const;
};

// Append-only record of a run. Wall clock is kept out of the serialized log
// so equal-seed runs produce identical files.
struct TrainLog {
  struct Entry {
    int64_t step = 0;
    double loss = 0.0;
    std::string metric = "-";  // dev CER (asr) / train accuracy (cls), "-" when absent
  };

  std::vector<Entry> entries;
  uint64_t seed = 0;
  std::string config_snapshot;  // JSON of the TrainConfig
  double wall_clock_sec = 0.0;

  void add(int64_t step, double loss, std::string metric = "-");
  // Lines: `step<TAB>loss<TAB>metric`, preceded by `# seed` / `# config`
  // comment lines.
  void save(const std::string& path) const;
  static TrainLog parse(const std::string& path);
};

// ---------------------------------------------------------------------------
// Losses (plain reference forms; the training loop uses the fused graph op,
// which must agree with these)
// ---------------------------------------------------------------------------

// Mean over non-PAD target positions of -log softmax(logits)[target].
double asr_loss(const Tensor<float>& logits, const std::vector<int>& targets);

// -log probs[label].
double cls_loss(const std::vector<float>& probs, int label);

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

// Learning rate at 1-based step. ASR: linear to peak over warmup steps then
// peak * sqrt(warmup/step). CLS (warmup_fraction == 0): constant.
double lr_at(const TrainConfig& cfg, int64_t step, int64_t total_steps);

// Scales grads in place to global norm <= max_norm; returns the pre-clip norm.
template <typename S>
double clip_global_norm(std::vector<Tensor<S>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (S v : g.data) sq += static_cast<double>(v) * static_cast<double>(v);
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const S scale = static_cast<S>(max_norm / norm);
    for (auto& g : grads)
      for (S& v : g.data) v *= scale;
  }
  return norm;
}

template <typename S>
class Adam {
 public:
  explicit Adam(const ParamSet<S>& params) {
    for (const auto& t : params.values) {
      m_.emplace_back(t.rows, t.cols);
      v_.emplace_back(t.rows, t.cols);
    }
  }

  int64_t steps() const { return t_; }

  // grads aligned with params order; lr already scheduled.
  void step(ParamSet<S>& params, const std::vector<Tensor<S>>& grads, double lr,
            const TrainConfig& cfg) {
    if (grads.size() != params.values.size())
      throw ShapeMismatch("adam: gradient/parameter count mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < grads.size(); ++i) {
      Tensor<S>& p = params.values[i];
      const Tensor<S>& g = grads[i];
      Tensor<S>& m = m_[i];
      Tensor<S>& v = v_[i];
      for (size_t j = 0; j < p.data.size(); ++j) {
        const double gj = g.data[j];
        const double mj = cfg.beta1 * m.data[j] + (1.0 - cfg.beta1) * gj;
        const double vj = cfg.beta2 * v.data[j] + (1.0 - cfg.beta2) * gj * gj;
        m.data[j] = static_cast<S>(mj);
        v.data[j] = static_cast<S>(vj);
        p.data[j] -= static_cast<S>(lr * (mj / bc1) /
                                    (std::sqrt(vj / bc2) + cfg.eps));
      }
    }
  }

 private:
  std::vector<Tensor<S>> m_, v_;
  int64_t t_ = 0;
};

// ---------------------------------------------------------------------------
// Decoding and CER
// ---------------------------------------------------------------------------

int levenshtein(const std::string& a, const std::string& b);

// Levenshtein(hyp, ref) / len(ref); ref must be nonempty.
double cer(const std::string& hyp, const std::string& ref);

// Argmax decoding from BOS until EOS or max_len emitted tokens. Returns the
// full sequence including BOS (and EOS when reached).
std::vector<int> greedy_decode(const EncoderOutput& enc, const Params& params,
                               const ModelConfig& cfg, int max_len);

// ---------------------------------------------------------------------------
// Training entry points
// ---------------------------------------------------------------------------

struct PretrainResult {
  std::string checkpoint_path;
  TrainLog log;
  double best_cer = -1.0;
};

// Sequence MLE over shuffled padded mini-batches. Vocabulary comes from the
// train manifest's transcripts only; the best-dev-CER checkpoint is kept.
PretrainResult pretrain_asr(const std::string& asr_manifest,
                            const std::string& dev_manifest, ModelConfig mcfg,
                            const TrainConfig& tcfg, const FrontendConfig& fcfg,
                            const AugmentPolicy& aug, const std::string& out_dir);

// Encoder tensors copied from the checkpoint, classifier tensors freshly
// seeded, decoder tensors discarded.
Params transfer_encoder(const Checkpoint& asr_ckpt, const ModelConfig& cls_cfg,
                        uint64_t cls_seed);

// Rating -> label under |C| classes: identity for 4, normal-vs-hypernasal
// (rating > 0) for 2.
int remap_rating(int rating, int n_classes);

struct LabeledExample {
  std::string id;
  std::string speaker;
  FeatureMatrix feats;  // normalized
  int label = 0;
};

// Loads a rated manifest and featurizes it. Every record must carry a rating.
std::vector<LabeledExample> load_labeled_examples(const std::string& manifest,
                                                  const FrontendConfig& fcfg,
                                                  int n_classes);

// Classifier cross-entropy over in-memory examples; params updated in place.
// Returns true when some class in [0, n_classes) had no training example
// (warned, not fatal).
bool finetune_core(const std::vector<LabeledExample>& examples, Params& params,
                   const ModelConfig& mcfg, const TrainConfig& tcfg,
                   TrainLog& log, const std::string& dump_dir = "");

// Utterance-level accuracy of eval-mode classification over examples.
double train_accuracy(const std::vector<LabeledExample>& examples,
                      const Params& params, const ModelConfig& mcfg);

struct FinetuneResult {
  std::string checkpoint_path;
  TrainLog log;
  bool empty_class = false;
};

// File-level wrapper: featurize manifest, run finetune_core from the given
// initial parameters, save the final-epoch checkpoint.
FinetuneResult finetune_cls(const std::string& clp_manifest, const Params& init,
                            const ModelConfig& mcfg, const TrainConfig& tcfg,
                            const FrontendConfig& fcfg, const std::string& out_dir);

}  // namespace velo

#endif  // VELO_TRAIN_HPP_
