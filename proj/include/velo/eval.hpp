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

#ifndef VELO_EVAL_HPP_
#define VELO_EVAL_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "velo/model.hpp"
#include "velo/train.hpp"

namespace velo {

// Speaker-disjoint fold assignment. std::map keeps iteration deterministic.
struct FoldPlan {
  int k = 5;
  std::map<std::string, int> assignment;  // speaker_id -> fold

  std::vector<std::string> fold_speakers(int fold) const;
  std::vector<int> fold_sizes() const;
};

// Speakers stratified by rating, shuffled per seed within each stratum,
// then dealt round-robin. A speaker's stratum is its maximum rating.
// stratify=false shuffles all speakers as one stratum (ablation mode).
FoldPlan speaker_folds(const std::vector<ManifestRecord>& records, int k,
                       uint64_t seed, bool stratify = true);

// Mean of the utterance probability vectors, argmax, ties toward the lower
// class index.
int aggregate_speaker(const std::vector<std::vector<float>>& utterance_probs);

// Alternative rule: per-utterance argmax, then majority vote; all ties
// toward the lower class index.
int aggregate_speaker_vote(const std::vector<std::vector<float>>& utterance_probs);

enum class Aggregate { kMeanProb, kVote };

// Rows are true classes, columns predictions.
struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<int64_t> counts;  // n_classes x n_classes row-major

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int c)
      : n_classes(c), counts(static_cast<size_t>(c) * c, 0) {}

  int64_t& at(int truth, int pred) {
    return counts[static_cast<size_t>(truth) * n_classes + pred];
  }
  int64_t at(int truth, int pred) const {
    return counts[static_cast<size_t>(truth) * n_classes + pred];
  }
  int64_t total() const;
  int64_t trace() const;
  void add(const ConfusionMatrix& other);
};

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> precision;        // per class, 0 when column empty
  std::vector<bool> precision_defined;  // false when the column is empty
  double macro_precision = 0.0;         // mean over all classes
  ConfusionMatrix confusion;
};

Metrics precision_metrics(const std::vector<int>& truth,
                          const std::vector<int>& pred, int n_classes);

struct FoldResult {
  int fold = 0;
  std::string task;  // HD | HA
  int n_speakers = 0;
  Metrics metrics;
};

struct TaskSummary {
  std::string task;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population form over the k fold values
  double mean_macro_precision = 0.0;
  double std_macro_precision = 0.0;
  ConfusionMatrix confusion;  // summed over folds
};

struct CvReport {
  FoldPlan plan;
  std::vector<FoldResult> folds;      // k rows per task
  std::vector<TaskSummary> summaries; // HD then HA
};

// Five-fold speaker-level cross-validation of both tasks. When asr_ckpt is
// non-null each fold starts from the transferred encoder; otherwise from
// random initialization. The classifier head seed is shared by both arms so
// runs differ only in the encoder.
CvReport cross_validate(const std::string& clp_manifest, const Checkpoint* asr_ckpt,
                        const ModelConfig& base_mcfg, const TrainConfig& cls_tcfg,
                        const FrontendConfig& fcfg, uint64_t seed, int k = 5,
                        Aggregate aggregate = Aggregate::kMeanProb,
                        bool stratify = true);

// Frame activations a_i = (1/D)|sum_j h_ij| plus the feature matrix they
// were computed from.
struct ActivationTrace {
  std::vector<float> a;
  FeatureMatrix mel;
};

// The bare formula, exposed for oracle tests and stub injection.
std::vector<float> trace_from_state(const Tensor<float>& h);

// Eval-mode encode of (normalized) features followed by trace_from_state.
ActivationTrace activation_trace(const FeatureMatrix& features, const Params& params,
                                 const ModelConfig& cfg);

// Writes activation_<id>.csv (frame, activation) and melspec_<id>.csv.
void write_trace_csvs(const std::string& out_dir, const std::string& id,
                      const ActivationTrace& trace);

// metrics.tsv (fold rows + mean±std summary per task), confusion_<task>.csv
// raw counts + row-normalized variants, confusion.csv = the HA matrix, and
// activation_<id>.csv / melspec_<id>.csv per trace.
void emit_report(const CvReport& report,
                 const std::vector<std::pair<std::string, ActivationTrace>>& traces,
                 const std::string& out_dir);

// Parses a metrics.tsv produced by emit_report (round-trip checked in tests).
struct ParsedMetrics {
  std::vector<FoldResult> folds;  // metrics.confusion left empty
  std::vector<TaskSummary> summaries;
};
ParsedMetrics parse_metrics(const std::string& path);

}  // namespace velo

#endif  // VELO_EVAL_HPP_
