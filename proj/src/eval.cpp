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

#include "velo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace velo {

namespace fs = std::filesystem;

std::vector<std::string> FoldPlan::fold_speakers(int fold) const {
  std::vector<std::string> out;
  for (const auto& [spk, f] : assignment)
    if (f == fold) out.push_back(spk);
  return out;
}

std::vector<int> FoldPlan::fold_sizes() const {
  std::vector<int> sizes(k, 0);
  for (const auto& [spk, f] : assignment) ++sizes[f];
  return sizes;
}

FoldPlan speaker_folds(const std::vector<ManifestRecord>& records, int k,
                       uint64_t seed, bool stratify) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (records.empty()) throw EmptyManifest("speaker_folds: no records");

  // Speaker stratum = max rating across its utterances (constant per speaker
  // in the synthetic corpora).
  std::map<std::string, int> stratum;
  for (const auto& r : records) {
    auto it = stratum.find(r.speaker_id);
    if (it == stratum.end())
      stratum[r.speaker_id] = stratify ? r.rating : 0;
    else if (stratify)
      it->second = std::max(it->second, r.rating);
  }
  if (static_cast<int>(stratum.size()) < k)
    throw TooFewSpeakers(std::to_string(stratum.size()) + " speakers for " +
                         std::to_string(k) + " folds");

  std::map<int, std::vector<std::string>> strata;
  for (const auto& [spk, rating] : stratum) strata[rating].push_back(spk);

  FoldPlan plan;
  plan.k = k;
  int cursor = 0;
  for (auto& [rating, speakers] : strata) {
    Rng rng(derive_seed(seed, "fold_stratum", static_cast<uint64_t>(rating + 1)));
    rng.shuffle(speakers);
    for (const auto& spk : speakers) plan.assignment[spk] = cursor++ % k;
  }
  return plan;
}

int aggregate_speaker(const std::vector<std::vector<float>>& utterance_probs) {
  if (utterance_probs.empty()) throw EmptyInput("aggregate_speaker: no utterances");
  const size_t c = utterance_probs.front().size();
  if (c == 0) throw EmptyInput("aggregate_speaker: empty probability vector");
  std::vector<double> mean(c, 0.0);
  for (const auto& p : utterance_probs) {
    if (p.size() != c) throw LengthMismatch("aggregate_speaker: ragged vectors");
    for (size_t i = 0; i < c; ++i) mean[i] += p[i];
  }
  int best = 0;
  for (size_t i = 1; i < c; ++i)
    if (mean[i] > mean[best]) best = static_cast<int>(i);  // ties -> lower index
  return best;
}

int aggregate_speaker_vote(const std::vector<std::vector<float>>& utterance_probs) {
  if (utterance_probs.empty()) throw EmptyInput("aggregate_speaker: no utterances");
  const size_t c = utterance_probs.front().size();
  if (c == 0) throw EmptyInput("aggregate_speaker: empty probability vector");
  std::vector<int> votes(c, 0);
  for (const auto& p : utterance_probs) {
    if (p.size() != c) throw LengthMismatch("aggregate_speaker: ragged vectors");
    size_t arg = 0;
    for (size_t i = 1; i < c; ++i)
      if (p[i] > p[arg]) arg = i;
    ++votes[arg];
  }
  int best = 0;
  for (size_t i = 1; i < c; ++i)
    if (votes[i] > votes[best]) best = static_cast<int>(i);
  return best;
}

int64_t ConfusionMatrix::total() const {
  int64_t n = 0;
  for (int64_t v : counts) n += v;
  return n;
}

int64_t ConfusionMatrix::trace() const {
  int64_t n = 0;
  for (int c = 0; c < n_classes; ++c) n += at(c, c);
  return n;
}

void ConfusionMatrix::add(const ConfusionMatrix& other) {
  if (other.n_classes != n_classes)
    throw ShapeMismatch("confusion matrix size mismatch");
  for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

Metrics precision_metrics(const std::vector<int>& truth,
                          const std::vector<int>& pred, int n_classes) {
  if (truth.empty()) throw EmptyInput("precision_metrics: empty lists");
  if (truth.size() != pred.size())
    throw LengthMismatch("precision_metrics: " + std::to_string(truth.size()) +
                         " vs " + std::to_string(pred.size()));
  Metrics m;
  m.confusion = ConfusionMatrix(n_classes);
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n_classes || pred[i] < 0 || pred[i] >= n_classes)
      throw LabelOutOfRange("precision_metrics: label outside [0, " +
                            std::to_string(n_classes) + ")");
    ++m.confusion.at(truth[i], pred[i]);
  }
  m.accuracy = static_cast<double>(m.confusion.trace()) /
               static_cast<double>(m.confusion.total());
  m.precision.assign(n_classes, 0.0);
  m.precision_defined.assign(n_classes, false);
  double macro = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    int64_t col = 0;
    for (int t = 0; t < n_classes; ++t) col += m.confusion.at(t, c);
    if (col > 0) {
      m.precision[c] =
          static_cast<double>(m.confusion.at(c, c)) / static_cast<double>(col);
      m.precision_defined[c] = true;
    }
    macro += m.precision[c];
  }
  m.macro_precision = macro / n_classes;
  return m;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

namespace {

void moments(const std::vector<double>& xs, double* mean, double* stddev) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - m) * (x - m);
  *mean = m;
  *stddev = std::sqrt(sq / static_cast<double>(xs.size()));
}

}  // namespace

CvReport cross_validate(const std::string& clp_manifest, const Checkpoint* asr_ckpt,
                        const ModelConfig& base_mcfg, const TrainConfig& cls_tcfg,
                        const FrontendConfig& fcfg, uint64_t seed, int k,
                        Aggregate aggregate, bool stratify) {
  const auto records = load_manifest(clp_manifest);
  CvReport report;
  report.plan = speaker_folds(records, k, derive_seed(seed, "folds"), stratify);

  // Raw 4-way labels; HD remaps below. Speaker truth = max utterance label.
  const auto examples = load_labeled_examples(clp_manifest, fcfg, 4);
  std::map<std::string, int> speaker_truth;
  for (const auto& e : examples) {
    auto it = speaker_truth.find(e.speaker);
    if (it == speaker_truth.end())
      speaker_truth[e.speaker] = e.label;
    else
      it->second = std::max(it->second, e.label);
  }

  const char* task_names[2] = {"HD", "HA"};
  for (int task = 0; task < 2; ++task) {
    const int n_classes = task == 0 ? 2 : 4;
    ModelConfig mcfg = base_mcfg;
    mcfg.n_classes = n_classes;
    mcfg.validate();

    TaskSummary summary;
    summary.task = task_names[task];
    summary.confusion = ConfusionMatrix(n_classes);
    std::vector<double> accs, macros;

    for (int fold = 0; fold < k; ++fold) {
      std::vector<LabeledExample> train_ex;
      std::set<std::string> train_spk, eval_spk;
      for (const auto& e : examples) {
        if (report.plan.assignment.at(e.speaker) == fold) {
          eval_spk.insert(e.speaker);
          continue;
        }
        LabeledExample t = e;
        t.label = remap_rating(t.label, n_classes);
        train_ex.push_back(std::move(t));
        train_spk.insert(e.speaker);
      }
      for (const auto& spk : eval_spk)
        if (train_spk.count(spk))
          throw Error("speaker leakage across folds: " + spk);

      const uint64_t tag = static_cast<uint64_t>(fold) * 2 + task;
      const uint64_t init_seed = derive_seed(seed, "cls_init", tag);
      Params params = asr_ckpt != nullptr
                          ? transfer_encoder(*asr_ckpt, mcfg, init_seed)
                          : init_parameters<float>(mcfg, Stage::kCls, init_seed);

      TrainConfig ft = cls_tcfg;
      ft.stage = "cls";
      ft.seed = derive_seed(seed, "finetune", tag);
      TrainLog log;
      log.seed = ft.seed;
      log.config_snapshot = ft.to_json();
      finetune_core(train_ex, params, mcfg, ft, log);

      std::map<std::string, std::vector<std::vector<float>>> by_speaker;
      for (const auto& e : examples) {
        if (report.plan.assignment.at(e.speaker) != fold) continue;
        by_speaker[e.speaker].push_back(
            classify(encode(e.feats, params, mcfg), params, mcfg));
      }
      std::vector<int> truth, pred;
      for (const auto& [spk, probs] : by_speaker) {
        truth.push_back(remap_rating(speaker_truth.at(spk), n_classes));
        pred.push_back(aggregate == Aggregate::kVote ? aggregate_speaker_vote(probs)
                                                     : aggregate_speaker(probs));
      }
      FoldResult fr;
      fr.fold = fold;
      fr.task = task_names[task];
      fr.n_speakers = static_cast<int>(truth.size());
      fr.metrics = precision_metrics(truth, pred, n_classes);
      summary.confusion.add(fr.metrics.confusion);
      accs.push_back(fr.metrics.accuracy);
      macros.push_back(fr.metrics.macro_precision);
      report.folds.push_back(std::move(fr));
    }

    moments(accs, &summary.mean_accuracy, &summary.std_accuracy);
    moments(macros, &summary.mean_macro_precision, &summary.std_macro_precision);
    report.summaries.push_back(std::move(summary));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Activation traces
// ---------------------------------------------------------------------------

std::vector<float> trace_from_state(const Tensor<float>& h) {
  if (h.rows < 1 || h.cols < 1) throw EmptyInput("trace_from_state: empty h");
  std::vector<float> a(h.rows);
  for (int i = 0; i < h.rows; ++i) {
    double s = 0.0;
    const float* row = h.row(i);
    for (int j = 0; j < h.cols; ++j) s += row[j];
    a[i] = static_cast<float>(std::abs(s) / h.cols);
  }
  return a;
}

ActivationTrace activation_trace(const FeatureMatrix& features, const Params& params,
                                 const ModelConfig& cfg) {
  ActivationTrace trace;
  trace.a = trace_from_state(encode(features, params, cfg).h);
  trace.mel = features;
  return trace;
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> class_names(int n_classes) {
  if (n_classes == 2) return {"normal", "hypernasal"};
  std::vector<std::string> names;
  for (int c = 0; c < n_classes; ++c) names.push_back("rating" + std::to_string(c));
  return names;
}

void write_confusion(const fs::path& path, const ConfusionMatrix& cm) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const auto names = class_names(cm.n_classes);
  for (int c = 0; c < cm.n_classes; ++c) out << (c ? "," : "") << names[c];
  out << "\n";
  for (int t = 0; t < cm.n_classes; ++t) {
    for (int p = 0; p < cm.n_classes; ++p) out << (p ? "," : "") << cm.at(t, p);
    out << "\n";
  }
  if (!out.flush()) throw IoError("short write to " + path.string());
}

void write_confusion_rownorm(const fs::path& path, const ConfusionMatrix& cm) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const auto names = class_names(cm.n_classes);
  for (int c = 0; c < cm.n_classes; ++c) out << (c ? "," : "") << names[c];
  out << "\n";
  char buf[32];
  for (int t = 0; t < cm.n_classes; ++t) {
    int64_t row = 0;
    for (int p = 0; p < cm.n_classes; ++p) row += cm.at(t, p);
    for (int p = 0; p < cm.n_classes; ++p) {
      const double v = row > 0 ? static_cast<double>(cm.at(t, p)) /
                                     static_cast<double>(row)
                               : 0.0;
      std::snprintf(buf, sizeof buf, "%.6f", v);
      out << (p ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out.flush()) throw IoError("short write to " + path.string());
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void emit_report(const CvReport& report,
                 const std::vector<std::pair<std::string, ActivationTrace>>& traces,
                 const std::string& out_dir) {
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "metrics.tsv");
    if (!out) throw IoError("cannot write metrics.tsv under " + out_dir);
    out << "fold\ttask\taccuracy\tmacro_precision\tn_speakers\n";
    for (const auto& summary : report.summaries) {
      int total_speakers = 0;
      for (const auto& fr : report.folds) {
        if (fr.task != summary.task) continue;
        out << fr.fold << "\t" << fr.task << "\t" << g17(fr.metrics.accuracy)
            << "\t" << g17(fr.metrics.macro_precision) << "\t" << fr.n_speakers
            << "\n";
        total_speakers += fr.n_speakers;
      }
      out << "mean±std\t" << summary.task << "\t" << g17(summary.mean_accuracy)
          << "±" << g17(summary.std_accuracy) << "\t"
          << g17(summary.mean_macro_precision) << "±"
          << g17(summary.std_macro_precision) << "\t" << total_speakers << "\n";
    }
    if (!out.flush()) throw IoError("short write to metrics.tsv");
  }

  for (const auto& summary : report.summaries) {
    const std::string tag = summary.task == "HD" ? "hd" : "ha";
    write_confusion(fs::path(out_dir) / ("confusion_" + tag + ".csv"),
                    summary.confusion);
    write_confusion_rownorm(
        fs::path(out_dir) / ("confusion_" + tag + "_rownorm.csv"),
        summary.confusion);
    if (summary.task == "HA")
      write_confusion(fs::path(out_dir) / "confusion.csv", summary.confusion);
  }

  for (const auto& [id, trace] : traces) write_trace_csvs(out_dir, id, trace);
}

void write_trace_csvs(const std::string& out_dir, const std::string& id,
                      const ActivationTrace& trace) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / ("activation_" + id + ".csv"));
    if (!out) throw IoError("cannot write activation CSV for " + id);
    out << "frame,activation\n";
    char buf[32];
    for (size_t i = 0; i < trace.a.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(trace.a[i]));
      out << i << "," << buf << "\n";
    }
    if (!out.flush()) throw IoError("short write for " + id);
  }
  {
    std::ofstream out(fs::path(out_dir) / ("melspec_" + id + ".csv"));
    if (!out) throw IoError("cannot write melspec CSV for " + id);
    out << "frame";
    for (int c = 0; c < trace.mel.channels; ++c) out << ",c" << c;
    out << "\n";
    char buf[32];
    for (int t = 0; t < trace.mel.frames; ++t) {
      out << t;
      for (int c = 0; c < trace.mel.channels; ++c) {
        std::snprintf(buf, sizeof buf, "%.9g",
                      static_cast<double>(trace.mel.at(t, c)));
        out << "," << buf;
      }
      out << "\n";
    }
    if (!out.flush()) throw IoError("short write for " + id);
  }
}

ParsedMetrics parse_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  ParsedMetrics out;
  std::string line;
  if (!std::getline(in, line) ||
      line != "fold\ttask\taccuracy\tmacro_precision\tn_speakers")
    throw IoError(path + ": bad metrics header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string fold_s, task, acc_s, macro_s, n_s;
    if (!std::getline(ss, fold_s, '\t') || !std::getline(ss, task, '\t') ||
        !std::getline(ss, acc_s, '\t') || !std::getline(ss, macro_s, '\t') ||
        !std::getline(ss, n_s, '\t'))
      throw IoError(path + ": bad metrics row");
    if (fold_s == "mean±std") {
      TaskSummary s;
      s.task = task;
      const auto split = [&](const std::string& v, double* mean, double* sd) {
        const auto pos = v.find("±");
        if (pos == std::string::npos) throw IoError(path + ": bad summary cell");
        *mean = std::stod(v.substr(0, pos));
        *sd = std::stod(v.substr(pos + std::string("±").size()));
      };
      split(acc_s, &s.mean_accuracy, &s.std_accuracy);
      split(macro_s, &s.mean_macro_precision, &s.std_macro_precision);
      out.summaries.push_back(std::move(s));
    } else {
      FoldResult fr;
      fr.fold = std::stoi(fold_s);
      fr.task = task;
      fr.metrics.accuracy = std::stod(acc_s);
      fr.metrics.macro_precision = std::stod(macro_s);
      fr.n_speakers = std::stoi(n_s);
      out.folds.push_back(std::move(fr));
    }
  }
  return out;
}

}  // namespace velo
