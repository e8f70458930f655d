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

// Acceptance gate. Runs ten end-to-end criteria with pinned tolerances and
// time budgets, printing exactly one PASS/FAIL line per criterion. Exits
// nonzero when any criterion fails.
//
// Expensive fixtures (the 40-speaker corpus and the tiny ASR pretrain) are
// cached under the work directory and reused between runs; every fixture is
// fully determined by seeds pinned in this file, so a cached copy is
// interchangeable with a fresh one. Delete the directory to rebuild.
//
// Usage: velo_acceptance [N...]   run only the listed criteria (1-10).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "velo/cli.hpp"
#include "velo/config.hpp"
#include "velo/eval.hpp"

namespace fs = std::filesystem;
using namespace velo;

namespace {

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

struct Fail {
  std::string why;
};

[[noreturn]] void fail(const std::string& why) { throw Fail{why}; }

void require(bool ok, const std::string& why) {
  if (!ok) fail(why);
}

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail("missing file: " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Shared fixtures, built lazily and cached on disk.
struct Fixture {
  fs::path root = fs::temp_directory_path() / "velo_acceptance";
  std::string asr_manifest;   // 200 utterances, 40 speakers
  std::string dev_manifest;   // a 40-utterance slice for CER monitoring
  std::string clp_manifest;   // 200 rated utterances, 40 speakers
  std::string asr_ckpt;

  ModelConfig tiny_model() const {
    RunConfig rc;
    rc.apply_tiny();
    return rc.model;
  }

  FrontendConfig frontend() const { return FrontendConfig(); }

  void ensure_corpus() {
    const fs::path dir = root / "corpus";
    asr_manifest = (dir / "asr_manifest.tsv").string();
    dev_manifest = (dir / "dev_manifest.tsv").string();
    clp_manifest = (dir / "clp_manifest.tsv").string();
    if (fs::exists(dir / "done")) return;

    fs::remove_all(dir);
    SynthSpec spec;  // 40 speakers x 5 utterances per sub-corpus
    spec.word_inventory = SynthSpec::default_inventory();
    spec.seed = 801;
    generate_corpus(spec, dir.string());
    auto records = load_manifest(asr_manifest);
    records.resize(40);
    save_manifest(dev_manifest, records);
    std::ofstream(dir / "done") << "ok\n";
  }

  void ensure_pretrain() {
    ensure_corpus();
    const fs::path dir = root / "pretrain";
    asr_ckpt = (dir / "asr.ckpt").string();
    if (fs::exists(dir / "done")) return;

    fs::remove_all(dir);
    fs::create_directories(dir);
    RunConfig rc;
    rc.apply_tiny();
    TrainConfig tcfg = rc.train_asr;
    tcfg.stage = "asr";
    tcfg.seed = 802;
    tcfg.epochs = 30;
    tcfg.stop_cer = 0.02;
    pretrain_asr(asr_manifest, dev_manifest, rc.model, tcfg, rc.frontend,
                 rc.augment, dir.string());
    std::ofstream(dir / "done") << "ok\n";
  }
};

// ---------------------------------------------------------------------------
// 1. Frontend oracle equivalence
// ---------------------------------------------------------------------------

void c1_frontend_oracle(Fixture&) {
  const auto t0 = std::chrono::steady_clock::now();
  const FrontendConfig cfg;
  Rng rng(derive_seed(71, "acceptance_frontend"));

  for (int trial = 0; trial < 20; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(400, 32000));
    const double f1 = rng.uniform_real(80.0, 7000.0);
    const double f2 = rng.uniform_real(80.0, 7000.0);
    std::vector<float> x(n);
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / cfg.sample_rate;
      x[i] = static_cast<float>(0.3 * rng.normal() +
                                0.4 * std::sin(2.0 * M_PI * f1 * t) +
                                0.2 * std::sin(2.0 * M_PI * f2 * t));
    }

    const FeatureMatrix got = logmel(x, cfg);
    const auto want = oracle::logmel_reference(x, cfg);
    require(got.frames == static_cast<int>(want.size()),
            "frame count mismatch at trial " + std::to_string(trial));
    for (int t = 0; t < got.frames; ++t)
      for (int c = 0; c < got.channels; ++c) {
        const double w = want[t][c];
        const double err = std::abs(got.at(t, c) - w) / std::max(1.0, std::abs(w));
        if (err > 1e-5)
          fail("entry (" + std::to_string(t) + "," + std::to_string(c) +
               ") rel err " + std::to_string(err) + " at trial " +
               std::to_string(trial));
      }
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(secs < 60.0, "exceeded 60 s budget: " + fmt1(secs) + " s");
}

// ---------------------------------------------------------------------------
// 2. Shape laws
// ---------------------------------------------------------------------------

void c2_shape_laws(Fixture&) {
  const FrontendConfig fcfg;
  Rng rng(derive_seed(71, "acceptance_shapes"));
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t n = rng.uniform_int(fcfg.win_samples, 200000);
    const int want = 1 + static_cast<int>((n - fcfg.win_samples) / fcfg.hop_samples);
    require(frame_count(n, fcfg) == want,
            "frame_count law broken at n=" + std::to_string(n));
  }

  const ModelConfig mcfg;
  for (int t = 1; t <= 2000; ++t) {
    const int once = (t + 1) / 2;   // ceil(t/2)
    const int want = (once + 1) / 2;
    require(subsampled_length(t, mcfg) == want,
            "subsampled_length law broken at T=" + std::to_string(t));
  }
}

// ---------------------------------------------------------------------------
// 3. Gradient check (tiny double model, ASR and classifier losses)
// ---------------------------------------------------------------------------

ModelConfig gradcheck_config() {
  ModelConfig cfg;
  cfg.conv_channels = 8;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.hidden = 8;
  cfg.ffn = 16;
  cfg.heads = 2;
  cfg.dropout = 0.0f;
  cfg.input_dim = 10;
  cfg.vocab_size = 6;
  cfg.n_classes = 3;
  cfg.max_positions = 64;
  return cfg;
}

// Central finite differences of `loss` against the gradients reported by one
// analytic backward pass, every entry of every tensor.
void gradcheck_stage(const ModelConfig& cfg, ParamSet<double> params,
                     const std::function<double(Forward<double>&, bool)>& loss,
                     const std::string& tag) {
  Forward<double> fwd(cfg, params, /*train=*/false, 0);
  (void)loss(fwd, /*backward=*/true);

  const double h = 1e-5;
  for (int i = 0; i < params.count(); ++i) {
    const std::string& name = params.names[i];
    const Tensor<double>* analytic = fwd.param_grad(name);
    require(analytic != nullptr, tag + ": " + name + " unused in graph");
    double worst = 0.0;
    for (size_t j = 0; j < params.values[i].data.size(); ++j) {
      const double keep = params.values[i].data[j];
      params.values[i].data[j] = keep + h;
      Forward<double> up(cfg, params, false, 0);
      const double lp = loss(up, false);
      params.values[i].data[j] = keep - h;
      Forward<double> dn(cfg, params, false, 0);
      const double lm = loss(dn, false);
      params.values[i].data[j] = keep;
      const double fd = (lp - lm) / (2.0 * h);
      const double err =
          std::abs(analytic->data[j] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, err);
    }
    if (worst > 1e-4)
      fail(tag + ": " + name + " rel err " + std::to_string(worst));
  }
}

void c3_gradient_check(Fixture&) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelConfig cfg = gradcheck_config();

  Tensor<double> feats(9, cfg.input_dim);
  Rng rng(derive_seed(71, "acceptance_grad"));
  for (auto& v : feats.data) v = rng.normal(0.0, 0.5);

  // Teacher-forced sequence loss, summed over the real tokens.
  const std::vector<int> seq = {Vocabulary::kBos, 4, 5, 4, Vocabulary::kEos};
  const std::vector<int> input(seq.begin(), seq.end() - 1);
  const std::vector<int> targets(seq.begin() + 1, seq.end());
  auto asr_obj = [&](Forward<double>& f, bool backward) {
    const auto enc = f.encode(feats, feats.rows);
    const int logits = f.decode(input, static_cast<int>(input.size()), enc);
    const int loss = f.graph().softmax_xent(
        logits, targets, std::vector<double>(targets.size(), 1.0));
    if (backward) f.graph().backward(loss);
    return f.graph().value(loss).data[0];
  };
  gradcheck_stage(cfg, init_parameters<double>(cfg, Stage::kAsr, 31), asr_obj,
                  "asr");

  // Pooled classifier cross-entropy.
  auto cls_obj = [&](Forward<double>& f, bool backward) {
    const auto enc = f.encode(feats, feats.rows);
    const int loss =
        f.graph().softmax_xent(f.classify_logits(enc), {1}, {1.0});
    if (backward) f.graph().backward(loss);
    return f.graph().value(loss).data[0];
  };
  gradcheck_stage(cfg, init_parameters<double>(cfg, Stage::kCls, 32), cls_obj,
                  "cls");

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(secs < 600.0, "exceeded 10 min budget: " + fmt1(secs) + " s");
}

// ---------------------------------------------------------------------------
// 4. Loss closed forms
// ---------------------------------------------------------------------------

void c4_loss_closed_forms(Fixture&) {
  const Tensor<float> logits(4, 7);  // zeros: uniform over a 7-token vocab
  const double got = asr_loss(logits, {4, 5, 6, Vocabulary::kPad});
  require(std::abs(got - std::log(7.0)) <= 1e-6,
          "uniform ASR loss " + std::to_string(got) + " != ln 7");

  for (int n_classes : {2, 4}) {
    const std::vector<float> probs(n_classes, 1.0f / n_classes);
    for (int label = 0; label < n_classes; ++label) {
      const double l = cls_loss(probs, label);
      require(std::abs(l - std::log(static_cast<double>(n_classes))) <= 1e-9,
              "uniform CLS loss != ln " + std::to_string(n_classes));
    }
  }
}

// ---------------------------------------------------------------------------
// 5. Transfer contract
// ---------------------------------------------------------------------------

void c5_transfer_contract(Fixture& fx) {
  ModelConfig cfg;
  cfg.conv_channels = 16;
  cfg.enc_layers = 2;
  cfg.dec_layers = 2;
  cfg.hidden = 16;
  cfg.ffn = 32;
  cfg.heads = 2;
  cfg.input_dim = 20;
  cfg.vocab_size = 9;
  cfg.n_classes = 4;

  const Params asr = init_parameters<float>(cfg, Stage::kAsr, 123);
  Vocabulary vocab({"word one", "word two"});
  cfg.vocab_size = vocab.size();
  const fs::path dir = fx.root / "transfer";
  fs::create_directories(dir);
  const std::string path = (dir / "asr.ckpt").string();
  save_checkpoint(path, asr, cfg, vocab);

  const Checkpoint ck = load_checkpoint(path);
  const uint64_t head_seed = 55;
  const Params got = transfer_encoder(ck, cfg, head_seed);
  const Params fresh = init_parameters<float>(cfg, Stage::kCls, head_seed);

  check_shapes(got, cfg, Stage::kCls);
  for (const auto& name : got.names) {
    require(name.rfind("dec.", 0) != 0, "decoder tensor leaked: " + name);
    const Params& want = name.rfind("enc.", 0) == 0 ? ck.params : fresh;
    const Tensor<float>& a = got.get(name);
    const Tensor<float>& b = want.get(name);
    require(a.data == b.data, "tensor not bitwise equal: " + name);
  }
  for (const auto& name : ck.params.names)
    if (name.rfind("enc.", 0) == 0)
      require(got.has(name), "encoder tensor dropped: " + name);
  require(got.has("cls.w") && got.has("cls.b"), "classifier head missing");
}

// ---------------------------------------------------------------------------
// 6. Overfit sanity
// ---------------------------------------------------------------------------

void c6_overfit_sanity(Fixture& fx) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig rc;
  rc.apply_tiny();

  // One utterance to CER 0. Augmentation stays off: masking the only
  // utterance tests regularization, not memorization capacity.
  {
    const fs::path dir = fx.root / "overfit_asr";
    fs::remove_all(dir);
    SynthSpec spec;
    spec.word_inventory = SynthSpec::default_inventory();
    spec.n_speakers = 1;
    spec.utterances_per_speaker = 1;
    spec.seed = 606;
    const CorpusPaths paths = generate_corpus(spec, dir.string());

    TrainConfig tcfg = rc.train_asr;
    tcfg.stage = "asr";
    tcfg.seed = 9;
    tcfg.batch_size = 1;
    tcfg.epochs = 500;
    tcfg.stop_cer = 0.0;
    tcfg.augment = false;
    const PretrainResult res =
        pretrain_asr(paths.asr_manifest, paths.asr_manifest, rc.model, tcfg,
                     rc.frontend, rc.augment, (dir / "run").string());
    require(res.best_cer == 0.0,
            "single utterance stuck at CER " + fmt4(res.best_cer));
    require(static_cast<int>(res.log.entries.size()) <= 500,
            "needed more than 500 steps");
  }

  // Four speakers, one per severity class, to 100% training accuracy.
  {
    const fs::path dir = fx.root / "overfit_cls";
    fs::remove_all(dir);
    SynthSpec spec;
    spec.word_inventory = SynthSpec::default_inventory();
    spec.n_speakers = 4;
    spec.utterances_per_speaker = 2;
    spec.seed = 607;
    const CorpusPaths paths = generate_corpus(spec, dir.string());

    ModelConfig mcfg = rc.model;
    mcfg.n_classes = 4;
    TrainConfig tcfg = rc.train_cls;
    tcfg.stage = "cls";
    tcfg.seed = 10;
    tcfg.batch_size = 4;
    tcfg.learning_rate = 1e-3;
    tcfg.epochs = 30;
    const Params init = init_parameters<float>(mcfg, Stage::kCls, 77);
    const FinetuneResult res = finetune_cls(paths.clp_manifest, init, mcfg,
                                            tcfg, rc.frontend,
                                            (dir / "run").string());
    const Checkpoint ck = load_checkpoint(res.checkpoint_path);
    const auto examples =
        load_labeled_examples(paths.clp_manifest, rc.frontend, 4);
    const double acc = train_accuracy(examples, ck.params, ck.config);
    require(acc == 1.0, "toy training accuracy " + fmt4(acc) + " != 1");
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(secs < 900.0, "exceeded 15 min budget: " + fmt1(secs) + " s");
}

// ---------------------------------------------------------------------------
// 7. Cross-validation integrity
// ---------------------------------------------------------------------------

void c7_cv_integrity(Fixture& fx) {
  fx.ensure_corpus();
  const auto records = load_manifest(fx.clp_manifest);

  const FoldPlan plan = speaker_folds(records, 5, 4242);
  const auto sizes = plan.fold_sizes();
  require(sizes == std::vector<int>({8, 8, 8, 8, 8}),
          "fold sizes are not {8,8,8,8,8}");
  std::set<std::string> speakers;
  for (const auto& r : records) speakers.insert(r.speaker_id);
  require(speakers.size() == 40, "corpus does not have 40 speakers");
  for (const auto& s : speakers)
    require(plan.assignment.count(s) == 1, "speaker missing from plan: " + s);
  require(plan.assignment.size() == 40, "plan assigns unknown speakers");

  // Speakers per class; each speaker carries one rating.
  std::map<std::string, int> rating;
  for (const auto& r : records) rating[r.speaker_id] = r.rating;
  std::vector<int64_t> per_class(4, 0);
  for (const auto& [spk, rat] : rating) per_class[rat] += 1;

  // A real (1-epoch) cross-validation run supplies the confusion matrices.
  RunConfig rc;
  rc.apply_tiny();
  TrainConfig tcfg = rc.train_cls;
  tcfg.stage = "cls";
  tcfg.epochs = 1;
  const CvReport report = cross_validate(fx.clp_manifest, nullptr, rc.model,
                                         tcfg, rc.frontend, 4242, 5);

  for (const auto& summary : report.summaries) {
    const ConfusionMatrix& cm = summary.confusion;
    for (int t = 0; t < cm.n_classes; ++t) {
      int64_t row = 0;
      for (int p = 0; p < cm.n_classes; ++p) row += cm.at(t, p);
      const int64_t want =
          summary.task == "HA"
              ? per_class[t]
              : (t == 0 ? per_class[0] : per_class[1] + per_class[2] + per_class[3]);
      require(row == want, summary.task + " row " + std::to_string(t) +
                               " sums to " + std::to_string(row) + ", want " +
                               std::to_string(want));
    }
  }

  for (const auto& fr : report.folds) {
    const ConfusionMatrix& cm = fr.metrics.confusion;
    int64_t trace = 0, total = 0;
    for (int t = 0; t < cm.n_classes; ++t)
      for (int p = 0; p < cm.n_classes; ++p) {
        total += cm.at(t, p);
        if (t == p) trace += cm.at(t, p);
      }
    require(total == fr.n_speakers, "fold total != fold speaker count");
    const double want = static_cast<double>(trace) / static_cast<double>(total);
    require(fr.metrics.accuracy == want, "fold accuracy != trace/sum exactly");
  }
}

// ---------------------------------------------------------------------------
// 8. Directional reproduction: transferred init beats random init
// ---------------------------------------------------------------------------

void c8_directional(Fixture& fx) {
  const auto t0 = std::chrono::steady_clock::now();
  fx.ensure_pretrain();
  const Checkpoint ck = load_checkpoint(fx.asr_ckpt);

  RunConfig rc;
  rc.apply_tiny();
  TrainConfig tcfg = rc.train_cls;
  tcfg.stage = "cls";
  tcfg.epochs = 3;

  int hd_wins = 0, ha_wins = 0;
  std::string detail;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const CvReport with = cross_validate(fx.clp_manifest, &ck, rc.model, tcfg,
                                         rc.frontend, seed, 5);
    const CvReport without = cross_validate(fx.clp_manifest, nullptr, rc.model,
                                            tcfg, rc.frontend, seed, 5);
    double hd_t = 0, hd_r = 0, ha_t = 0, ha_r = 0;
    for (const auto& s : with.summaries)
      (s.task == "HD" ? hd_t : ha_t) = s.mean_accuracy;
    for (const auto& s : without.summaries)
      (s.task == "HD" ? hd_r : ha_r) = s.mean_accuracy;
    if (hd_t >= hd_r) ++hd_wins;
    if (ha_t >= ha_r) ++ha_wins;
    detail += " s" + std::to_string(seed) + ":HD " + fmt4(hd_t) + "v" +
              fmt4(hd_r) + " HA " + fmt4(ha_t) + "v" + fmt4(ha_r);
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (hd_wins < 4 || ha_wins < 4)
    fail("HD wins " + std::to_string(hd_wins) + "/5, HA wins " +
         std::to_string(ha_wins) + "/5;" + detail);
  require(secs < 7200.0, "exceeded 2 h budget: " + fmt1(secs) + " s");
}

// ---------------------------------------------------------------------------
// 9. Activation formula
// ---------------------------------------------------------------------------

void c9_activation_formula(Fixture&) {
  Tensor<float> hand(2, 2);
  hand.at(0, 0) = 1.0f;
  hand.at(0, 1) = -1.0f;
  hand.at(1, 0) = 3.0f;
  hand.at(1, 1) = 1.0f;
  const auto got = trace_from_state(hand);
  require(got.size() == 2 && got[0] == 0.0f && got[1] == 2.0f,
          "hand cases (1,-1)->0 and (3,1)->2 failed");

  Rng rng(derive_seed(71, "acceptance_trace"));
  for (const auto [rows, cols] : {std::pair{17, 64}, std::pair{33, 8}}) {
    Tensor<float> h(rows, cols);
    for (auto& v : h.data) v = static_cast<float>(rng.normal());
    const auto a = trace_from_state(h);
    require(static_cast<int>(a.size()) == rows, "trace length != rows");
    for (int t = 0; t < rows; ++t) {
      double sum = 0.0;
      for (int d = 0; d < cols; ++d) sum += h.at(t, d);
      const double want = std::abs(sum) / cols;
      require(std::abs(a[t] - want) <= 1e-6,
              "trace row " + std::to_string(t) + " off by more than 1e-6");
    }
  }
}

// ---------------------------------------------------------------------------
// 10. Determinism of the full pipeline
// ---------------------------------------------------------------------------

void c10_determinism(Fixture& fx) {
  auto run = [&](const std::string& tag) {
    const fs::path r = fx.root / tag;
    fs::remove_all(r);
    const std::vector<std::string> common = {"--deterministic", "--seed", "7",
                                             "--tiny"};
    auto cli = [&](std::vector<std::string> args) {
      args.insert(args.end(), common.begin(), common.end());
      require(run_cli(args) == 0, tag + ": " + args[0] + " failed");
    };

    const std::string corpus = (r / "corpus").string();
    cli({"synth", "--out", corpus,
         "--set", "corpus.n_speakers=4",
         "--set", "corpus.utterances_per_speaker=2"});
    cli({"featurize", "--manifest", corpus + "/asr_manifest.tsv",
         "--out", (r / "feats").string()});
    cli({"pretrain-asr", "--manifest", corpus + "/asr_manifest.tsv",
         "--out", (r / "pre").string(),
         "--set", "train.asr.epochs=2", "--set", "train.asr.batch_size=4"});
    cli({"finetune", "--manifest", corpus + "/clp_manifest.tsv",
         "--init", "transferred", "--checkpoint", (r / "pre" / "asr.ckpt").string(),
         "--out", (r / "fine").string(), "--set", "train.cls.epochs=2"});
    cli({"evaluate", "--manifest", corpus + "/clp_manifest.tsv",
         "--init", "transferred", "--checkpoint", (r / "pre" / "asr.ckpt").string(),
         "--out", (r / "rep").string(),
         "--set", "train.cls.epochs=1", "--set", "eval.folds=2"});
    const auto records = load_manifest(corpus + "/clp_manifest.tsv");
    cli({"visualize", "--checkpoint", (r / "fine" / "cls.ckpt").string(),
         "--manifest", corpus + "/clp_manifest.tsv",
         "--utterance", records.front().id, "--out", (r / "vis").string()});
    return records.front().id;
  };

  const std::string id_a = run("det_a");
  const std::string id_b = run("det_b");
  require(id_a == id_b, "corpora diverged before comparison");

  const auto wavs = load_manifest((fx.root / "det_a" / "corpus" /
                                   "asr_manifest.tsv").string());
  const std::vector<std::string> rel = {
      "corpus/asr_manifest.tsv",
      "corpus/clp_manifest.tsv",
      "corpus/" + wavs.front().audio_path,
      "feats/" + wavs.front().id + ".lmf",
      "pre/asr.ckpt",
      "pre/asr_train_log.tsv",
      "fine/cls.ckpt",
      "fine/cls_train_log.tsv",
      "rep/metrics.tsv",
      "rep/confusion.csv",
      "rep/confusion_hd.csv",
      "vis/activation_" + id_a + ".csv",
      "vis/melspec_" + id_a + ".csv",
  };
  for (const auto& f : rel) {
    const std::string a = read_bytes(fx.root / "det_a" / f);
    const std::string b = read_bytes(fx.root / "det_b" / f);
    require(a == b, "runs differ at " + f);
  }
}

// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  void (*fn)(Fixture&);
};

const Criterion kCriteria[] = {
    {1, "frontend-oracle", c1_frontend_oracle},
    {2, "shape-laws", c2_shape_laws},
    {3, "gradient-check", c3_gradient_check},
    {4, "loss-closed-forms", c4_loss_closed_forms},
    {5, "transfer-contract", c5_transfer_contract},
    {6, "overfit-sanity", c6_overfit_sanity},
    {7, "cross-validation-integrity", c7_cv_integrity},
    {8, "directional-transfer", c8_directional},
    {9, "activation-formula", c9_activation_formula},
    {10, "determinism", c10_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  Fixture fx;
  fs::create_directories(fx.root);

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string why;
    try {
      c.fn(fx);
    } catch (const Fail& f) {
      why = f.why;
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (why.empty()) {
      std::printf("PASS %2d %-26s (%s s)\n", c.id, c.name, fmt1(secs).c_str());
    } else {
      std::printf("FAIL %2d %-26s (%s s): %s\n", c.id, c.name,
                  fmt1(secs).c_str(), why.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }

  if (failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
