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

#include "velo/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "velo/config.hpp"
#include "velo/eval.hpp"

namespace velo {

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
  std::string out;
  bool tiny = false;
  bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonOpts* o) {
  cmd->add_option("--config", o->config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", o->sets, "override a config key (key=value), repeatable");
  cmd->add_option("--seed", o->seed, "root seed; labeled sub-seeds derive from it");
  cmd->add_option("--out", o->out, "output directory (default: timestamped)");
  cmd->add_flag("--tiny", o->tiny, "desk-scale profile (small model, batch 8)");
  cmd->add_flag("--deterministic", o->deterministic,
                "single-threaded bitwise-reproducible mode (always on here)");
}

// Precedence: file, then --tiny overlay, then --set, then --seed.
RunConfig resolve(const CommonOpts& o) {
  RunConfig cfg =
      o.config_path.empty() ? RunConfig() : load_run_config(o.config_path);
  if (o.tiny) cfg.apply_tiny();
  cfg.apply_overrides(o.sets);
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

std::string run_dir(const CommonOpts& o, const std::string& cmd) {
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    return o.out;
  }
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  localtime_r(&tt, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  const std::string dir = "velo-" + cmd + "-" + stamp;
  fs::create_directories(dir);
  return dir;
}

FeatureMatrix load_features(const fs::path& manifest_dir, const ManifestRecord& rec,
                            const FrontendConfig& fcfg, bool normalized) {
  int rate = 0;
  auto samples = read_wav((manifest_dir / rec.audio_path).string(), &rate);
  if (rate != fcfg.sample_rate) samples = resample(samples, rate, fcfg.sample_rate);
  FeatureMatrix f = logmel(samples, fcfg);
  return normalized ? normalize(f) : f;
}

int cmd_synth(const CommonOpts& o, const std::string& spec_path) {
  const RunConfig cfg = resolve(o);
  SynthSpec spec = spec_path.empty() ? cfg.corpus : load_synth_spec(spec_path);
  if (o.seed) spec.seed = *o.seed;
  spec.validate();

  const std::string dir = run_dir(o, "synth");
  save_run_config((fs::path(dir) / "config.resolved").string(), cfg);
  save_synth_spec((fs::path(dir) / "synth_spec.json").string(), spec);
  const CorpusPaths paths = generate_corpus(spec, dir);
  std::printf("asr_manifest\t%s\n", paths.asr_manifest.c_str());
  std::printf("clp_manifest\t%s\n", paths.clp_manifest.c_str());
  return 0;
}

int cmd_featurize(const CommonOpts& o, const std::string& manifest) {
  const RunConfig cfg = resolve(o);
  const auto records = load_manifest(manifest);
  const std::string dir = run_dir(o, "featurize");
  save_run_config((fs::path(dir) / "config.resolved").string(), cfg);
  const fs::path mdir = fs::path(manifest).parent_path();
  for (const auto& rec : records) {
    const FeatureMatrix f = load_features(mdir, rec, cfg.frontend, false);
    write_feature_cache((fs::path(dir) / (rec.id + ".lmf")).string(), f);
  }
  std::printf("featurized\t%zu\t%s\n", records.size(), dir.c_str());
  return 0;
}

int cmd_pretrain(const CommonOpts& o, const std::string& manifest,
                 const std::string& dev_manifest) {
  const RunConfig cfg = resolve(o);
  const std::string dir = run_dir(o, "pretrain");
  save_run_config((fs::path(dir) / "config.resolved").string(), cfg);

  TrainConfig tcfg = cfg.train_asr;
  tcfg.stage = "asr";
  tcfg.seed = cfg.seed;
  const std::string dev = dev_manifest.empty() ? manifest : dev_manifest;
  const PretrainResult res =
      pretrain_asr(manifest, dev, cfg.model, tcfg, cfg.frontend, cfg.augment, dir);
  std::printf("checkpoint\t%s\n", res.checkpoint_path.c_str());
  std::printf("best_dev_cer\t%.6f\n", res.best_cer);
  return 0;
}

int cmd_finetune(const CommonOpts& o, const std::string& manifest,
                 const std::string& init, const std::string& checkpoint,
                 const std::string& task) {
  const RunConfig cfg = resolve(o);
  const std::string dir = run_dir(o, "finetune");
  save_run_config((fs::path(dir) / "config.resolved").string(), cfg);

  ModelConfig mcfg = cfg.model;
  mcfg.n_classes = task == "hd" ? 2 : 4;
  TrainConfig tcfg = cfg.train_cls;
  tcfg.stage = "cls";
  tcfg.seed = derive_seed(cfg.seed, "finetune");

  Params params;
  if (init == "transferred") {
    if (checkpoint.empty())
      throw ConfigError("--init transferred requires --checkpoint");
    const Checkpoint ck = load_checkpoint(checkpoint);
    params = transfer_encoder(ck, mcfg, derive_seed(cfg.seed, "cls_init"));
  } else {
    params = init_parameters<float>(mcfg, Stage::kCls,
                                    derive_seed(cfg.seed, "cls_init"));
  }

  const FinetuneResult res =
      finetune_cls(manifest, params, mcfg, tcfg, cfg.frontend, dir);
  std::printf("checkpoint\t%s\n", res.checkpoint_path.c_str());
  return 0;
}

int cmd_evaluate(const CommonOpts& o, const std::string& manifest,
                 const std::string& init, const std::string& checkpoint) {
  const RunConfig cfg = resolve(o);
  const std::string dir = run_dir(o, "evaluate");
  save_run_config((fs::path(dir) / "config.resolved").string(), cfg);

  std::optional<Checkpoint> ck;
  if (init == "transferred") {
    if (checkpoint.empty())
      throw ConfigError("--init transferred requires --checkpoint");
    ck = load_checkpoint(checkpoint);
  }
  TrainConfig tcfg = cfg.train_cls;
  tcfg.stage = "cls";
  const Aggregate agg =
      cfg.eval_aggregate == "vote" ? Aggregate::kVote : Aggregate::kMeanProb;
  const CvReport report =
      cross_validate(manifest, ck ? &*ck : nullptr, cfg.model, tcfg, cfg.frontend,
                     cfg.seed, cfg.eval_folds, agg, cfg.eval_stratify);
  emit_report(report, {}, dir);
  for (const auto& s : report.summaries)
    std::printf("%s\taccuracy %.4f ± %.4f\tmacro_precision %.4f ± %.4f\n",
                s.task.c_str(), s.mean_accuracy, s.std_accuracy,
                s.mean_macro_precision, s.std_macro_precision);
  std::printf("report\t%s\n", dir.c_str());
  return 0;
}

int cmd_visualize(const CommonOpts& o, const std::string& checkpoint,
                  const std::string& manifest, const std::string& utterance) {
  const RunConfig cfg = resolve(o);
  const std::string dir = run_dir(o, "visualize");
  save_run_config((fs::path(dir) / "config.resolved").string(), cfg);

  const Checkpoint ck = load_checkpoint(checkpoint);
  const auto records = load_manifest(manifest);
  const ManifestRecord* rec = nullptr;
  for (const auto& r : records)
    if (r.id == utterance) rec = &r;
  if (rec == nullptr) throw Error("utterance not found in manifest: " + utterance);

  const fs::path mdir = fs::path(manifest).parent_path();
  const FeatureMatrix norm = load_features(mdir, *rec, cfg.frontend, true);
  ActivationTrace trace = activation_trace(norm, ck.params, ck.config);
  // Pair the trace with the raw (unnormalized) spectrogram for rendering.
  trace.mel = load_features(mdir, *rec, cfg.frontend, false);
  write_trace_csvs(dir, utterance, trace);
  std::printf("trace\t%s\n",
              (fs::path(dir) / ("activation_" + utterance + ".csv")).c_str());
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"ASR-pretraining-based hypernasality estimation pipeline"};
  app.require_subcommand(1);

  CommonOpts synth_o, feat_o, pre_o, fine_o, eval_o, vis_o;
  std::string spec_path, feat_manifest, pre_manifest, pre_dev, fine_manifest,
      fine_init = "random", fine_ckpt, fine_task = "ha", eval_manifest,
      eval_init = "random", eval_ckpt, vis_ckpt, vis_manifest, vis_utt;

  CLI::App* synth = app.add_subcommand("synth", "generate the synthetic corpora");
  synth->add_option("--spec", spec_path, "SynthSpec JSON file")
      ->check(CLI::ExistingFile);
  add_common(synth, &synth_o);

  CLI::App* feat = app.add_subcommand("featurize", "write log-mel feature caches");
  feat->add_option("--manifest", feat_manifest, "TSV manifest")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(feat, &feat_o);

  CLI::App* pre = app.add_subcommand("pretrain-asr", "speech-to-text pretraining");
  pre->add_option("--manifest", pre_manifest, "training manifest with transcripts")
      ->required()
      ->check(CLI::ExistingFile);
  pre->add_option("--dev-manifest", pre_dev,
                  "dev manifest for CER monitoring (default: the training manifest)")
      ->check(CLI::ExistingFile);
  add_common(pre, &pre_o);

  CLI::App* fine = app.add_subcommand("finetune", "classifier fine-tuning");
  fine->add_option("--manifest", fine_manifest, "rated manifest")
      ->required()
      ->check(CLI::ExistingFile);
  fine->add_option("--init", fine_init, "encoder initialization")
      ->check(CLI::IsMember({"transferred", "random"}));
  fine->add_option("--checkpoint", fine_ckpt, "ASR checkpoint for --init transferred")
      ->check(CLI::ExistingFile);
  fine->add_option("--task", fine_task, "hd (2-way) or ha (4-way)")
      ->check(CLI::IsMember({"hd", "ha"}));
  add_common(fine, &fine_o);

  CLI::App* evalc = app.add_subcommand("evaluate", "speaker-level cross-validation");
  evalc->add_option("--manifest", eval_manifest, "rated manifest")
      ->required()
      ->check(CLI::ExistingFile);
  evalc->add_option("--init", eval_init, "encoder initialization")
      ->check(CLI::IsMember({"transferred", "random"}));
  evalc->add_option("--checkpoint", eval_ckpt, "ASR checkpoint for --init transferred")
      ->check(CLI::ExistingFile);
  add_common(evalc, &eval_o);

  CLI::App* vis = app.add_subcommand("visualize", "frame-activation trace data");
  vis->add_option("--checkpoint", vis_ckpt, "model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  vis->add_option("--manifest", vis_manifest, "manifest holding the utterance")
      ->required()
      ->check(CLI::ExistingFile);
  vis->add_option("--utterance", vis_utt, "utterance id to trace")->required();
  add_common(vis, &vis_o);

  std::vector<const char*> argv;
  argv.push_back("velo");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the offending flag and usage
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_o, spec_path);
    if (feat->parsed()) return cmd_featurize(feat_o, feat_manifest);
    if (pre->parsed()) return cmd_pretrain(pre_o, pre_manifest, pre_dev);
    if (fine->parsed())
      return cmd_finetune(fine_o, fine_manifest, fine_init, fine_ckpt, fine_task);
    if (evalc->parsed()) return cmd_evaluate(eval_o, eval_manifest, eval_init, eval_ckpt);
    if (vis->parsed()) return cmd_visualize(vis_o, vis_ckpt, vis_manifest, vis_utt);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace velo
