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

#include "velo/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

namespace velo {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  size_t idx = 0;
  int out;
  try {
    out = std::stoi(v, &idx);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: " + v);
  }
  if (idx != v.size()) throw ConfigError(key + ": not an integer: " + v);
  return out;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  size_t idx = 0;
  uint64_t out;
  try {
    out = std::stoull(v, &idx);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an unsigned integer: " + v);
  }
  if (idx != v.size()) throw ConfigError(key + ": not an unsigned integer: " + v);
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  size_t idx = 0;
  double out;
  try {
    out = std::stod(v, &idx);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: " + v);
  }
  if (idx != v.size()) throw ConfigError(key + ": not a number: " + v);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": not a boolean: " + v);
}

// Shortest %g string that parses back to the same value; ties favor the
// lower precision, so 10.0 prints as "10" rather than "1e+01".
std::string fmt_double(double v) {
  char buf[64];
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) != v) continue;
    if (best.empty() || std::strlen(buf) < best.size()) best = buf;
  }
  return best;
}

std::string fmt_float(float v) {
  char buf[64];
  std::string best;
  for (int prec = 1; prec <= 9; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, static_cast<double>(v));
    if (std::strtof(buf, nullptr) != v) continue;
    if (best.empty() || std::strlen(buf) < best.size()) best = buf;
  }
  return best;
}

std::string fmt_list4(const double* v) {
  std::string out;
  for (int i = 0; i < 4; ++i) {
    if (i) out += ",";
    out += fmt_double(v[i]);
  }
  return out;
}

void parse_list4(const std::string& key, const std::string& v, double* out) {
  std::istringstream ss(v);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= 4) throw ConfigError(key + ": expected 4 comma-separated values");
    out[i++] = parse_double(key, trim(item));
  }
  if (i != 4) throw ConfigError(key + ": expected 4 comma-separated values");
}

std::string fmt_words(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ",";
    out += words[i];
  }
  return out;
}

struct Entry {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::vector<Entry> registry() {
  std::vector<Entry> e;
  auto add = [&e](std::string name, std::function<std::string(const RunConfig&)> g,
                  std::function<void(RunConfig&, const std::string&)> s) {
    e.push_back(Entry{std::move(name), std::move(g), std::move(s)});
  };

#define KEY_INT(NAME, FIELD)                                            \
  add(NAME, [](const RunConfig& c) { return std::to_string(c.FIELD); }, \
      [](RunConfig& c, const std::string& v) { c.FIELD = parse_int(NAME, v); })
#define KEY_DBL(NAME, FIELD)                                       \
  add(NAME, [](const RunConfig& c) { return fmt_double(c.FIELD); }, \
      [](RunConfig& c, const std::string& v) { c.FIELD = parse_double(NAME, v); })
#define KEY_FLT(NAME, FIELD)                                       \
  add(NAME,                                                        \
      [](const RunConfig& c) { return fmt_float(c.FIELD); },      \
      [](RunConfig& c, const std::string& v) {                     \
        c.FIELD = static_cast<float>(parse_double(NAME, v));       \
      })
#define KEY_BOOL(NAME, FIELD)                                            \
  add(NAME, [](const RunConfig& c) { return c.FIELD ? "true" : "false"; }, \
      [](RunConfig& c, const std::string& v) { c.FIELD = parse_bool(NAME, v); })
#define KEY_STR(NAME, FIELD)                             \
  add(NAME, [](const RunConfig& c) { return c.FIELD; }, \
      [](RunConfig& c, const std::string& v) { c.FIELD = v; })

  KEY_INT("corpus.n_speakers", corpus.n_speakers);
  KEY_INT("corpus.utterances_per_speaker", corpus.utterances_per_speaker);
  KEY_DBL("corpus.noise_level", corpus.noise_level);
  add("corpus.seed",
      [](const RunConfig& c) { return std::to_string(c.corpus.seed); },
      [](RunConfig& c, const std::string& v) {
        c.corpus.seed = parse_u64("corpus.seed", v);
      });
  add("corpus.rating_distribution",
      [](const RunConfig& c) { return fmt_list4(c.corpus.rating_distribution); },
      [](RunConfig& c, const std::string& v) {
        parse_list4("corpus.rating_distribution", v, c.corpus.rating_distribution);
      });
  add("corpus.nasal_coupling",
      [](const RunConfig& c) { return fmt_list4(c.corpus.nasal_coupling); },
      [](RunConfig& c, const std::string& v) {
        parse_list4("corpus.nasal_coupling", v, c.corpus.nasal_coupling);
      });
  add("corpus.words",
      [](const RunConfig& c) { return fmt_words(c.corpus.word_inventory); },
      [](RunConfig& c, const std::string& v) {
        c.corpus.word_inventory.clear();
        std::istringstream ss(v);
        std::string w;
        while (std::getline(ss, w, ','))
          if (!trim(w).empty()) c.corpus.word_inventory.push_back(trim(w));
      });

  KEY_INT("frontend.sample_rate", frontend.sample_rate);
  KEY_INT("frontend.win_samples", frontend.win_samples);
  KEY_INT("frontend.hop_samples", frontend.hop_samples);
  KEY_INT("frontend.fft_size", frontend.fft_size);
  KEY_INT("frontend.n_mels", frontend.n_mels);
  KEY_DBL("frontend.fmin", frontend.fmin);
  KEY_DBL("frontend.fmax", frontend.fmax);
  KEY_DBL("frontend.log_floor", frontend.log_floor);

  KEY_INT("augment.freq_width", augment.F);
  KEY_INT("augment.freq_masks", augment.mF);
  KEY_INT("augment.time_width", augment.T);
  KEY_INT("augment.time_masks", augment.mT);

  KEY_INT("model.conv_layers", model.conv_layers);
  KEY_INT("model.conv_stride", model.conv_stride);
  KEY_INT("model.conv_kernel", model.conv_kernel);
  KEY_INT("model.conv_channels", model.conv_channels);
  KEY_INT("model.enc_layers", model.enc_layers);
  KEY_INT("model.dec_layers", model.dec_layers);
  KEY_INT("model.hidden", model.hidden);
  KEY_INT("model.ffn", model.ffn);
  KEY_INT("model.heads", model.heads);
  KEY_FLT("model.dropout", model.dropout);
  KEY_INT("model.input_dim", model.input_dim);
  KEY_INT("model.n_classes", model.n_classes);
  KEY_INT("model.max_positions", model.max_positions);
  KEY_STR("model.pooling", model.pooling);

  KEY_INT("train.asr.batch_size", train_asr.batch_size);
  KEY_DBL("train.asr.learning_rate", train_asr.learning_rate);
  KEY_INT("train.asr.epochs", train_asr.epochs);
  KEY_DBL("train.asr.beta1", train_asr.beta1);
  KEY_DBL("train.asr.beta2", train_asr.beta2);
  KEY_DBL("train.asr.eps", train_asr.eps);
  KEY_DBL("train.asr.grad_clip", train_asr.grad_clip);
  KEY_DBL("train.asr.warmup_fraction", train_asr.warmup_fraction);
  KEY_BOOL("train.asr.augment", train_asr.augment);
  KEY_DBL("train.asr.stop_cer", train_asr.stop_cer);

  KEY_INT("train.cls.batch_size", train_cls.batch_size);
  KEY_DBL("train.cls.learning_rate", train_cls.learning_rate);
  KEY_INT("train.cls.epochs", train_cls.epochs);
  KEY_DBL("train.cls.beta1", train_cls.beta1);
  KEY_DBL("train.cls.beta2", train_cls.beta2);
  KEY_DBL("train.cls.eps", train_cls.eps);
  KEY_DBL("train.cls.grad_clip", train_cls.grad_clip);

  KEY_INT("eval.folds", eval_folds);
  KEY_STR("eval.aggregate", eval_aggregate);
  KEY_BOOL("eval.stratify", eval_stratify);

  add("seed", [](const RunConfig& c) { return std::to_string(c.seed); },
      [](RunConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); });

#undef KEY_INT
#undef KEY_DBL
#undef KEY_FLT
#undef KEY_BOOL
#undef KEY_STR

  std::sort(e.begin(), e.end(),
            [](const Entry& a, const Entry& b) { return a.name < b.name; });
  return e;
}

// Short mask-parameter spellings accepted on input; dumps use the long names.
struct Alias {
  const char* from;
  const char* to;
};
constexpr Alias kAliases[] = {{"augment.F", "augment.freq_width"},
                              {"augment.mF", "augment.freq_masks"},
                              {"augment.T", "augment.time_width"},
                              {"augment.mT", "augment.time_masks"}};

const Entry& find_entry(const std::string& key) {
  static const std::vector<Entry> entries = registry();
  std::string name = key;
  for (const Alias& a : kAliases)
    if (name == a.from) name = a.to;
  auto it = std::lower_bound(
      entries.begin(), entries.end(), name,
      [](const Entry& a, const std::string& k) { return a.name < k; });
  if (it == entries.end() || it->name != name)
    throw ConfigError("unknown config key: " + key);
  return *it;
}

}  // namespace

RunConfig::RunConfig() { corpus.word_inventory = SynthSpec::default_inventory(); }

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.push_back(e.name);
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  find_entry(key).set(*this, value);
}

std::string RunConfig::get(const std::string& key) const {
  return find_entry(key).get(*this);
}

void RunConfig::apply_overrides(const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) {
    const auto pos = kv.find('=');
    if (pos == std::string::npos)
      throw ConfigError("override must be key=value: " + kv);
    set(trim(kv.substr(0, pos)), trim(kv.substr(pos + 1)));
  }
}

void RunConfig::apply_tiny() {
  model.apply_tiny();
  train_asr.batch_size = 8;
  train_asr.epochs = 12;
  train_cls.batch_size = 8;
}

void RunConfig::validate() const {
  corpus.validate();
  model.validate();
  train_asr.validate();
  train_cls.validate();
  augment.validate(frontend.n_mels);
  if (frontend.sample_rate < 1 || frontend.win_samples < 1 ||
      frontend.hop_samples < 1 || frontend.fft_size < frontend.win_samples ||
      frontend.n_mels < 1)
    throw ConfigError("bad frontend dimensions");
  if (eval_folds < 2) throw ConfigError("eval.folds must be at least 2");
  if (eval_aggregate != "mean" && eval_aggregate != "vote")
    throw ConfigError("eval.aggregate must be mean or vote");
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& key : keys()) {
    out += key;
    out += " = ";
    out += get(key);
    out += "\n";
  }
  return out;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto pos = t.find('=');
    if (pos == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    cfg.set(trim(t.substr(0, pos)), trim(t.substr(pos + 1)));
  }
  return cfg;
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << cfg.serialize();
  if (!out.flush()) throw IoError("short write to " + path);
}

}  // namespace velo
