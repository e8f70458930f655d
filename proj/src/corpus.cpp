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

#include "velo/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "velo/rng.hpp"

namespace fs = std::filesystem;

namespace velo {

// ---------------------------------------------------------------------------
// WAV I/O
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  os.write(b, 4);
}

void put_u16(std::ostream& os, uint16_t v) {
  char b[2] = {char(v & 0xff), char((v >> 8) & 0xff)};
  os.write(b, 2);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
         uint32_t(b[3]) << 24;
}

uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return uint16_t(b[0]) | uint16_t(b[1]) << 8;
}

}  // namespace

void write_wav(const std::string& path, const std::vector<float>& samples,
               int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(os, 16);
  put_u16(os, 1);  // PCM
  put_u16(os, 1);  // mono
  put_u32(os, static_cast<uint32_t>(sample_rate));
  put_u32(os, static_cast<uint32_t>(sample_rate * 2));
  put_u16(os, 2);
  put_u16(os, 16);
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (float s : samples) {
    float c = std::min(1.0f, std::max(-1.0f, s));
    int v = static_cast<int>(std::lround(c * 32767.0f));
    put_u16(os, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  if (!os) throw IoError("write failed: " + path);
}

std::vector<float> read_wav(const std::string& path, int* sample_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char tag[5] = {0};
  is.read(tag, 4);
  if (std::strncmp(tag, "RIFF", 4) != 0) throw IoError("not a RIFF file: " + path);
  get_u32(is);
  is.read(tag, 4);
  if (std::strncmp(tag, "WAVE", 4) != 0) throw IoError("not a WAVE file: " + path);
  uint16_t channels = 0, bits = 0;
  uint32_t rate = 0;
  std::vector<float> samples;
  bool got_fmt = false, got_data = false;
  while (is.read(tag, 4)) {
    uint32_t chunk = get_u32(is);
    if (std::strncmp(tag, "fmt ", 4) == 0) {
      uint16_t fmt = get_u16(is);
      channels = get_u16(is);
      rate = get_u32(is);
      get_u32(is);
      get_u16(is);
      bits = get_u16(is);
      if (chunk > 16) is.seekg(chunk - 16, std::ios::cur);
      if (fmt != 1 || channels != 1 || bits != 16)
        throw IoError("unsupported WAV encoding (need PCM16 mono): " + path);
      got_fmt = true;
    } else if (std::strncmp(tag, "data", 4) == 0) {
      if (!got_fmt) throw IoError("data chunk before fmt: " + path);
      const size_t n = chunk / 2;
      samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        int16_t v = static_cast<int16_t>(get_u16(is));
        samples[i] = static_cast<float>(v) / 32767.0f;
      }
      got_data = true;
      break;
    } else {
      is.seekg(chunk + (chunk & 1), std::ios::cur);
    }
  }
  if (!got_data) throw IoError("no data chunk: " + path);
  if (sample_rate) *sample_rate = static_cast<int>(rate);
  return samples;
}

// ---------------------------------------------------------------------------
// Manifest I/O
// ---------------------------------------------------------------------------

namespace {

const char* kManifestHeader = "id\taudio\tn_samples\tspeaker\ttext\trating";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void validate_record(const ManifestRecord& r, const std::string& where) {
  if (r.n_samples <= 0)
    throw MalformedManifest(where + ": n_samples must be positive");
  if (r.rating < -1 || r.rating > 3)
    throw MalformedManifest(where + ": rating must be -1 or 0..3");
  if (r.text.empty() && r.rating == -1)
    throw MalformedManifest(where + ": record has neither text nor rating");
}

}  // namespace

std::vector<ManifestRecord> load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  std::string line;
  if (!std::getline(is, line)) throw EmptyManifest("manifest is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader)
    throw MalformedManifest("bad manifest header in " + path + ": " + line);
  std::vector<ManifestRecord> records;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (cols.size() != 6)
      throw MalformedManifest(where + ": expected 6 columns, got " +
                              std::to_string(cols.size()));
    ManifestRecord r;
    r.id = cols[0];
    r.audio_path = cols[1];
    try {
      size_t used = 0;
      r.n_samples = std::stoll(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw MalformedManifest(where + ": non-integer n_samples '" + cols[2] + "'");
    }
    r.speaker_id = cols[3];
    r.text = cols[4];
    try {
      size_t used = 0;
      r.rating = std::stoi(cols[5], &used);
      if (used != cols[5].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw MalformedManifest(where + ": non-integer rating '" + cols[5] + "'");
    }
    validate_record(r, where);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw EmptyManifest("manifest has no records: " + path);
  return records;
}

void save_manifest(const std::string& path,
                   const std::vector<ManifestRecord>& records) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << kManifestHeader << "\n";
  for (const auto& r : records) {
    validate_record(r, path);
    os << r.id << '\t' << r.audio_path << '\t' << r.n_samples << '\t'
       << r.speaker_id << '\t' << r.text << '\t' << r.rating << "\n";
  }
  if (!os) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

Vocabulary build_vocabulary(const std::vector<std::string>& transcripts) {
  bool any = false;
  std::set<char> chars;
  for (const auto& t : transcripts) {
    if (!t.empty()) any = true;
    for (char c : t) chars.insert(c);
  }
  if (!any) throw EmptyInput("no nonempty transcripts");
  Vocabulary v;
  v.tokens = {"<pad>", "<s>", "</s>", "<unk>"};
  for (char c : chars) v.tokens.push_back(std::string(1, c));
  return v;
}

std::vector<int> encode_text(const std::string& text, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(text.size() + 2);
  ids.push_back(Vocabulary::kBos);
  for (char c : text) {
    const std::string s(1, c);
    int id = Vocabulary::kUnk;
    for (int i = 4; i < vocab.size(); ++i) {
      if (vocab.tokens[i] == s) {
        id = i;
        break;
      }
    }
    ids.push_back(id);
  }
  ids.push_back(Vocabulary::kEos);
  return ids;
}

std::string decode_tokens(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::string out;
  for (int id : ids) {
    if (id == Vocabulary::kPad || id == Vocabulary::kBos || id == Vocabulary::kEos)
      continue;
    if (id == Vocabulary::kUnk) {
      out += '?';
      continue;
    }
    if (id < 0 || id >= vocab.size())
      throw TokenOutOfRange("token id " + std::to_string(id));
    out += vocab.tokens[id];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formant synthesis
// ---------------------------------------------------------------------------

namespace {

// Two-pole resonator with unity DC gain (digital formant filter).
class Resonator {
 public:
  Resonator(double freq, double bw, double fs) {
    const double r = std::exp(-M_PI * bw / fs);
    const double theta = 2.0 * M_PI * freq / fs;
    b1_ = 2.0 * r * std::cos(theta);
    b2_ = -r * r;
    a0_ = 1.0 - b1_ - b2_;
  }

  double step(double x) {
    const double y = a0_ * x + b1_ * y1_ + b2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a0_, b1_, b2_;
  double y1_ = 0.0, y2_ = 0.0;
};

enum class PhoneKind { kVowel, kNasal, kStop, kFric };

struct Phone {
  PhoneKind kind;
  double f1, f2, f3;  // vowel formants; for nasals f1 is the murmur center
  double dur_ms;
};

// Coarse adult vowel formants plus a few consonant classes. Enough contrast
// for a character-level recognizer to tell the symbols apart.
const std::map<char, Phone>& phone_table() {
  static const std::map<char, Phone> table = {
      {'a', {PhoneKind::kVowel, 730, 1090, 2440, 190}},
      {'e', {PhoneKind::kVowel, 530, 1840, 2480, 180}},
      {'i', {PhoneKind::kVowel, 270, 2290, 3010, 180}},
      {'o', {PhoneKind::kVowel, 570, 840, 2410, 190}},
      {'u', {PhoneKind::kVowel, 300, 870, 2240, 180}},
      {'m', {PhoneKind::kNasal, 250, 1100, 2200, 90}},
      {'n', {PhoneKind::kNasal, 300, 1500, 2500, 90}},
      {'b', {PhoneKind::kStop, 600, 0, 0, 55}},
      {'d', {PhoneKind::kStop, 1800, 0, 0, 55}},
      {'g', {PhoneKind::kStop, 1300, 0, 0, 55}},
      {'s', {PhoneKind::kFric, 5500, 0, 0, 95}},
  };
  return table;
}

// Fraction of the first oral formant removed at full nasal coupling.
constexpr double kF1Attenuation = 0.65;
// Murmur amplitude relative to the first-formant branch at full coupling.
constexpr double kMurmurGain = 1.3;

struct PulseSource {
  double phase = 1.0;  // emit a pulse on the first sample
  double period;       // samples per pitch period
  Rng* rng;
  double jitter;

  PulseSource(double f0, double fs, Rng* r, double jit)
      : period(fs / f0), rng(r), jitter(jit) {}

  double step() {
    phase += 1.0 / period;
    if (phase >= 1.0) {
      phase -= 1.0;
      // Small pitch jitter per period keeps repeated vowels from being
      // perfectly periodic.
      const double j = 1.0 + jitter * (rng->uniform_real() * 2.0 - 1.0);
      return 8.0 / period * j;
    }
    return 0.0;
  }
};

void render_ramped(std::vector<float>& out, const std::vector<double>& seg,
                   double fs) {
  const size_t ramp = static_cast<size_t>(0.008 * fs);
  for (size_t i = 0; i < seg.size(); ++i) {
    double w = 1.0;
    if (i < ramp) w = static_cast<double>(i) / ramp;
    const size_t tail = seg.size() - 1 - i;
    if (tail < ramp) w = std::min(w, static_cast<double>(tail) / ramp);
    out.push_back(static_cast<float>(seg[i] * w));
  }
}

void synth_phone(std::vector<float>& out, const Phone& ph, double coupling,
                 const SpeakerVoice& voice, Rng& rng) {
  const double fs = kSampleRate;
  const double dur_jit = 1.0 + 0.1 * (rng.uniform_real() * 2.0 - 1.0);
  const int n = static_cast<int>(ph.dur_ms * 1e-3 * dur_jit * fs);
  std::vector<double> seg;
  seg.reserve(n);
  switch (ph.kind) {
    case PhoneKind::kVowel: {
      PulseSource src(voice.f0 * (1.0 + 0.04 * (rng.uniform_real() - 0.5)), fs,
                      &rng, 0.02);
      Resonator r1(ph.f1 * voice.formant_scale, 90, fs);
      Resonator r2(ph.f2 * voice.formant_scale, 110, fs);
      Resonator r3(ph.f3 * voice.formant_scale, 170, fs);
      Resonator murmur(250, 90, fs);
      const double a1 = 1.0 * (1.0 - kF1Attenuation * coupling);
      const double a2 = 0.6;
      const double a3 = 0.25;
      const double am = kMurmurGain * coupling;
      for (int i = 0; i < n; ++i) {
        const double e = src.step();
        const double y =
            a1 * r1.step(e) + a2 * r2.step(e) + a3 * r3.step(e) + am * murmur.step(e);
        seg.push_back(y);
      }
      break;
    }
    case PhoneKind::kNasal: {
      PulseSource src(voice.f0, fs, &rng, 0.02);
      Resonator rm(ph.f1, 80, fs);
      Resonator r2(ph.f2 * voice.formant_scale, 180, fs);
      for (int i = 0; i < n; ++i) {
        const double e = src.step();
        seg.push_back(1.1 * rm.step(e) + 0.18 * r2.step(e));
      }
      break;
    }
    case PhoneKind::kStop: {
      const int closure = static_cast<int>(0.030 * fs);
      const int burst = n - closure;
      Resonator rb(ph.f1, 700, fs);
      for (int i = 0; i < closure; ++i) seg.push_back(0.0);
      for (int i = 0; i < burst; ++i) {
        const double env = std::exp(-6.0 * i / burst);
        seg.push_back(1.6 * env * rb.step(rng.normal()));
      }
      break;
    }
    case PhoneKind::kFric: {
      Resonator rf(ph.f1, 2000, fs);
      for (int i = 0; i < n; ++i) seg.push_back(0.45 * rf.step(rng.normal()));
      break;
    }
  }
  render_ramped(out, seg, fs);
}

}  // namespace

std::vector<std::string> SynthSpec::default_inventory() {
  return {"ba", "da", "ga", "ma", "na", "sa", "bi", "di", "mi", "si", "bu", "mu"};
}

void SynthSpec::validate() const {
  if (n_speakers <= 0) throw Error("SynthSpec: n_speakers must be positive");
  if (utterances_per_speaker <= 0)
    throw Error("SynthSpec: utterances_per_speaker must be positive");
  if (word_inventory.empty()) throw Error("SynthSpec: empty word inventory");
  double sum = 0.0;
  for (double p : rating_distribution) {
    if (p < 0.0) throw Error("SynthSpec: negative rating probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error("SynthSpec: rating_distribution must sum to 1");
  if (nasal_coupling[0] != 0.0)
    throw Error("SynthSpec: nasal_coupling[0] must be 0");
  for (int r = 0; r < 4; ++r) {
    if (nasal_coupling[r] < 0.0 || nasal_coupling[r] > 1.0)
      throw Error("SynthSpec: nasal_coupling out of [0,1]");
    if (r > 0 && nasal_coupling[r] < nasal_coupling[r - 1])
      throw Error("SynthSpec: nasal_coupling must be nondecreasing");
  }
  for (const auto& w : word_inventory) {
    if (w.empty()) throw Error("SynthSpec: empty word in inventory");
    for (char c : w) {
      if (phone_table().find(c) == phone_table().end())
        throw Error(std::string("SynthSpec: unknown phone '") + c + "' in word '" +
                    w + "'");
    }
  }
}

Utterance synth_utterance(const std::vector<int>& word_ids, int rating,
                          const SpeakerVoice& voice, const SynthSpec& spec,
                          uint64_t seed) {
  if (word_ids.empty()) throw EmptyInput("synth_utterance: no words");
  if (rating < 0 || rating > 3)
    throw Error("synth_utterance: rating out of range");
  for (int w : word_ids) {
    if (w < 0 || w >= static_cast<int>(spec.word_inventory.size()))
      throw UnknownWordId("word id " + std::to_string(w));
  }
  Rng rng(seed);
  const double coupling = spec.nasal_coupling[rating];
  const double fs = kSampleRate;

  Utterance utt;
  utt.sample_rate = kSampleRate;
  utt.rating = rating;

  std::vector<float> audio;
  auto push_silence = [&](double ms) {
    const int n = static_cast<int>(ms * 1e-3 * fs);
    for (int i = 0; i < n; ++i) audio.push_back(0.0f);
  };
  push_silence(30);
  std::string transcript;
  for (size_t wi = 0; wi < word_ids.size(); ++wi) {
    const std::string& word = spec.word_inventory[word_ids[wi]];
    if (wi > 0) {
      transcript += ' ';
      push_silence(45 + 10 * rng.uniform_real());
    }
    transcript += word;
    for (char c : word) {
      synth_phone(audio, phone_table().at(c), coupling, voice, rng);
    }
  }
  push_silence(30);

  // Broadband noise floor, then peak normalization.
  double peak = 1e-9;
  for (float v : audio) peak = std::max(peak, std::abs(static_cast<double>(v)));
  const double gain = voice.amplitude / peak;
  for (float& v : audio) {
    const double noisy =
        gain * v + spec.noise_level * rng.normal();
    v = static_cast<float>(std::min(1.0, std::max(-1.0, noisy)));
  }

  utt.samples = std::move(audio);
  utt.transcript = transcript;
  return utt;
}

// ---------------------------------------------------------------------------
// Corpus generation
// ---------------------------------------------------------------------------

std::vector<int> largest_remainder_counts(const double probs[4], int n) {
  std::vector<int> counts(4);
  std::vector<double> remainder(4);
  int assigned = 0;
  for (int i = 0; i < 4; ++i) {
    const double quota = probs[i] * n;
    counts[i] = static_cast<int>(std::floor(quota));
    remainder[i] = quota - counts[i];
    assigned += counts[i];
  }
  std::vector<int> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[a] > remainder[b];
  });
  for (int k = 0; k < n - assigned; ++k) counts[order[k]] += 1;
  return counts;
}

namespace {

SpeakerVoice draw_voice(Rng& rng) {
  SpeakerVoice v;
  v.f0 = rng.uniform_real(95.0, 215.0);
  v.formant_scale = rng.uniform_real(0.92, 1.08);
  v.amplitude = rng.uniform_real(0.25, 0.35);
  return v;
}

std::string zero_pad(int v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

CorpusPaths generate_corpus(const SynthSpec& spec, const std::string& out_dir) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  const int n_words = static_cast<int>(spec.word_inventory.size());

  // Clinical speakers: one rating each, counts by largest remainder.
  std::vector<int> counts = largest_remainder_counts(spec.rating_distribution,
                                                     spec.n_speakers);
  std::vector<int> speaker_rating;
  for (int r = 0; r < 4; ++r)
    for (int i = 0; i < counts[r]; ++i) speaker_rating.push_back(r);
  {
    Rng shuffle_rng(derive_seed(spec.seed, "rating_assignment"));
    shuffle_rng.shuffle(speaker_rating);
  }

  std::vector<ManifestRecord> asr_records, clp_records;
  auto synth_one = [&](const std::string& speaker, const std::string& utt_id,
                       int rating, bool with_text, const SpeakerVoice& voice,
                       uint64_t utt_seed) {
    Rng pick(derive_seed(utt_seed, "words"));
    const int n = static_cast<int>(pick.uniform_int(1, 3));
    std::vector<int> words;
    for (int i = 0; i < n; ++i)
      words.push_back(static_cast<int>(pick.uniform(n_words)));
    Utterance utt = synth_utterance(words, rating, voice, spec,
                                    derive_seed(utt_seed, "audio"));
    utt.id = utt_id;
    utt.speaker_id = speaker;
    const std::string rel = "wav/" + utt_id + ".wav";
    write_wav((fs::path(out_dir) / rel).string(), utt.samples);
    ManifestRecord rec;
    rec.id = utt_id;
    rec.audio_path = rel;
    rec.n_samples = static_cast<int64_t>(utt.samples.size());
    rec.speaker_id = speaker;
    if (with_text) {
      rec.text = *utt.transcript;
      rec.rating = -1;
    } else {
      rec.text.clear();
      rec.rating = rating;
    }
    return rec;
  };

  // General-domain corpus: normal voices with transcripts.
  for (int s = 0; s < spec.n_speakers; ++s) {
    const std::string speaker = "gen" + zero_pad(s, 3);
    Rng vr(derive_seed(spec.seed, "asr_voice", s));
    const SpeakerVoice voice = draw_voice(vr);
    for (int u = 0; u < spec.utterances_per_speaker; ++u) {
      const std::string utt_id = speaker + "_u" + zero_pad(u, 3);
      asr_records.push_back(synth_one(speaker, utt_id, 0, true, voice,
                                      derive_seed(spec.seed, "asr_utt",
                                                  uint64_t(s) * 100003 + u)));
    }
  }

  // Clinical corpus: rated voices, no transcripts.
  for (int s = 0; s < spec.n_speakers; ++s) {
    const std::string speaker = "pat" + zero_pad(s, 3);
    Rng vr(derive_seed(spec.seed, "clp_voice", s));
    const SpeakerVoice voice = draw_voice(vr);
    const int rating = speaker_rating[s];
    for (int u = 0; u < spec.utterances_per_speaker; ++u) {
      const std::string utt_id = speaker + "_u" + zero_pad(u, 3);
      clp_records.push_back(synth_one(speaker, utt_id, rating, false, voice,
                                      derive_seed(spec.seed, "clp_utt",
                                                  uint64_t(s) * 100003 + u)));
    }
  }

  CorpusPaths paths;
  paths.asr_manifest = (fs::path(out_dir) / "asr_manifest.tsv").string();
  paths.clp_manifest = (fs::path(out_dir) / "clp_manifest.tsv").string();
  save_manifest(paths.asr_manifest, asr_records);
  save_manifest(paths.clp_manifest, clp_records);
  return paths;
}

// ---------------------------------------------------------------------------
// SynthSpec JSON
// ---------------------------------------------------------------------------

SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad synth spec JSON in " + path + ": " + e.what());
  }
  SynthSpec s;
  s.word_inventory = SynthSpec::default_inventory();
  if (j.contains("n_speakers")) s.n_speakers = j["n_speakers"].get<int>();
  if (j.contains("utterances_per_speaker"))
    s.utterances_per_speaker = j["utterances_per_speaker"].get<int>();
  if (j.contains("word_inventory"))
    s.word_inventory = j["word_inventory"].get<std::vector<std::string>>();
  if (j.contains("rating_distribution")) {
    auto v = j["rating_distribution"].get<std::vector<double>>();
    if (v.size() != 4) throw Error("rating_distribution needs 4 entries");
    std::copy(v.begin(), v.end(), s.rating_distribution);
  }
  if (j.contains("nasal_coupling")) {
    auto v = j["nasal_coupling"].get<std::vector<double>>();
    if (v.size() != 4) throw Error("nasal_coupling needs 4 entries");
    std::copy(v.begin(), v.end(), s.nasal_coupling);
  }
  if (j.contains("seed")) s.seed = j["seed"].get<uint64_t>();
  if (j.contains("noise_level")) s.noise_level = j["noise_level"].get<double>();
  s.validate();
  return s;
}

void save_synth_spec(const std::string& path, const SynthSpec& spec) {
  nlohmann::json j;
  j["n_speakers"] = spec.n_speakers;
  j["utterances_per_speaker"] = spec.utterances_per_speaker;
  j["word_inventory"] = spec.word_inventory;
  j["rating_distribution"] = std::vector<double>(spec.rating_distribution,
                                                 spec.rating_distribution + 4);
  j["nasal_coupling"] =
      std::vector<double>(spec.nasal_coupling, spec.nasal_coupling + 4);
  j["seed"] = spec.seed;
  j["noise_level"] = spec.noise_level;
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

}  // namespace velo
