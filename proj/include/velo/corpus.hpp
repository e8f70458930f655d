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

#ifndef VELO_CORPUS_HPP_
#define VELO_CORPUS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "velo/errors.hpp"

namespace velo {

constexpr int kSampleRate = 16000;

// One recording. Ratings follow the 0-normal .. 3-severe scale; a record
// carries a transcript (speech-to-text data) or a rating (clinical data),
// never neither.
struct Utterance {
  std::string id;
  std::vector<float> samples;  // amplitudes in [-1, 1]
  int sample_rate = kSampleRate;
  std::string speaker_id;
  std::optional<std::string> transcript;
  std::optional<int> rating;
};

// Character vocabulary with four reserved entries at fixed indices.
struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  std::vector<std::string> tokens;  // tokens[0..3] are <pad>, <s>, </s>, <unk>

  int size() const { return static_cast<int>(tokens.size()); }
};

// One manifest row. rating == -1 encodes "absent".
struct ManifestRecord {
  std::string id;
  std::string audio_path;  // relative to the manifest's directory
  int64_t n_samples = 0;
  std::string speaker_id;
  std::string text;    // empty when absent
  int rating = -1;

  bool operator==(const ManifestRecord&) const = default;
};

// Parameters of the synthetic corpus generator. The generator produces a
// speech-to-text corpus (normal voices, transcripts) and a clinical corpus
// (rated voices, no transcripts) from the same word inventory.
struct SynthSpec {
  int n_speakers = 40;             // per corpus
  int utterances_per_speaker = 5;  // per speaker
  std::vector<std::string> word_inventory;
  double rating_distribution[4] = {0.25, 0.25, 0.25, 0.25};
  double nasal_coupling[4] = {0.0, 0.35, 0.65, 0.9};
  uint64_t seed = 1;
  double noise_level = 0.004;  // broadband noise floor added to every file

  static std::vector<std::string> default_inventory();
  void validate() const;
};

// Per-speaker voice parameters drawn once per speaker.
struct SpeakerVoice {
  double f0 = 120.0;           // base pitch, Hz
  double formant_scale = 1.0;  // multiplies every formant center
  double amplitude = 0.3;      // peak target
};

// ---- WAV I/O (PCM16LE mono) ----
void write_wav(const std::string& path, const std::vector<float>& samples,
               int sample_rate = kSampleRate);
std::vector<float> read_wav(const std::string& path, int* sample_rate);

// ---- Manifest I/O ----
// TSV with header: id  audio  n_samples  speaker  text  rating
std::vector<ManifestRecord> load_manifest(const std::string& path);
void save_manifest(const std::string& path, const std::vector<ManifestRecord>& records);

// ---- Tokenization ----
Vocabulary build_vocabulary(const std::vector<std::string>& transcripts);
std::vector<int> encode_text(const std::string& text, const Vocabulary& vocab);
// Inverse of encode_text on in-vocabulary text; skips PAD/BOS/EOS, renders
// UNK as '?'.
std::string decode_tokens(const std::vector<int>& ids, const Vocabulary& vocab);

// ---- Synthesis ----
// Renders the given words with the given severity. Deterministic for fixed
// arguments. Severity r > 0 mixes a nasal murmur resonance near 250 Hz into
// vowels and attenuates the first oral formant, both in proportion to
// nasal_coupling[r].
Utterance synth_utterance(const std::vector<int>& word_ids, int rating,
                          const SpeakerVoice& voice, const SynthSpec& spec,
                          uint64_t seed);

struct CorpusPaths {
  std::string asr_manifest;
  std::string clp_manifest;
};

// Writes WAV files plus two manifests under out_dir. Speech-to-text records
// carry text and rating=-1; clinical records carry a rating and empty text.
// Each clinical speaker has one rating; realized per-rating speaker counts
// follow rating_distribution by largest-remainder rounding.
CorpusPaths generate_corpus(const SynthSpec& spec, const std::string& out_dir);

// Largest-remainder apportionment of n into 4 classes.
std::vector<int> largest_remainder_counts(const double probs[4], int n);

// JSON (de)serialization of SynthSpec for the CLI.
SynthSpec load_synth_spec(const std::string& path);
void save_synth_spec(const std::string& path, const SynthSpec& spec);

}  // namespace velo

#endif  // VELO_CORPUS_HPP_
