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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "velo/cli.hpp"
#include "velo/config.hpp"
#include "velo/eval.hpp"

namespace py = pybind11;

namespace {

using velo::FeatureMatrix;

FeatureMatrix to_features(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw velo::ShapeMismatch("expected a 2-D feature array");
  FeatureMatrix f(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + arr.size(), f.data.begin());
  return f;
}

py::array_t<float> from_features(const FeatureMatrix& f) {
  return py::array_t<float>({f.frames, f.channels}, f.data.data());
}

py::array_t<float> from_tensor(const velo::Tensor<float>& t) {
  return py::array_t<float>({t.rows, t.cols}, t.data.data());
}

// Checkpoint plus the operations the pipeline runs on it.
struct Model {
  velo::Checkpoint ck;

  py::array_t<float> encode(const py::array_t<float, py::array::c_style | py::array::forcecast>& feats) const {
    return from_tensor(velo::encode(to_features(feats), ck.params, ck.config).h);
  }

  std::vector<float> classify(const py::array_t<float, py::array::c_style | py::array::forcecast>& feats) const {
    const auto enc = velo::encode(to_features(feats), ck.params, ck.config);
    return velo::classify(enc, ck.params, ck.config);
  }

  py::array_t<float> activation(const py::array_t<float, py::array::c_style | py::array::forcecast>& feats) const {
    const auto enc = velo::encode(to_features(feats), ck.params, ck.config);
    const auto a = velo::trace_from_state(enc.h);
    return py::array_t<float>({static_cast<py::ssize_t>(a.size())}, a.data());
  }

  std::string transcribe(const py::array_t<float, py::array::c_style | py::array::forcecast>& feats,
                         int max_len) const {
    const auto enc = velo::encode(to_features(feats), ck.params, ck.config);
    const auto seq = velo::greedy_decode(enc, ck.params, ck.config, max_len);
    return velo::decode_tokens(seq, ck.vocab);
  }

  py::dict config() const {
    py::dict d;
    d["hidden"] = ck.config.hidden;
    d["enc_layers"] = ck.config.enc_layers;
    d["dec_layers"] = ck.config.dec_layers;
    d["heads"] = ck.config.heads;
    d["ffn"] = ck.config.ffn;
    d["vocab_size"] = ck.config.vocab_size;
    d["n_classes"] = ck.config.n_classes;
    d["input_dim"] = ck.config.input_dim;
    return d;
  }

  std::vector<std::string> tensor_names() const { return ck.params.names; }
};

}  // namespace

PYBIND11_MODULE(_velo, m) {
  m.doc() = "ASR-pretraining-based hypernasality estimation core";

  m.def(
      "logmel",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& samples,
         int sample_rate) {
        if (samples.ndim() != 1) throw velo::ShapeMismatch("expected a 1-D signal");
        std::vector<float> s(samples.data(), samples.data() + samples.size());
        velo::FrontendConfig cfg;
        if (sample_rate != cfg.sample_rate)
          s = velo::resample(s, sample_rate, cfg.sample_rate);
        return from_features(velo::logmel(s, cfg));
      },
      py::arg("samples"), py::arg("sample_rate") = 16000,
      "80-channel log-mel features of a mono signal");

  m.def(
      "normalize",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& f) {
        return from_features(velo::normalize(to_features(f)));
      },
      py::arg("features"), "per-utterance mean/variance normalization");

  m.def(
      "spec_augment",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& f,
         uint64_t seed, int F, int mF, int T, int mT) {
        velo::AugmentPolicy policy{F, mF, T, mT};
        velo::Rng rng(seed);
        return from_features(velo::spec_augment(to_features(f), policy, rng));
      },
      py::arg("features"), py::arg("seed"), py::arg("F") = 27, py::arg("mF") = 2,
      py::arg("T") = 40, py::arg("mT") = 2, "time/frequency masking");

  m.def(
      "frame_count",
      [](int64_t n_samples) { return velo::frame_count(n_samples); },
      py::arg("n_samples"), "frames produced for an n-sample 16 kHz signal");

  m.def(
      "subsampled_length",
      [](int frames) {
        velo::ModelConfig cfg;
        return velo::subsampled_length(frames, cfg);
      },
      py::arg("frames"), "encoder output length for a frame count");

  m.def("levenshtein", &velo::levenshtein, py::arg("a"), py::arg("b"));
  m.def("cer", &velo::cer, py::arg("hyp"), py::arg("ref"),
        "character error rate = edit distance / reference length");

  m.def(
      "read_wav",
      [](const std::string& path) {
        int rate = 0;
        const auto samples = velo::read_wav(path, &rate);
        py::array_t<float> out({static_cast<py::ssize_t>(samples.size())},
                               samples.data());
        return py::make_tuple(out, rate);
      },
      py::arg("path"), "returns (samples, sample_rate)");

  m.def(
      "synth_corpus",
      [](const std::string& out_dir, int n_speakers, int utterances_per_speaker,
         uint64_t seed) {
        velo::SynthSpec spec;
        spec.word_inventory = velo::SynthSpec::default_inventory();
        spec.n_speakers = n_speakers;
        spec.utterances_per_speaker = utterances_per_speaker;
        spec.seed = seed;
        const auto paths = velo::generate_corpus(spec, out_dir);
        return py::make_tuple(paths.asr_manifest, paths.clp_manifest);
      },
      py::arg("out_dir"), py::arg("n_speakers") = 40,
      py::arg("utterances_per_speaker") = 5, py::arg("seed") = 1,
      "writes WAVs plus ASR and CLP manifests; returns the manifest paths");

  m.def(
      "aggregate_speaker",
      [](const std::vector<std::vector<float>>& probs) {
        return velo::aggregate_speaker(probs);
      },
      py::arg("utterance_probs"), "mean-probability speaker decision");

  m.def(
      "precision_metrics",
      [](const std::vector<int>& truth, const std::vector<int>& pred, int n_classes) {
        const auto m_ = velo::precision_metrics(truth, pred, n_classes);
        py::dict d;
        d["accuracy"] = m_.accuracy;
        d["precision"] = m_.precision;
        d["macro_precision"] = m_.macro_precision;
        py::list rows;
        for (int t = 0; t < n_classes; ++t) {
          py::list row;
          for (int p = 0; p < n_classes; ++p) row.append(m_.confusion.at(t, p));
          rows.append(row);
        }
        d["confusion"] = rows;
        return d;
      },
      py::arg("truth"), py::arg("pred"), py::arg("n_classes"));

  py::class_<Model>(m, "Model")
      .def_static(
          "load",
          [](const std::string& path) {
            Model mm;
            mm.ck = velo::load_checkpoint(path);
            return mm;
          },
          py::arg("path"))
      .def("encode", &Model::encode, py::arg("features"),
           "eval-mode encoder states (L x hidden)")
      .def("classify", &Model::classify, py::arg("features"),
           "class probabilities from pooled encoder states")
      .def("activation", &Model::activation, py::arg("features"),
           "frame activations (1/D)|sum_j h_ij|")
      .def("transcribe", &Model::transcribe, py::arg("features"),
           py::arg("max_len") = 128, "greedy speech-to-text decoding")
      .def_property_readonly("config", &Model::config)
      .def_property_readonly("tensor_names", &Model::tensor_names);

  m.def(
      "run_cli", [](const std::vector<std::string>& args) { return velo::run_cli(args); },
      py::arg("args"), "invoke the velo command line; returns the exit code");

  py::register_exception<velo::Error>(m, "VeloError", PyExc_RuntimeError);
}
