// Copyright 2026 The lsevoc Authors. All Rights Reserved.
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
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include <torch/torch.h>

#include "lsevoc/cli.hpp"
#include "lsevoc/config.hpp"
#include "lsevoc/error.hpp"
#include "lsevoc/evalkit.hpp"
#include "lsevoc/hash.hpp"
#include "lsevoc/spectral.hpp"
#include "lsevoc/training.hpp"
#include "lsevoc/wav.hpp"

namespace py = pybind11;
using namespace lsevoc;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

torch::Tensor to_tensor(const FloatArray& a) {
  std::vector<std::int64_t> shape(a.shape(), a.shape() + a.ndim());
  return torch::from_blob(const_cast<float*>(a.data()), shape, torch::kFloat).clone();
}

FloatArray to_array(torch::Tensor t) {
  t = t.detach().to(torch::kFloat).contiguous();
  std::vector<py::ssize_t> shape(t.sizes().begin(), t.sizes().end());
  FloatArray out(shape);
  std::memcpy(out.mutable_data(), t.data_ptr<float>(), t.numel() * sizeof(float));
  return out;
}

template <typename Fn>
FloatArray extract(const spectral::SpectralConfig& cfg, const FloatArray& samples, Fn fn) {
  if (samples.ndim() < 1) throw ShapeError("samples must have at least one dimension");
  auto x = to_tensor(samples);
  torch::Tensor y;
  {
    py::gil_scoped_release release;
    torch::NoGradGuard no_grad;
    spectral::FeatureExtractor fe(cfg);
    y = fn(fe, x);
  }
  return to_array(y);
}

}  // namespace

PYBIND11_MODULE(_lsevoc, m) {
  m.doc() = "Native core of lsevoc: spectral features, WAV I/O, scoring and the command-line entry point.";

  py::register_exception<Error>(m, "Error");
  py::register_exception<UsageError>(m, "UsageError", m.attr("Error"));
  py::register_exception<ConfigError>(m, "ConfigError", m.attr("Error"));
  py::register_exception<DataError>(m, "DataError", m.attr("Error"));
  py::register_exception<ShapeError>(m, "ShapeError", m.attr("Error"));
  py::register_exception<DomainError>(m, "DomainError", m.attr("Error"));
  py::register_exception<DivergenceError>(m, "DivergenceError", m.attr("Error"));
  py::register_exception<StaleCacheError>(m, "StaleCacheError", m.attr("DataError"));

  py::class_<spectral::NormStats>(m, "NormStats")
      .def(py::init<>())
      .def_readwrite("linear_mean", &spectral::NormStats::linear_mean)
      .def_readwrite("linear_std", &spectral::NormStats::linear_std)
      .def_readwrite("mel_mean", &spectral::NormStats::mel_mean)
      .def_readwrite("mel_std", &spectral::NormStats::mel_std);

  py::class_<spectral::SpectralConfig>(m, "SpectralConfig")
      .def(py::init<>())
      .def_readwrite("sample_rate", &spectral::SpectralConfig::sample_rate)
      .def_readwrite("frames_per_second", &spectral::SpectralConfig::frames_per_second)
      .def_readwrite("fft_size", &spectral::SpectralConfig::fft_size)
      .def_readwrite("window_size", &spectral::SpectralConfig::window_size)
      .def_readwrite("n_mel", &spectral::SpectralConfig::n_mel)
      .def_readwrite("mel_f_max", &spectral::SpectralConfig::mel_f_max)
      .def_readwrite("amplitude_floor", &spectral::SpectralConfig::amplitude_floor)
      .def_readwrite("per_bin_norm", &spectral::SpectralConfig::per_bin_norm)
      .def_readwrite("norm", &spectral::SpectralConfig::norm)
      .def_property_readonly("hop", &spectral::SpectralConfig::hop)
      .def_property_readonly("n_bins", &spectral::SpectralConfig::n_bins)
      .def_property_readonly("n_linear", &spectral::SpectralConfig::n_linear)
      .def_property_readonly("delta_f", &spectral::SpectralConfig::delta_f)
      .def("validate", &spectral::SpectralConfig::validate)
      .def("fingerprint", [](const spectral::SpectralConfig& c) { return to_hex(c.fingerprint()); });

  m.def("hz_to_mel", &spectral::hz_to_mel, py::arg("hz"));
  m.def("mel_to_hz", &spectral::mel_to_hz, py::arg("mel"));
  m.def("frame_count", &spectral::frame_count, py::arg("n_samples"), py::arg("hop"));
  m.def("mel_centers", &spectral::mel_centers, py::arg("config"));
  m.def("linear_centers", &spectral::linear_centers, py::arg("config"));
  m.def("mel_filterbank", [](const spectral::SpectralConfig& c) { return to_array(spectral::build_mel_filterbank(c)); },
        py::arg("config"));
  m.def("linear_filterbank",
        [](const spectral::SpectralConfig& c) { return to_array(spectral::build_linear_filterbank(c)); },
        py::arg("config"));

  m.def(
      "log_mel",
      [](const FloatArray& s, const spectral::SpectralConfig& c) {
        return extract(c, s, [](auto& fe, auto& x) { return fe.log_mel(x); });
      },
      py::arg("samples"), py::arg("config") = spectral::SpectralConfig{},
      "Un-normalized log-mel features, [..., n] -> [..., n_mel, T].");
  m.def(
      "log_linear",
      [](const FloatArray& s, const spectral::SpectralConfig& c) {
        return extract(c, s, [](auto& fe, auto& x) { return fe.log_linear(x); });
      },
      py::arg("samples"), py::arg("config") = spectral::SpectralConfig{},
      "Un-normalized log linear-scale features, [..., n] -> [..., n_linear, T].");
  m.def(
      "log_magnitude",
      [](const FloatArray& s, const spectral::SpectralConfig& c) {
        return extract(c, s, [](auto& fe, auto& x) { return fe.log_magnitude(x); });
      },
      py::arg("samples"), py::arg("config") = spectral::SpectralConfig{});

  m.def(
      "read_wav",
      [](const std::filesystem::path& p) {
        auto a = wav::read(p);
        FloatArray out({static_cast<py::ssize_t>(a.channels), static_cast<py::ssize_t>(a.frames())});
        for (int c = 0; c < a.channels; ++c) {
          std::copy(a.data[c].begin(), a.data[c].end(), out.mutable_data(c, 0));
        }
        return py::make_tuple(out, a.sample_rate);
      },
      py::arg("path"), "Returns (samples [channels, frames], sample_rate).");
  m.def(
      "write_wav",
      [](const std::filesystem::path& p, const FloatArray& samples, int sample_rate, bool float32) {
        if (samples.ndim() != 1) throw ShapeError("write_wav expects mono samples [n]");
        std::vector<float> mono(samples.data(), samples.data() + samples.size());
        wav::write(p, mono, sample_rate, float32 ? wav::SampleFormat::float32 : wav::SampleFormat::pcm16);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate"), py::arg("float32") = false);

  m.def("auc", &eval::auc, py::arg("positive"), py::arg("negative"));
  m.def("mix_seed", &mix_seed, py::arg("seed"), py::arg("salt"));

  m.def(
      "score_wav",
      [](const std::filesystem::path& checkpoint, const std::vector<std::filesystem::path>& wavs,
         const spectral::SpectralConfig& spec) {
        auto ck = training::load_checkpoint(checkpoint);
        eval::ClassifierScoreProvider provider(eval::classifier_from_checkpoint(ck, spec), spec,
                                                  checkpoint.filename().string());
        std::vector<double> scores;
        py::gil_scoped_release release;
        for (const auto& w : wavs) scores.push_back(provider.score(w));
        return scores;
      },
      py::arg("checkpoint"), py::arg("wavs"), py::arg("spectral") = spectral::SpectralConfig{},
      "Ground-truth probability of each WAV under a saved classifier.");

  m.def(
      "resolved_config",
      [](const std::vector<std::string>& sets) {
        cli::GlobalConfig cfg;
        for (const auto& s : sets) cfg.set(s);
        return cfg.tree().dump();
      },
      py::arg("sets") = std::vector<std::string>{}, "Resolved configuration as JSON text.");

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
