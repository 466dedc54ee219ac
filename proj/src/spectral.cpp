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

#include "lsevoc/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "lsevoc/error.hpp"

namespace lsevoc::spectral {

namespace {

constexpr double kMinLogHz = 1000.0;
constexpr double kMinLogMel = 15.0;  // 3 * 1000 / 200
const double kLogStep = std::log(6.4) / 27.0;

void check_stats(const std::vector<double>& mean, const std::vector<double>& stdev, int banks,
                 const char* what) {
  if (mean.size() != stdev.size() || (mean.size() != 1 && mean.size() != std::size_t(banks)))
    throw ConfigError(std::string("normalization statistics for ") + what +
                      " must hold 1 or " + std::to_string(banks) + " entries");
  for (std::size_t i = 0; i < stdev.size(); ++i) {
    if (!std::isfinite(mean[i]) || !std::isfinite(stdev[i]))
      throw ConfigError(std::string("non-finite normalization statistics for ") + what);
    if (!(stdev[i] > 0.0))
      throw ConfigError(std::string("normalization std for ") + what + " must be positive");
  }
}

// Unit-peak triangle on the FFT bin grid; rows must not be narrower than one
// bin or a band can fall between bins.
torch::Tensor triangles(const std::vector<double>& edges, const SpectralConfig& cfg,
                        const char* what) {
  const double bin_hz = cfg.bin_hz();
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] - edges[i - 1] < bin_hz) {
      char msg[256];
      std::snprintf(msg, sizeof(msg),
                    "%s filterbank: fft_size %d too coarse, adjacent filter points %.4f Hz "
                    "apart are closer than the %.4f Hz bin spacing",
                    what, cfg.fft_size, edges[i] - edges[i - 1], bin_hz);
      throw ConfigError(msg);
    }
  }
  const auto banks = static_cast<std::int64_t>(edges.size()) - 2;
  const int bins = cfg.n_bins();
  auto fb = torch::zeros({banks, bins}, torch::kDouble);
  auto acc = fb.accessor<double, 2>();
  for (std::int64_t k = 0; k < banks; ++k) {
    const double lo = edges[k], c = edges[k + 1], hi = edges[k + 2];
    for (int j = 0; j < bins; ++j) {
      const double f = j * bin_hz;
      const double w = std::min((f - lo) / (c - lo), (hi - f) / (hi - c));
      acc[k][j] = w > 0.0 ? w : 0.0;
    }
  }
  return fb.to(torch::kFloat);
}

torch::Tensor stat_tensor(const std::vector<double>& v, const torch::Tensor& like) {
  auto t = torch::tensor(v, torch::kDouble).to(like.scalar_type());
  return t.view({static_cast<std::int64_t>(v.size()), 1});
}

}  // namespace

double hz_to_mel(double hz) {
  if (!(hz >= 0.0)) throw DomainError("hz_to_mel: frequency must be non-negative");
  if (hz <= kMinLogHz) return 3.0 * hz / 200.0;
  return kMinLogMel + std::log(hz / kMinLogHz) / kLogStep;
}

double mel_to_hz(double mel) {
  if (!(mel >= 0.0)) throw DomainError("mel_to_hz: mel value must be non-negative");
  if (mel <= kMinLogMel) return 200.0 * mel / 3.0;
  return kMinLogHz * std::exp(kLogStep * (mel - kMinLogMel));
}

double linear_hop(double mel_f_max, int n_mel) {
  if (!(mel_f_max > 0.0)) throw DomainError("linear_hop: mel_f_max must be positive");
  if (n_mel < 1) throw DomainError("linear_hop: n_mel must be at least 1");
  return mel_to_hz(hz_to_mel(mel_f_max) / (n_mel + 1));
}

int SpectralConfig::n_linear() const {
  return static_cast<int>(std::floor(nyquist() / delta_f()));
}

double SpectralConfig::loudness_floor() const { return std::log(amplitude_floor); }

void SpectralConfig::validate() const {
  if (sample_rate <= 0 || frames_per_second <= 0)
    throw ConfigError("sample_rate and frames_per_second must be positive");
  if (sample_rate % frames_per_second != 0)
    throw ConfigError("sample_rate must be an exact multiple of frames_per_second");
  if (fft_size <= 0 || fft_size % 2 != 0) throw ConfigError("fft_size must be positive and even");
  if (window_size <= 0 || window_size > fft_size)
    throw ConfigError("window_size must be in (0, fft_size]");
  if (hop() >= window_size) throw ConfigError("hop must be shorter than window_size");
  if (n_mel < 1) throw ConfigError("n_mel must be at least 1");
  if (!(mel_f_max > 0.0) || mel_f_max > nyquist())
    throw ConfigError("mel_f_max must lie in (0, sample_rate / 2]");
  if (!(amplitude_floor > 0.0)) throw ConfigError("amplitude_floor must be positive");
  if (!(delta_f() > 0.0) || n_linear() < 1) throw ConfigError("degenerate linear filterbank");
  check_stats(norm.linear_mean, norm.linear_std, n_linear(), "linear");
  check_stats(norm.mel_mean, norm.mel_std, n_mel, "mel");
}

Fingerprint SpectralConfig::fingerprint() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "sr=%d;fps=%d;fft=%d;win=%d;nmel=%d;fmax=%.17g;floor=%.17g",
                sample_rate, frames_per_second, fft_size, window_size, n_mel, mel_f_max,
                amplitude_floor);
  return fingerprint_of(buf);
}

const char* to_string(FeatureKind kind) { return kind == FeatureKind::mel ? "mel" : "linear"; }

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "mel") return FeatureKind::mel;
  if (name == "linear") return FeatureKind::linear;
  throw UsageError("unknown feature kind '" + name + "'");
}

std::int64_t frame_count(std::int64_t n_samples, int hop) {
  if (n_samples <= 0) throw ShapeError("waveform length must be positive");
  return (n_samples + hop - 1) / hop;
}

torch::Tensor analysis_window(const StftParams& p, torch::ScalarType dtype) {
  auto w = torch::hann_window(p.window_size, torch::TensorOptions().dtype(dtype));
  if (p.window_size == p.fft_size) return w;
  const int left = (p.fft_size - p.window_size) / 2;
  return torch::constant_pad_nd(w, {left, p.fft_size - p.window_size - left});
}

torch::Tensor stft(const torch::Tensor& samples, const StftParams& p) {
  const auto n = samples.size(-1);
  const auto frames = frame_count(n, p.hop);
  auto lead = samples.sizes().vec();
  lead.pop_back();
  auto flat = samples.reshape({-1, n});
  const auto half = p.fft_size / 2;
  flat = torch::constant_pad_nd(flat, {half, frames * p.hop - n + half});
  auto window = analysis_window(p, samples.scalar_type()).to(samples.device());
  auto spec = torch::stft(flat, p.fft_size, p.hop, p.fft_size, window, /*normalized=*/false,
                          /*onesided=*/true, /*return_complex=*/true);
  spec = spec.narrow(-1, 0, frames);
  lead.push_back(spec.size(-2));
  lead.push_back(frames);
  return spec.reshape(lead);
}

torch::Tensor istft(const torch::Tensor& spec, const StftParams& p) {
  if (2 * p.hop > p.fft_size) throw ConfigError("istft requires hop <= fft_size / 2");
  const auto bins = spec.size(-2);
  const auto frames = spec.size(-1);
  if (bins != p.fft_size / 2 + 1) throw ShapeError("istft: bin count does not match fft_size");
  auto lead = spec.sizes().vec();
  lead.resize(lead.size() - 2);
  auto flat = spec.reshape({-1, bins, frames});
  auto frames_td = torch::fft::irfft(flat, p.fft_size, /*dim=*/1);
  auto window = analysis_window(p, frames_td.scalar_type()).to(spec.device());
  frames_td = frames_td * window.view({1, -1, 1});

  namespace F = torch::nn::functional;
  const std::int64_t span = (frames - 1) * p.hop + p.fft_size;
  auto fold = F::FoldFuncOptions({1, span}, {1, p.fft_size}).stride({1, p.hop});
  auto out = F::fold(frames_td, fold).view({flat.size(0), span});
  auto env =
      F::fold((window * window).view({1, -1, 1}).expand({1, p.fft_size, frames}).contiguous(), fold)
          .view({span});
  out = out / env.clamp_min(1e-11);
  out = out.narrow(-1, p.fft_size / 2, frames * p.hop);
  lead.push_back(frames * p.hop);
  return out.reshape(lead);
}

ComplexSpec stft(const WaveformClip& clip, const SpectralConfig& cfg) {
  return {stft(clip.samples, StftParams::from(cfg))};
}

WaveformClip istft(const ComplexSpec& spec, const SpectralConfig& cfg) {
  return {istft(spec.values, StftParams::from(cfg)), cfg.sample_rate};
}

std::vector<double> mel_centers(const SpectralConfig& cfg) {
  const double top = hz_to_mel(cfg.mel_f_max);
  std::vector<double> c(cfg.n_mel);
  for (int k = 0; k < cfg.n_mel; ++k) c[k] = mel_to_hz((k + 1) * top / (cfg.n_mel + 1));
  return c;
}

std::vector<double> linear_centers(const SpectralConfig& cfg) {
  const double df = cfg.delta_f();
  std::vector<double> c(cfg.n_linear());
  for (int k = 0; k < cfg.n_linear(); ++k) c[k] = (k + 1) * df;
  return c;
}

torch::Tensor build_mel_filterbank(const SpectralConfig& cfg) {
  cfg.validate();
  const double top = hz_to_mel(cfg.mel_f_max);
  std::vector<double> edges(cfg.n_mel + 2);
  for (int k = 0; k < cfg.n_mel + 2; ++k) edges[k] = mel_to_hz(k * top / (cfg.n_mel + 1));
  return triangles(edges, cfg, "mel");
}

torch::Tensor build_linear_filterbank(const SpectralConfig& cfg) {
  cfg.validate();
  const double df = cfg.delta_f();
  std::vector<double> edges(cfg.n_linear() + 2);
  for (int k = 0; k < cfg.n_linear() + 2; ++k) edges[k] = k * df;
  return triangles(edges, cfg, "linear");
}

FeatureExtractor::FeatureExtractor(SpectralConfig cfg)
    : cfg_(std::move(cfg)),
      mel_fb_(build_mel_filterbank(cfg_)),
      linear_fb_(build_linear_filterbank(cfg_)) {}

torch::Tensor FeatureExtractor::pooled(const torch::Tensor& samples,
                                       const torch::Tensor& bank) const {
  auto mag = stft(samples, StftParams::from(cfg_)).abs();
  auto fb = bank.to(mag.scalar_type());
  return torch::matmul(fb, mag).clamp_min(cfg_.amplitude_floor).log();
}

torch::Tensor FeatureExtractor::log_mel(const torch::Tensor& samples) const {
  return pooled(samples, mel_fb_);
}

torch::Tensor FeatureExtractor::log_linear(const torch::Tensor& samples) const {
  return pooled(samples, linear_fb_);
}

torch::Tensor FeatureExtractor::log_magnitude(const torch::Tensor& samples) const {
  return stft(samples, StftParams::from(cfg_)).abs().clamp_min(cfg_.amplitude_floor).log();
}

MelSpec FeatureExtractor::mel(const WaveformClip& clip) const {
  return {log_mel(clip.samples), false};
}

LinearSpec FeatureExtractor::linear(const WaveformClip& clip) const {
  return {log_linear(clip.samples), false};
}

MelSpec mel_spectrogram(const WaveformClip& clip, const SpectralConfig& cfg) {
  return FeatureExtractor(cfg).mel(clip);
}

LinearSpec linear_spectrogram(const WaveformClip& clip, const SpectralConfig& cfg) {
  return FeatureExtractor(cfg).linear(clip);
}

torch::Tensor normalize(const torch::Tensor& values, FeatureKind kind, const SpectralConfig& cfg) {
  const auto& mean = kind == FeatureKind::mel ? cfg.norm.mel_mean : cfg.norm.linear_mean;
  const auto& stdev = kind == FeatureKind::mel ? cfg.norm.mel_std : cfg.norm.linear_std;
  check_stats(mean, stdev, kind == FeatureKind::mel ? cfg.n_mel : cfg.n_linear(),
              to_string(kind));
  return (values.clamp_min(cfg.loudness_floor()) - stat_tensor(mean, values)) /
         stat_tensor(stdev, values);
}

torch::Tensor denormalize(const torch::Tensor& values, FeatureKind kind,
                          const SpectralConfig& cfg) {
  const auto& mean = kind == FeatureKind::mel ? cfg.norm.mel_mean : cfg.norm.linear_mean;
  const auto& stdev = kind == FeatureKind::mel ? cfg.norm.mel_std : cfg.norm.linear_std;
  check_stats(mean, stdev, kind == FeatureKind::mel ? cfg.n_mel : cfg.n_linear(),
              to_string(kind));
  return values * stat_tensor(stdev, values) + stat_tensor(mean, values);
}

torch::Tensor normalized_floor(FeatureKind kind, const SpectralConfig& cfg) {
  auto floor = torch::full({1, 1}, cfg.loudness_floor(), torch::kFloat);
  return normalize(floor, kind, cfg).view({-1});
}

}  // namespace lsevoc::spectral
