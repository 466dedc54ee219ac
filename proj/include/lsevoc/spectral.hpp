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

// Spectral front-end: Slaney mel scale, mel and linear triangular
// filterbanks, center-padded STFT/iSTFT and log-filterbank features with
// floor-clipped standardization.
//
// Frames are centered at t * hop for t = 0..T-1 with T = ceil(n / hop), so a
// clip of n samples yields the same T for every feature kind and the inverse
// transform returns exactly T * hop samples.

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <vector>

#include "lsevoc/hash.hpp"

namespace lsevoc::spectral {

// Slaney mel scale: linear (3f/200) below 1 kHz, logarithmic above.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Spacing of the linear filterbank: the width of the first mel band,
// mel_to_hz(hz_to_mel(mel_f_max) / (n_mel + 1)).
double linear_hop(double mel_f_max, int n_mel);

// Standardization statistics. A single entry means global scalars; a vector
// with one entry per bank means per-bin statistics.
struct NormStats {
  std::vector<double> linear_mean{0.0};
  std::vector<double> linear_std{1.0};
  std::vector<double> mel_mean{0.0};
  std::vector<double> mel_std{1.0};
};

struct SpectralConfig {
  int sample_rate = 44100;
  int frames_per_second = 50;
  int fft_size = 2048;
  int window_size = 2048;
  int n_mel = 80;
  double mel_f_max = 8000.0;
  double amplitude_floor = 1e-5;
  bool per_bin_norm = false;
  NormStats norm;

  int hop() const { return sample_rate / frames_per_second; }
  int n_bins() const { return fft_size / 2 + 1; }
  double nyquist() const { return 0.5 * sample_rate; }
  double bin_hz() const { return static_cast<double>(sample_rate) / fft_size; }
  double delta_f() const { return linear_hop(mel_f_max, n_mel); }
  int n_linear() const;
  double loudness_floor() const;

  // Throws ConfigError on any violated invariant.
  void validate() const;

  // Identity of everything that shapes un-normalized features. Statistics are
  // excluded: caches hold raw log features.
  Fingerprint fingerprint() const;
};

struct StftParams {
  int fft_size = 2048;
  int hop = 882;
  int window_size = 2048;

  static StftParams from(const SpectralConfig& cfg) {
    return {cfg.fft_size, cfg.hop(), cfg.window_size};
  }
};

struct WaveformClip {
  torch::Tensor samples;  // float32 [n]
  int sample_rate = 44100;

  std::int64_t size() const { return samples.defined() ? samples.size(-1) : 0; }
  double duration() const { return static_cast<double>(size()) / sample_rate; }
};

enum class FeatureKind { mel, linear };

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

// Log filterbank spectrogram [banks x T].
template <FeatureKind Kind>
struct LogSpec {
  static constexpr FeatureKind kind = Kind;
  torch::Tensor values;
  bool normalized = false;

  std::int64_t banks() const { return values.size(-2); }
  std::int64_t frames() const { return values.size(-1); }
};

using MelSpec = LogSpec<FeatureKind::mel>;
using LinearSpec = LogSpec<FeatureKind::linear>;

struct ComplexSpec {
  torch::Tensor values;  // complex64 [bins x T]
  std::int64_t frames() const { return values.size(-1); }
};

std::int64_t frame_count(std::int64_t n_samples, int hop);

// Hann window (periodic) of window_size, zero-padded to fft_size.
torch::Tensor analysis_window(const StftParams& p, torch::ScalarType dtype = torch::kFloat);

// Differentiable STFT over the last dimension: [..., n] -> complex
// [..., fft/2+1, ceil(n/hop)].
torch::Tensor stft(const torch::Tensor& samples, const StftParams& p);
// Weighted overlap-add inverse: complex [..., bins, T] -> [..., T*hop].
torch::Tensor istft(const torch::Tensor& spec, const StftParams& p);

ComplexSpec stft(const WaveformClip& clip, const SpectralConfig& cfg);
WaveformClip istft(const ComplexSpec& spec, const SpectralConfig& cfg);

// Triangular unit-peak filterbanks evaluated on the FFT bin grid, float32.
torch::Tensor build_mel_filterbank(const SpectralConfig& cfg);
torch::Tensor build_linear_filterbank(const SpectralConfig& cfg);
// Center frequencies in Hz, in row order.
std::vector<double> mel_centers(const SpectralConfig& cfg);
std::vector<double> linear_centers(const SpectralConfig& cfg);

// Holds both filterbanks so repeated extraction does not rebuild them.
// Batched tensor entry points are differentiable with respect to samples.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(SpectralConfig cfg);

  const SpectralConfig& config() const { return cfg_; }
  const torch::Tensor& mel_bank() const { return mel_fb_; }
  const torch::Tensor& linear_bank() const { return linear_fb_; }

  MelSpec mel(const WaveformClip& clip) const;
  LinearSpec linear(const WaveformClip& clip) const;

  // [..., n] -> [..., banks, T]; un-normalized log features.
  torch::Tensor log_mel(const torch::Tensor& samples) const;
  torch::Tensor log_linear(const torch::Tensor& samples) const;
  // log(max(|STFT|, floor)) at full resolution, [..., bins, T].
  torch::Tensor log_magnitude(const torch::Tensor& samples) const;

 private:
  torch::Tensor pooled(const torch::Tensor& samples, const torch::Tensor& bank) const;

  SpectralConfig cfg_;
  torch::Tensor mel_fb_;
  torch::Tensor linear_fb_;
};

MelSpec mel_spectrogram(const WaveformClip& clip, const SpectralConfig& cfg);
LinearSpec linear_spectrogram(const WaveformClip& clip, const SpectralConfig& cfg);

// (max(x, floor) - mean) / std over the bank axis (dim -2).
torch::Tensor normalize(const torch::Tensor& values, FeatureKind kind, const SpectralConfig& cfg);
torch::Tensor denormalize(const torch::Tensor& values, FeatureKind kind,
                          const SpectralConfig& cfg);
// The normalized image of the loudness floor, per bank ([banks] or [1]).
torch::Tensor normalized_floor(FeatureKind kind, const SpectralConfig& cfg);

template <FeatureKind K>
LogSpec<K> normalize(const LogSpec<K>& spec, const SpectralConfig& cfg) {
  if (spec.normalized) return spec;
  return {normalize(spec.values, K, cfg), true};
}

template <FeatureKind K>
LogSpec<K> denormalize(const LogSpec<K>& spec, const SpectralConfig& cfg) {
  if (!spec.normalized) return spec;
  return {denormalize(spec.values, K, cfg), false};
}

}  // namespace lsevoc::spectral
