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

// Vocoders and their adversarial training losses.
//
// Vocos2D treats the linear spectrogram as a 2D (frequency x time) plane: a
// per-frame projection is broadcast over a coarse frequency grid and
// distinguished by learned frequency embeddings, then refined by ConvNeXt
// blocks whose inverted bottleneck also receives a per-block projection of
// the raw input spectrogram. A transposed 2D convolution restores the full
// STFT bin count and an iSTFT head produces the waveform.
//
// The baseline 1D Vocos generator treats frequencies as channels.

#pragma once

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <vector>

#include "lsevoc/spectral.hpp"

namespace lsevoc::vocos {

struct Vocos2DConfig {
  int n_blocks = 24;
  int hidden = 256;
  std::array<int, 2> depthwise_kernel{7, 7};  // (time, freq)
  int bottleneck_expand = 3;
  int out_bins = 1025;
  int freq_grid = 37;
  int input_bins = 592;
  // Initial value of the per-channel output gate gamma; 0 makes every block
  // the identity.
  double layer_scale_init = -1.0;  // negative: 1 / n_blocks

  int group_size() const { return input_bins / freq_grid; }
  void validate() const;
};

struct BaselineVocosConfig {
  int n_blocks = 10;
  int hidden = 512;
  int input_bins = 80;
  int bottleneck_expand = 3;
  int kernel = 7;
  int out_bins = 1025;
  double layer_scale_init = -1.0;

  void validate() const;
};

// exp(m) * (cos phi + i sin phi), with exp(m) clipped at 100.
torch::Tensor combine_head(const torch::Tensor& log_mag, const torch::Tensor& phase);

class ConvNeXtBlock2DImpl : public torch::nn::Module {
 public:
  ConvNeXtBlock2DImpl(const Vocos2DConfig& cfg);
  // x [B, hidden, freq_grid, T]; shortcut [B, freq_grid, T, group_size] or
  // undefined to skip the shortcut path.
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& shortcut);

  torch::nn::Conv2d dwconv{nullptr};
  torch::nn::LayerNorm norm{nullptr};
  torch::nn::Linear pw_expand{nullptr}, pw_contract{nullptr};
  torch::nn::Linear shortcut_proj{nullptr};
  torch::Tensor gamma;  // [hidden]
};
TORCH_MODULE(ConvNeXtBlock2D);

class Vocos2DImpl : public torch::nn::Module {
 public:
  Vocos2DImpl(Vocos2DConfig cfg, spectral::SpectralConfig spec);

  // Un-normalized log linear spectrogram [B, input_bins, T] -> [B, T * hop].
  torch::Tensor forward(const torch::Tensor& x_in);
  // Head outputs (log magnitude, phase), each [B, out_bins, T].
  std::pair<torch::Tensor, torch::Tensor> head(const torch::Tensor& x_in);
  // Backbone input x' [B, hidden, freq_grid, T].
  torch::Tensor embed(const torch::Tensor& x_in);
  torch::Tensor backbone(const torch::Tensor& x, const torch::Tensor& x_in);
  // X_in regrouped per frequency-grid cell: [B, freq_grid, T, group_size].
  torch::Tensor shortcut_input(const torch::Tensor& x_in) const;
  std::int64_t parameter_count() const;

  spectral::WaveformClip synthesize(const spectral::LinearSpec& spec);

  const Vocos2DConfig& config() const { return cfg_; }

  torch::nn::Linear in_proj{nullptr};
  torch::Tensor freq_embed;  // [hidden, freq_grid]
  torch::nn::LayerNorm in_norm{nullptr}, out_norm{nullptr};
  torch::nn::ModuleList blocks{nullptr};
  torch::nn::ConvTranspose2d upsample{nullptr};

 private:
  Vocos2DConfig cfg_;
  spectral::SpectralConfig spec_;
};
TORCH_MODULE(Vocos2D);

class ConvNeXtBlock1DImpl : public torch::nn::Module {
 public:
  ConvNeXtBlock1DImpl(int hidden, int expand, int kernel, double layer_scale);
  torch::Tensor forward(const torch::Tensor& x);  // [B, hidden, T]

  torch::nn::Conv1d dwconv{nullptr};
  torch::nn::LayerNorm norm{nullptr};
  torch::nn::Linear pw_expand{nullptr}, pw_contract{nullptr};
  torch::Tensor gamma;
};
TORCH_MODULE(ConvNeXtBlock1D);

class BaselineVocosImpl : public torch::nn::Module {
 public:
  BaselineVocosImpl(BaselineVocosConfig cfg, spectral::SpectralConfig spec);

  // Log mel [B, input_bins, T] -> [B, T * hop].
  torch::Tensor forward(const torch::Tensor& mel);
  std::pair<torch::Tensor, torch::Tensor> head(const torch::Tensor& mel);
  spectral::WaveformClip synthesize(const spectral::MelSpec& mel);
  std::int64_t parameter_count() const;

  const BaselineVocosConfig& config() const { return cfg_; }

  torch::nn::Conv1d embed{nullptr};
  torch::nn::LayerNorm in_norm{nullptr}, out_norm{nullptr};
  torch::nn::ModuleList blocks{nullptr};
  torch::nn::Linear out_proj{nullptr};

 private:
  BaselineVocosConfig cfg_;
  spectral::SpectralConfig spec_;
};
TORCH_MODULE(BaselineVocos);

// ---------------------------------------------------------------------------
// Discriminator augmentation

struct DAConfig {
  double loudness_range_db = 6.0;
  int max_shift = 882;
  bool enabled = true;
  void validate() const;
};

// One augmentation draw; applied identically to a real/fake pair.
struct DADraw {
  double gain_db = 0.0;
  std::int64_t shift = 0;
  double theta = 0.0;
};

std::vector<DADraw> draw_augmentations(const DAConfig& cfg, std::int64_t batch,
                                       at::Generator& gen);

// gain -> circular shift -> constant phase rotation, each differentiable in w.
torch::Tensor apply_gain(const torch::Tensor& w, double gain_db);
torch::Tensor apply_shift(const torch::Tensor& w, std::int64_t shift);
// Positive-frequency bins times e^{i theta} (negative bins conjugate).
// DC and Nyquist take the real unit nearest e^{i theta}.
torch::Tensor apply_phase_rotation(const torch::Tensor& w, double theta);
torch::Tensor da_transform(const torch::Tensor& w, const DADraw& draw);
// Batched: w [B, n], one draw per item.
torch::Tensor da_transform(const torch::Tensor& w, const std::vector<DADraw>& draws);

// ---------------------------------------------------------------------------
// Multi-resolution discriminator

struct Resolution {
  int fft_size;
  int hop;
  int window;
};

struct DiscriminatorConfig {
  std::vector<Resolution> resolutions{{2048, 512, 2048}, {1024, 256, 1024}, {512, 128, 512}};
  std::vector<double> weights{1.0, 1.0, 1.0};  // per resolution, applied to every loss term
  int channels = 32;
  void validate() const;
};

struct DiscriminatorOutput {
  std::vector<torch::Tensor> logits;                 // one per resolution
  std::vector<std::vector<torch::Tensor>> features;  // per resolution, per conv stage
};

class ResolutionDiscriminatorImpl : public torch::nn::Module {
 public:
  ResolutionDiscriminatorImpl(Resolution res, int channels);
  std::pair<torch::Tensor, std::vector<torch::Tensor>> forward(const torch::Tensor& w);

  static constexpr int kStages = 5;
  torch::nn::ModuleList convs{nullptr};
  torch::nn::Conv2d post{nullptr};

 private:
  Resolution res_;
};
TORCH_MODULE(ResolutionDiscriminator);

// Spectrogram-magnitude discriminators only; there is no period-based family.
class MultiResolutionDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit MultiResolutionDiscriminatorImpl(DiscriminatorConfig cfg);
  DiscriminatorOutput forward(const torch::Tensor& w);  // w [B, n]
  std::size_t resolution_count() const { return cfg_.resolutions.size(); }
  const DiscriminatorConfig& config() const { return cfg_; }

  torch::nn::ModuleList discriminators{nullptr};

 private:
  DiscriminatorConfig cfg_;
};
TORCH_MODULE(MultiResolutionDiscriminator);

// ---------------------------------------------------------------------------
// Losses

struct LossWeights {
  double adversarial = 1.0;
  double feature_matching = 1.0;
  double spectral = 45.0;
};

struct GanLossReport {
  torch::Tensor adversarial;
  torch::Tensor feature_matching;
  torch::Tensor spectral_l1;
  torch::Tensor total;
  torch::Tensor discriminator_loss;
};

// mean(relu(1 - D(real))) + mean(relu(1 + D(fake))), summed over resolutions.
// Per-resolution weights default to 1 when `weights` is empty.
torch::Tensor discriminator_hinge(const std::vector<torch::Tensor>& real_logits,
                                  const std::vector<torch::Tensor>& fake_logits,
                                  const std::vector<double>& weights = {});
// sum over resolutions of mean(-D(fake)).
torch::Tensor generator_adversarial(const std::vector<torch::Tensor>& fake_logits,
                                    const std::vector<double>& weights = {});
// sum over resolutions of the mean L1 across stages.
torch::Tensor feature_matching(const std::vector<std::vector<torch::Tensor>>& real,
                               const std::vector<std::vector<torch::Tensor>>& fake,
                               const std::vector<double>& weights = {});
// Mean absolute difference of log mel spectrograms.
torch::Tensor mel_l1(const spectral::FeatureExtractor& fx, const torch::Tensor& real,
                     const torch::Tensor& fake);

// Full report from one augmentation draw. Discriminator terms use detached
// fakes; generator terms propagate through DA into the generator output.
torch::Tensor discriminator_loss(MultiResolutionDiscriminator& disc, const torch::Tensor& real,
                                 const torch::Tensor& fake, const std::vector<DADraw>& draws);
// Weighted generator objective; fills every field except discriminator_loss.
GanLossReport generator_losses(MultiResolutionDiscriminator& disc,
                               const spectral::FeatureExtractor& fx, const torch::Tensor& real,
                               const torch::Tensor& fake, const std::vector<DADraw>& draws,
                               const LossWeights& weights);
GanLossReport gan_losses(MultiResolutionDiscriminator& disc, const spectral::FeatureExtractor& fx,
                         const torch::Tensor& real, const torch::Tensor& fake,
                         const std::vector<DADraw>& draws, const LossWeights& weights);

}  // namespace lsevoc::vocos
