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

#include <algorithm>
#include "lsevoc/vocos.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lsevoc/error.hpp"

namespace lsevoc::vocos {

namespace nn = torch::nn;

namespace {

double resolve_layer_scale(double init, int n_blocks) {
  return init < 0.0 ? 1.0 / n_blocks : init;
}

std::int64_t count_parameters(const nn::Module& m) {
  std::int64_t n = 0;
  for (const auto& p : m.parameters()) n += p.numel();
  return n;
}

torch::Tensor check_input(const torch::Tensor& x, std::int64_t bins, const char* who) {
  if (x.dim() != 2 && x.dim() != 3) {
    throw ShapeError(std::string(who) + ": expected [bins, T] or [B, bins, T]");
  }
  if (x.size(-2) != bins) {
    throw ShapeError(std::string(who) + ": expected " + std::to_string(bins) + " input bins, got " +
                     std::to_string(x.size(-2)));
  }
  if (x.size(-1) < 1) throw ShapeError(std::string(who) + ": empty input");
  return x.dim() == 2 ? x.unsqueeze(0) : x;
}

}  // namespace

void Vocos2DConfig::validate() const {
  if (n_blocks < 1) throw ConfigError("vocos2d.n_blocks must be >= 1");
  if (hidden < 1) throw ConfigError("vocos2d.hidden must be >= 1");
  if (bottleneck_expand < 1) throw ConfigError("vocos2d.bottleneck_expand must be >= 1");
  for (int k : depthwise_kernel) {
    if (k < 1 || k % 2 == 0) throw ConfigError("vocos2d.depthwise_kernel extents must be odd");
  }
  if (freq_grid < 2) throw ConfigError("vocos2d.freq_grid must be >= 2");
  if (input_bins % freq_grid != 0) {
    throw ConfigError("vocos2d.input_bins must be a multiple of freq_grid");
  }
  const int stride = (out_bins - 1) / freq_grid;
  if (stride < 1 || out_bins - (freq_grid - 1) * stride < stride) {
    throw ConfigError("vocos2d.freq_grid is incompatible with out_bins");
  }
}

void BaselineVocosConfig::validate() const {
  if (n_blocks < 1) throw ConfigError("vocos_baseline.n_blocks must be >= 1");
  if (hidden < 1) throw ConfigError("vocos_baseline.hidden must be >= 1");
  if (bottleneck_expand < 1) throw ConfigError("vocos_baseline.bottleneck_expand must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("vocos_baseline.kernel must be odd");
  if (input_bins < 1) throw ConfigError("vocos_baseline.input_bins must be >= 1");
}

torch::Tensor combine_head(const torch::Tensor& log_mag, const torch::Tensor& phase) {
  auto mag = torch::clamp_max(torch::exp(log_mag), 100.0);
  return torch::complex(mag * torch::cos(phase), mag * torch::sin(phase));
}

// ---------------------------------------------------------------------------
// Vocos2D

ConvNeXtBlock2DImpl::ConvNeXtBlock2DImpl(const Vocos2DConfig& cfg) {
  const int h = cfg.hidden;
  const int wide = cfg.bottleneck_expand * h;
  const auto kt = cfg.depthwise_kernel[0];
  const auto kf = cfg.depthwise_kernel[1];
  dwconv = register_module("dwconv", nn::Conv2d(nn::Conv2dOptions(h, h, {kf, kt})
                                                    .padding({kf / 2, kt / 2})
                                                    .groups(h)));
  norm = register_module("norm", nn::LayerNorm(nn::LayerNormOptions({h}).eps(1e-6)));
  pw_expand = register_module("pw_expand", nn::Linear(h, wide));
  shortcut_proj = register_module("shortcut_proj", nn::Linear(cfg.group_size(), wide));
  pw_contract = register_module("pw_contract", nn::Linear(wide, h));
  gamma = register_parameter(
      "gamma", torch::full({h}, resolve_layer_scale(cfg.layer_scale_init, cfg.n_blocks)));
}

torch::Tensor ConvNeXtBlock2DImpl::forward(const torch::Tensor& x, const torch::Tensor& shortcut) {
  auto h = dwconv(x).permute({0, 2, 3, 1});  // [B, F, T, H]
  h = pw_expand(norm(h));
  if (shortcut.defined()) h = h + shortcut_proj(shortcut);
  h = pw_contract(torch::gelu(h)) * gamma;
  return x + h.permute({0, 3, 1, 2});
}

Vocos2DImpl::Vocos2DImpl(Vocos2DConfig cfg, spectral::SpectralConfig spec)
    : cfg_(std::move(cfg)), spec_(std::move(spec)) {
  cfg_.validate();
  spec_.validate();
  if (cfg_.out_bins != spec_.n_bins()) {
    throw ConfigError("vocos2d.out_bins must equal fft_size / 2 + 1");
  }
  const int h = cfg_.hidden;
  in_proj = register_module("in_proj", nn::Linear(cfg_.input_bins, h));
  freq_embed = register_parameter("freq_embed", torch::randn({h, cfg_.freq_grid}) * 0.02);
  in_norm = register_module("in_norm", nn::LayerNorm(nn::LayerNormOptions({h}).eps(1e-6)));
  blocks = register_module("blocks", nn::ModuleList());
  for (int i = 0; i < cfg_.n_blocks; ++i) blocks->push_back(ConvNeXtBlock2D(cfg_));
  out_norm = register_module("out_norm", nn::LayerNorm(nn::LayerNormOptions({h}).eps(1e-6)));
  const int stride = (cfg_.out_bins - 1) / cfg_.freq_grid;
  const int kernel = cfg_.out_bins - (cfg_.freq_grid - 1) * stride;
  upsample = register_module(
      "upsample",
      nn::ConvTranspose2d(nn::ConvTranspose2dOptions(h, 2, {kernel, 1}).stride({stride, 1})));
}

torch::Tensor Vocos2DImpl::embed(const torch::Tensor& x_in) {
  auto x = check_input(x_in, cfg_.input_bins, "vocos2d");
  auto frame = in_proj(x.transpose(1, 2));                              // [B, T, H]
  auto plane = frame.unsqueeze(1) + freq_embed.t().unsqueeze(1);        // [B, F, T, H]
  return in_norm(plane).permute({0, 3, 1, 2});                          // [B, H, F, T]
}

torch::Tensor Vocos2DImpl::shortcut_input(const torch::Tensor& x_in) const {
  auto x = check_input(x_in, cfg_.input_bins, "vocos2d");
  const auto b = x.size(0), t = x.size(2);
  return x.reshape({b, cfg_.freq_grid, cfg_.group_size(), t}).permute({0, 1, 3, 2});
}

torch::Tensor Vocos2DImpl::backbone(const torch::Tensor& x, const torch::Tensor& x_in) {
  auto shortcut = x_in.defined() ? shortcut_input(x_in) : torch::Tensor();
  auto y = x;
  for (const auto& m : *blocks) y = m->as<ConvNeXtBlock2DImpl>()->forward(y, shortcut);
  return y;
}

std::pair<torch::Tensor, torch::Tensor> Vocos2DImpl::head(const torch::Tensor& x_in) {
  auto x = check_input(x_in, cfg_.input_bins, "vocos2d");
  auto y = backbone(embed(x), x);
  y = out_norm(y.permute({0, 2, 3, 1})).permute({0, 3, 1, 2});
  auto out = upsample(y);  // [B, 2, out_bins, T]
  return {out.select(1, 0), out.select(1, 1)};
}

torch::Tensor Vocos2DImpl::forward(const torch::Tensor& x_in) {
  auto [m, phi] = head(x_in);
  auto w = spectral::istft(combine_head(m, phi), spectral::StftParams::from(spec_));
  return x_in.dim() == 2 ? w.squeeze(0) : w;
}

spectral::WaveformClip Vocos2DImpl::synthesize(const spectral::LinearSpec& spec) {
  torch::NoGradGuard g;
  auto x = spectral::denormalize(spec, spec_).values;
  return {forward(x.to(torch::kFloat)), spec_.sample_rate};
}

std::int64_t Vocos2DImpl::parameter_count() const { return count_parameters(*this); }

// ---------------------------------------------------------------------------
// Baseline Vocos

ConvNeXtBlock1DImpl::ConvNeXtBlock1DImpl(int hidden, int expand, int kernel, double layer_scale) {
  dwconv = register_module(
      "dwconv", nn::Conv1d(nn::Conv1dOptions(hidden, hidden, kernel).padding(kernel / 2).groups(hidden)));
  norm = register_module("norm", nn::LayerNorm(nn::LayerNormOptions({hidden}).eps(1e-6)));
  pw_expand = register_module("pw_expand", nn::Linear(hidden, expand * hidden));
  pw_contract = register_module("pw_contract", nn::Linear(expand * hidden, hidden));
  gamma = register_parameter("gamma", torch::full({hidden}, layer_scale));
}

torch::Tensor ConvNeXtBlock1DImpl::forward(const torch::Tensor& x) {
  auto h = dwconv(x).transpose(1, 2);
  h = pw_contract(torch::gelu(pw_expand(norm(h)))) * gamma;
  return x + h.transpose(1, 2);
}

BaselineVocosImpl::BaselineVocosImpl(BaselineVocosConfig cfg, spectral::SpectralConfig spec)
    : cfg_(std::move(cfg)), spec_(std::move(spec)) {
  cfg_.validate();
  spec_.validate();
  if (cfg_.out_bins != spec_.n_bins()) {
    throw ConfigError("vocos_baseline.out_bins must equal fft_size / 2 + 1");
  }
  const int h = cfg_.hidden;
  embed = register_module(
      "embed", nn::Conv1d(nn::Conv1dOptions(cfg_.input_bins, h, cfg_.kernel).padding(cfg_.kernel / 2)));
  in_norm = register_module("in_norm", nn::LayerNorm(nn::LayerNormOptions({h}).eps(1e-6)));
  blocks = register_module("blocks", nn::ModuleList());
  const double ls = resolve_layer_scale(cfg_.layer_scale_init, cfg_.n_blocks);
  for (int i = 0; i < cfg_.n_blocks; ++i) {
    blocks->push_back(ConvNeXtBlock1D(h, cfg_.bottleneck_expand, cfg_.kernel, ls));
  }
  out_norm = register_module("out_norm", nn::LayerNorm(nn::LayerNormOptions({h}).eps(1e-6)));
  out_proj = register_module("out_proj", nn::Linear(h, 2 * cfg_.out_bins));
}

std::pair<torch::Tensor, torch::Tensor> BaselineVocosImpl::head(const torch::Tensor& mel) {
  auto x = check_input(mel, cfg_.input_bins, "vocos_baseline");
  auto h = in_norm(embed(x).transpose(1, 2)).transpose(1, 2);
  for (const auto& m : *blocks) h = m->as<ConvNeXtBlock1DImpl>()->forward(h);
  auto out = out_proj(out_norm(h.transpose(1, 2))).transpose(1, 2);  // [B, 2K, T]
  auto parts = out.chunk(2, 1);
  return {parts[0], parts[1]};
}

torch::Tensor BaselineVocosImpl::forward(const torch::Tensor& mel) {
  auto [m, phi] = head(mel);
  auto w = spectral::istft(combine_head(m, phi), spectral::StftParams::from(spec_));
  return mel.dim() == 2 ? w.squeeze(0) : w;
}

spectral::WaveformClip BaselineVocosImpl::synthesize(const spectral::MelSpec& mel) {
  torch::NoGradGuard g;
  auto x = spectral::denormalize(mel, spec_).values;
  return {forward(x.to(torch::kFloat)), spec_.sample_rate};
}

std::int64_t BaselineVocosImpl::parameter_count() const { return count_parameters(*this); }

// ---------------------------------------------------------------------------
// Discriminator augmentation

void DAConfig::validate() const {
  if (!(loudness_range_db >= 0.0 && loudness_range_db <= 6.0)) {
    throw ConfigError("da.loudness_range_db must lie in [0, 6]");
  }
  if (max_shift < 0) throw ConfigError("da.max_shift must be >= 0");
}

std::vector<DADraw> draw_augmentations(const DAConfig& cfg, std::int64_t batch,
                                       at::Generator& gen) {
  cfg.validate();
  std::vector<DADraw> draws(static_cast<std::size_t>(batch));
  if (!cfg.enabled) return draws;
  auto u = torch::rand({batch, 3}, gen, torch::TensorOptions().dtype(torch::kDouble));
  auto acc = u.accessor<double, 2>();
  for (std::int64_t i = 0; i < batch; ++i) {
    auto& d = draws[static_cast<std::size_t>(i)];
    d.gain_db = (2.0 * acc[i][0] - 1.0) * cfg.loudness_range_db;
    d.shift = std::min<std::int64_t>(static_cast<std::int64_t>(acc[i][1] * (cfg.max_shift + 1)),
                                     cfg.max_shift);
    d.theta = acc[i][2] * 2.0 * std::numbers::pi;
  }
  return draws;
}

torch::Tensor apply_gain(const torch::Tensor& w, double gain_db) {
  return w * std::pow(10.0, gain_db / 20.0);
}

torch::Tensor apply_shift(const torch::Tensor& w, std::int64_t shift) {
  if (shift == 0) return w;
  return torch::roll(w, {shift}, {-1});
}

namespace {

// Complex multipliers [..., n/2+1] for a constant phase rotation.
torch::Tensor rotation_factors(const std::vector<double>& thetas, std::int64_t n,
                               torch::ScalarType real_type) {
  const auto bins = n / 2 + 1;
  auto re = torch::empty({static_cast<std::int64_t>(thetas.size()), bins},
                         torch::TensorOptions().dtype(torch::kDouble));
  auto im = torch::empty_like(re);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double c = std::cos(thetas[i]), s = std::sin(thetas[i]);
    const auto r = static_cast<std::int64_t>(i);
    re[r].fill_(c);
    im[r].fill_(s);
    const double edge = c < 0.0 ? -1.0 : 1.0;
    re[r][0] = edge;
    im[r][0] = 0.0;
    if (n % 2 == 0) {
      re[r][bins - 1] = edge;
      im[r][bins - 1] = 0.0;
    }
  }
  return torch::complex(re.to(real_type), im.to(real_type));
}

torch::Tensor rotate(const torch::Tensor& w, const torch::Tensor& factors) {
  const auto n = w.size(-1);
  auto spec = torch::fft::rfft(w, n, -1);
  return torch::fft::irfft(spec * factors.to(spec.device()), n, -1);
}

// +1 or -1 when e^{i theta} rounds to a real unit, else 0. Such rotations are
// applied as an exact sign flip instead of an FFT round trip.
double real_unit(double theta) {
  if (std::abs(std::sin(theta)) > 1e-12) return 0.0;
  return std::cos(theta) < 0.0 ? -1.0 : 1.0;
}

}  // namespace

torch::Tensor apply_phase_rotation(const torch::Tensor& w, double theta) {
  if (const double u = real_unit(theta); u != 0.0) return u < 0.0 ? -w : w.clone();
  auto f = rotation_factors({theta}, w.size(-1), w.scalar_type()).squeeze(0);
  return rotate(w, f);
}

torch::Tensor da_transform(const torch::Tensor& w, const DADraw& draw) {
  if (draw.shift >= w.size(-1) && draw.shift > 0) {
    throw ShapeError("da: shift must be shorter than the clip");
  }
  return apply_phase_rotation(apply_shift(apply_gain(w, draw.gain_db), draw.shift), draw.theta);
}

torch::Tensor da_transform(const torch::Tensor& w, const std::vector<DADraw>& draws) {
  if (w.dim() != 2 || w.size(0) != static_cast<std::int64_t>(draws.size())) {
    throw ShapeError("da: expected [B, n] with one draw per item");
  }
  const auto b = w.size(0);
  std::vector<double> thetas(draws.size());
  std::vector<torch::Tensor> shifted;
  shifted.reserve(draws.size());
  for (std::int64_t i = 0; i < b; ++i) {
    const auto& d = draws[static_cast<std::size_t>(i)];
    if (d.shift >= w.size(-1) && d.shift > 0) throw ShapeError("da: shift must be shorter than the clip");
    thetas[static_cast<std::size_t>(i)] = d.theta;
    shifted.push_back(apply_shift(apply_gain(w[i], d.gain_db), d.shift));
  }
  auto stacked = torch::stack(shifted);
  std::vector<double> units(thetas.size());
  std::transform(thetas.begin(), thetas.end(), units.begin(), real_unit);
  const bool any_real = std::any_of(units.begin(), units.end(), [](double u) { return u != 0.0; });
  const bool all_real = std::all_of(units.begin(), units.end(), [](double u) { return u != 0.0; });
  torch::Tensor rotated;
  if (!all_real) rotated = rotate(stacked, rotation_factors(thetas, w.size(-1), w.scalar_type()));
  if (!any_real) return rotated;
  std::vector<torch::Tensor> rows;
  for (std::int64_t i = 0; i < b; ++i) {
    const double u = units[static_cast<std::size_t>(i)];
    rows.push_back(u == 0.0 ? rotated[i] : (u < 0.0 ? -stacked[i] : stacked[i]));
  }
  return torch::stack(rows);
}

// ---------------------------------------------------------------------------
// Multi-resolution discriminator

void DiscriminatorConfig::validate() const {
  if (resolutions.size() < 2) throw ConfigError("discriminator needs at least two resolutions");
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    const auto& r = resolutions[i];
    if (r.fft_size < 16 || r.hop < 1 || r.window < 1 || r.window > r.fft_size) {
      throw ConfigError("discriminator resolution " + std::to_string(i) + " is invalid");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& q = resolutions[j];
      if (q.fft_size == r.fft_size && q.hop == r.hop && q.window == r.window) {
        throw ConfigError("discriminator resolutions must be distinct");
      }
    }
  }
  if (!weights.empty() && weights.size() != resolutions.size()) {
    throw ConfigError("discriminator weights must match the resolution count");
  }
  if (channels < 1) throw ConfigError("discriminator channels must be >= 1");
}

ResolutionDiscriminatorImpl::ResolutionDiscriminatorImpl(Resolution res, int channels)
    : res_(res) {
  convs = register_module("convs", nn::ModuleList());
  const int c = channels;
  convs->push_back(nn::Conv2d(nn::Conv2dOptions(1, c, {3, 9}).padding({1, 4})));
  for (int i = 0; i < 3; ++i) {
    convs->push_back(nn::Conv2d(nn::Conv2dOptions(c, c, {3, 9}).stride({1, 2}).padding({1, 4})));
  }
  convs->push_back(nn::Conv2d(nn::Conv2dOptions(c, c, {3, 3}).padding({1, 1})));
  post = register_module("post", nn::Conv2d(nn::Conv2dOptions(c, 1, {3, 3}).padding({1, 1})));
}

std::pair<torch::Tensor, std::vector<torch::Tensor>> ResolutionDiscriminatorImpl::forward(
    const torch::Tensor& w) {
  spectral::StftParams p{res_.fft_size, res_.hop, res_.window};
  auto x = spectral::stft(w, p).abs().transpose(-1, -2).unsqueeze(1);  // [B, 1, T, F]
  std::vector<torch::Tensor> features;
  features.reserve(kStages);
  for (const auto& m : *convs) {
    x = torch::leaky_relu(m->as<nn::Conv2dImpl>()->forward(x), 0.1);
    features.push_back(x);
  }
  auto logits = post(x);
  return {logits.flatten(1), std::move(features)};
}

MultiResolutionDiscriminatorImpl::MultiResolutionDiscriminatorImpl(DiscriminatorConfig cfg)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  discriminators = register_module("discriminators", nn::ModuleList());
  for (const auto& r : cfg_.resolutions) {
    discriminators->push_back(ResolutionDiscriminator(r, cfg_.channels));
  }
}

DiscriminatorOutput MultiResolutionDiscriminatorImpl::forward(const torch::Tensor& w) {
  if (w.dim() != 2) throw ShapeError("discriminator expects [B, n] waveforms");
  DiscriminatorOutput out;
  for (const auto& m : *discriminators) {
    auto [logits, feats] = m->as<ResolutionDiscriminatorImpl>()->forward(w);
    out.logits.push_back(std::move(logits));
    out.features.push_back(std::move(feats));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Losses

namespace {

double weight_at(const std::vector<double>& weights, std::size_t i) {
  return weights.empty() ? 1.0 : weights.at(i);
}

}  // namespace

torch::Tensor discriminator_hinge(const std::vector<torch::Tensor>& real_logits,
                                  const std::vector<torch::Tensor>& fake_logits,
                                  const std::vector<double>& weights) {
  if (real_logits.size() != fake_logits.size() || real_logits.empty()) {
    throw ShapeError("hinge: mismatched logit lists");
  }
  torch::Tensor total;
  for (std::size_t i = 0; i < real_logits.size(); ++i) {
    auto l = torch::relu(1.0 - real_logits[i]).mean() + torch::relu(1.0 + fake_logits[i]).mean();
    l = l * weight_at(weights, i);
    total = total.defined() ? total + l : l;
  }
  return total;
}

torch::Tensor generator_adversarial(const std::vector<torch::Tensor>& fake_logits,
                                    const std::vector<double>& weights) {
  if (fake_logits.empty()) throw ShapeError("adversarial: empty logit list");
  torch::Tensor total;
  for (std::size_t i = 0; i < fake_logits.size(); ++i) {
    auto l = -fake_logits[i].mean() * weight_at(weights, i);
    total = total.defined() ? total + l : l;
  }
  return total;
}

torch::Tensor feature_matching(const std::vector<std::vector<torch::Tensor>>& real,
                               const std::vector<std::vector<torch::Tensor>>& fake,
                               const std::vector<double>& weights) {
  if (real.size() != fake.size() || real.empty()) throw ShapeError("feature matching: mismatch");
  torch::Tensor total;
  for (std::size_t i = 0; i < real.size(); ++i) {
    if (real[i].size() != fake[i].size() || real[i].empty()) {
      throw ShapeError("feature matching: stage count mismatch");
    }
    torch::Tensor acc;
    for (std::size_t j = 0; j < real[i].size(); ++j) {
      auto l = (real[i][j].detach() - fake[i][j]).abs().mean();
      acc = acc.defined() ? acc + l : l;
    }
    auto l = acc / static_cast<double>(real[i].size()) * weight_at(weights, i);
    total = total.defined() ? total + l : l;
  }
  return total;
}

torch::Tensor mel_l1(const spectral::FeatureExtractor& fx, const torch::Tensor& real,
                     const torch::Tensor& fake) {
  if (real.sizes() != fake.sizes()) throw ShapeError("mel_l1: real and fake lengths differ");
  return (fx.log_mel(real) - fx.log_mel(fake)).abs().mean();
}

torch::Tensor discriminator_loss(MultiResolutionDiscriminator& disc, const torch::Tensor& real,
                                 const torch::Tensor& fake, const std::vector<DADraw>& draws) {
  if (real.sizes() != fake.sizes()) throw ShapeError("gan: real and fake lengths differ");
  auto r = disc->forward(da_transform(real, draws));
  auto f = disc->forward(da_transform(fake.detach(), draws));
  return discriminator_hinge(r.logits, f.logits, disc->config().weights);
}

GanLossReport generator_losses(MultiResolutionDiscriminator& disc,
                               const spectral::FeatureExtractor& fx, const torch::Tensor& real,
                               const torch::Tensor& fake, const std::vector<DADraw>& draws,
                               const LossWeights& weights) {
  if (real.sizes() != fake.sizes()) throw ShapeError("gan: real and fake lengths differ");
  const auto& dw = disc->config().weights;
  DiscriminatorOutput r;
  {
    torch::NoGradGuard g;
    r = disc->forward(da_transform(real, draws));
  }
  auto f = disc->forward(da_transform(fake, draws));
  GanLossReport rep;
  rep.adversarial = generator_adversarial(f.logits, dw);
  rep.feature_matching = feature_matching(r.features, f.features, dw);
  rep.spectral_l1 = mel_l1(fx, real, fake);
  rep.total = weights.adversarial * rep.adversarial +
              weights.feature_matching * rep.feature_matching + weights.spectral * rep.spectral_l1;
  return rep;
}

GanLossReport gan_losses(MultiResolutionDiscriminator& disc, const spectral::FeatureExtractor& fx,
                         const torch::Tensor& real, const torch::Tensor& fake,
                         const std::vector<DADraw>& draws, const LossWeights& weights) {
  auto rep = generator_losses(disc, fx, real, fake, draws, weights);
  rep.discriminator_loss = discriminator_loss(disc, real, fake, draws);
  return rep;
}

}  // namespace lsevoc::vocos
