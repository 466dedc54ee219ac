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

#include "lsevoc/lse_net.hpp"

#include <cmath>
#include <string>

#include "lsevoc/error.hpp"

namespace lsevoc::lse {

namespace nn = torch::nn;

namespace {

nn::Linear zero_linear(int in, int out) {
  nn::Linear l(in, out);
  torch::NoGradGuard g;
  l->weight.zero_();
  l->bias.zero_();
  return l;
}

torch::Tensor modulate(const torch::Tensor& h, const torch::Tensor& shift,
                       const torch::Tensor& scale) {
  return h * (1.0 + scale) + shift;
}

nn::LayerNorm plain_norm(int hidden) {
  return nn::LayerNorm(nn::LayerNormOptions({hidden}).elementwise_affine(false).eps(1e-6));
}

}  // namespace

void LseConfig::validate() const {
  if (n_blocks < 0 || n_heads < 1 || hidden < 1 || patch_t < 1 || patch_f < 1 || n_mel < 1 ||
      ffn_expand < 1 || cond_layers < 1 || time_embed_dim < 2 || time_embed_dim % 2 != 0)
    throw ConfigError("lse: non-positive architecture parameter");
  if (n_linear % patch_f != 0)
    throw ConfigError("lse: n_linear (" + std::to_string(n_linear) +
                      ") must be divisible by patch_f (" + std::to_string(patch_f) + ")");
  if (hidden % n_heads != 0) throw ConfigError("lse: hidden must be divisible by n_heads");
  if (hidden % 2 != 0) throw ConfigError("lse: hidden must be even for sinusoidal embeddings");
}

std::int64_t parameter_count(const LseConfig& c) {
  const std::int64_t h = c.hidden, patch = std::int64_t(c.patch_f) * c.patch_t;
  const std::int64_t ft = c.freq_tokens();
  auto linear = [](std::int64_t in, std::int64_t out) { return in * out + out; };
  std::int64_t n = linear(patch, h);                                        // patch embed
  n += linear(c.time_embed_dim, h) + linear(h, h);                          // timestep mlp
  n += linear(std::int64_t(c.n_mel) * c.patch_t, h) + (c.cond_layers - 1) * linear(h, h);
  const std::int64_t block = linear(h, 6 * h) + linear(h, 3 * h) + linear(h, h) + ft * h +
                             ft * ft + linear(h, c.ffn_expand * h) + linear(c.ffn_expand * h, h);
  n += c.n_blocks * block;
  n += linear(h, 2 * h) + linear(h, patch);  // final layer
  return n;
}

torch::Tensor sinusoidal_embedding(const torch::Tensor& positions, int dim) {
  const int half = dim / 2;
  auto opts = torch::TensorOptions().dtype(torch::kDouble);
  auto freqs = torch::exp(-std::log(10000.0) * torch::arange(half, opts) / half);
  auto args = positions.to(torch::kDouble).view({-1, 1}) * freqs.view({1, -1});
  auto emb = torch::cat({torch::cos(args), torch::sin(args)}, -1);
  if (dim % 2 == 1) emb = torch::cat({emb, torch::zeros({emb.size(0), 1}, opts)}, -1);
  return emb;
}

torch::Tensor time_positional_embedding(std::int64_t t_tok, int hidden, torch::ScalarType dtype) {
  if (t_tok < 1) throw ShapeError("time_positional_embedding: need at least one time token");
  return sinusoidal_embedding(torch::arange(t_tok, torch::kDouble), hidden).to(dtype);
}

PatchEmbedImpl::PatchEmbedImpl(const LseConfig& cfg) : cfg_(cfg) {
  proj = register_module("proj", nn::Linear(cfg.patch_f * cfg.patch_t, cfg.hidden));
}

torch::Tensor PatchEmbedImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 3 || x.size(1) != cfg_.n_linear || x.size(2) % cfg_.patch_t != 0)
    throw ShapeError("patchify: expected [B, " + std::to_string(cfg_.n_linear) +
                     ", T] with T divisible by " + std::to_string(cfg_.patch_t));
  const auto b = x.size(0), ft = x.size(1) / cfg_.patch_f, tt = x.size(2) / cfg_.patch_t;
  auto p = x.reshape({b, ft, cfg_.patch_f, tt, cfg_.patch_t})
               .permute({0, 1, 3, 2, 4})
               .reshape({b, ft, tt, cfg_.patch_f * cfg_.patch_t});
  return proj(p);
}

UnpatchifyImpl::UnpatchifyImpl(const LseConfig& cfg) : cfg_(cfg) {
  proj = register_module("proj", zero_linear(cfg.hidden, cfg.patch_f * cfg.patch_t));
}

torch::Tensor UnpatchifyImpl::forward(const torch::Tensor& tokens) {
  if (tokens.dim() != 4 || tokens.size(1) != cfg_.freq_tokens() || tokens.size(3) != cfg_.hidden)
    throw ShapeError("unpatchify: token grid does not match the configuration");
  const auto b = tokens.size(0), ft = tokens.size(1), tt = tokens.size(2);
  return proj(tokens)
      .reshape({b, ft, tt, cfg_.patch_f, cfg_.patch_t})
      .permute({0, 1, 3, 2, 4})
      .reshape({b, ft * cfg_.patch_f, tt * cfg_.patch_t});
}

ConditionEncoderImpl::ConditionEncoderImpl(const LseConfig& cfg) : cfg_(cfg) {
  nn::Sequential mel;
  mel->push_back(nn::Linear(cfg.n_mel * cfg.patch_t, cfg.hidden));
  for (int i = 1; i < cfg.cond_layers; ++i) {
    mel->push_back(nn::GELU());
    mel->push_back(nn::Linear(cfg.hidden, cfg.hidden));
  }
  mel_proj = register_module("mel_proj", mel);
  time_mlp = register_module(
      "time_mlp", nn::Sequential(nn::Linear(cfg.time_embed_dim, cfg.hidden), nn::SiLU(),
                                 nn::Linear(cfg.hidden, cfg.hidden)));
}

ConditionEmbedding ConditionEncoderImpl::forward(const torch::Tensor& mel, const torch::Tensor& t) {
  if (mel.dim() != 3 || mel.size(1) != cfg_.n_mel || mel.size(2) % cfg_.patch_t != 0)
    throw ShapeError("condition: expected [B, " + std::to_string(cfg_.n_mel) +
                     ", T] with T divisible by " + std::to_string(cfg_.patch_t));
  if (t.dim() != 1 || t.size(0) != mel.size(0))
    throw ShapeError("condition: one diffusion step per batch item required");
  const auto b = mel.size(0), tt = mel.size(2) / cfg_.patch_t;
  auto frames = mel.reshape({b, cfg_.n_mel, tt, cfg_.patch_t})
                    .permute({0, 2, 3, 1})
                    .reshape({b, tt, cfg_.patch_t * cfg_.n_mel});
  ConditionEmbedding out;
  out.c_prime = mel_proj->forward(frames);
  out.t_prime = time_mlp->forward(
      sinusoidal_embedding(t, cfg_.time_embed_dim).to(mel.scalar_type()).to(mel.device()));
  return out;
}

BackboneBlockImpl::BackboneBlockImpl(const LseConfig& cfg) : cfg_(cfg) {
  const int h = cfg.hidden, ft = cfg.freq_tokens();
  ada = register_module("ada", zero_linear(h, 6 * h));
  norm1 = register_module("norm1", plain_norm(h));
  norm2 = register_module("norm2", plain_norm(h));
  qkv = register_module("qkv", nn::Linear(h, 3 * h));
  attn_out = register_module("attn_out", nn::Linear(h, h));
  fc1 = register_module("fc1", nn::Linear(h, cfg.ffn_expand * h));
  fc2 = register_module("fc2", nn::Linear(cfg.ffn_expand * h, h));
  freq_embed = register_parameter("freq_embed", torch::randn({ft, h}) * 0.02);
  freq_mix = register_parameter("freq_mix", torch::eye(ft));
}

ModulationParams BackboneBlockImpl::modulation(const ConditionEmbedding& cond) {
  auto base = torch::silu(cond.t_prime.unsqueeze(1) + cond.c_prime);
  auto parts = ada(base).unsqueeze(1).chunk(6, -1);
  return {parts[0], parts[1], parts[2], parts[3], parts[4], parts[5]};
}

torch::Tensor BackboneBlockImpl::attend(const torch::Tensor& h) {
  const auto b = h.size(0), ft = h.size(1), tt = h.size(2);
  const int heads = cfg_.n_heads, hd = cfg_.hidden / cfg_.n_heads;
  auto q_k_v = qkv(h).reshape({b * ft, tt, 3, heads, hd}).permute({2, 0, 3, 1, 4});
  auto y = at::scaled_dot_product_attention(q_k_v[0], q_k_v[1], q_k_v[2]);
  y = y.permute({0, 2, 1, 3}).reshape({b, ft, tt, cfg_.hidden});
  return attn_out(y);
}

torch::Tensor BackboneBlockImpl::attention_scores(const torch::Tensor& x,
                                                  const ConditionEmbedding& cond) {
  auto mod = modulation(cond);
  auto h = modulate(norm1(x), mod.shift1, mod.scale1);
  const auto b = h.size(0), ft = h.size(1), tt = h.size(2);
  const int heads = cfg_.n_heads, hd = cfg_.hidden / cfg_.n_heads;
  auto q_k_v = qkv(h).reshape({b, ft, tt, 3, heads, hd}).permute({3, 0, 1, 4, 2, 5});
  return torch::matmul(q_k_v[0], q_k_v[1].transpose(-1, -2)) / std::sqrt(double(hd));
}

torch::Tensor BackboneBlockImpl::mix_frequencies(const torch::Tensor& a) {
  const auto b = a.size(0), ft = a.size(1), tt = a.size(2), c = a.size(3);
  auto e = a + freq_embed.view({1, ft, 1, c});
  return torch::matmul(freq_mix, e.reshape({b, ft, tt * c})).reshape({b, ft, tt, c});
}

torch::Tensor BackboneBlockImpl::forward(const torch::Tensor& x, const ConditionEmbedding& cond) {
  if (x.dim() != 4 || x.size(1) != cfg_.freq_tokens() || x.size(3) != cfg_.hidden ||
      x.size(2) != cond.c_prime.size(1))
    throw ShapeError("backbone block: token grid and condition do not align");
  auto mod = modulation(cond);
  auto h = modulate(norm1(x), mod.shift1, mod.scale1);
  auto y = x + mod.gate1 * mix_frequencies(attend(h));
  h = modulate(norm2(y), mod.shift2, mod.scale2);
  auto ffn = fc2(torch::gelu(fc1(h), "tanh"));
  return y + mod.gate2 * ffn;
}

FinalLayerImpl::FinalLayerImpl(const LseConfig& cfg) {
  ada = register_module("ada", zero_linear(cfg.hidden, 2 * cfg.hidden));
  norm = register_module("norm", plain_norm(cfg.hidden));
  unpatchify = register_module("unpatchify", Unpatchify(cfg));
}

torch::Tensor FinalLayerImpl::forward(const torch::Tensor& x, const ConditionEmbedding& cond) {
  auto parts = ada(torch::silu(cond.t_prime.unsqueeze(1) + cond.c_prime)).unsqueeze(1).chunk(2, -1);
  return unpatchify(modulate(norm(x), parts[0], parts[1]));
}

LseNetImpl::LseNetImpl(LseConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  patch_embed = register_module("patch_embed", PatchEmbed(cfg_));
  cond = register_module("cond", ConditionEncoder(cfg_));
  blocks = register_module("blocks", nn::ModuleList());
  for (int i = 0; i < cfg_.n_blocks; ++i) blocks->push_back(BackboneBlock(cfg_));
  final_layer = register_module("final", FinalLayer(cfg_));
}

torch::Tensor LseNetImpl::embed(const torch::Tensor& x) {
  auto tokens = patch_embed(x);
  auto pos = time_positional_embedding(tokens.size(2), cfg_.hidden, tokens.scalar_type())
                 .to(tokens.device());
  return tokens + pos.view({1, 1, tokens.size(2), cfg_.hidden});
}

torch::Tensor LseNetImpl::forward(const torch::Tensor& x, const torch::Tensor& mel,
                                  const torch::Tensor& t) {
  if (x.dim() != 3 || mel.dim() != 3 || x.size(0) != mel.size(0) || x.size(2) != mel.size(2))
    throw ShapeError("lse: spectrogram and mel condition must share batch and frame count");
  auto ce = cond(mel, t);
  auto h = embed(x);
  for (const auto& blk : *blocks) h = blk->as<BackboneBlock>()->forward(h, ce);
  return final_layer(h, ce);
}

torch::Tensor LseNetImpl::forward_padded(const torch::Tensor& x, const torch::Tensor& mel,
                                         const torch::Tensor& t, double x_pad, double mel_pad) {
  const auto frames = x.size(-1);
  const auto extra = (cfg_.patch_t - frames % cfg_.patch_t) % cfg_.patch_t;
  if (extra == 0) return forward(x, mel, t);
  auto xp = torch::constant_pad_nd(x, {0, extra}, x_pad);
  auto mp = torch::constant_pad_nd(mel, {0, extra}, mel_pad);
  return forward(xp, mp, t).narrow(-1, 0, frames);
}

diffusion::EpsModel as_eps_model(LseNet net) {
  return [net](const torch::Tensor& x, const torch::Tensor& c, const torch::Tensor& t) mutable {
    return net->forward(x, c, t);
  };
}

}  // namespace lsevoc::lse
