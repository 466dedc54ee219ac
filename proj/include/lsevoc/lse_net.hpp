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

// Linear-spectrogram estimation network: a DiT-style epsilon predictor over
// (frequency-row, time) patch tokens. Self-attention runs along time only,
// each frequency row being an independent sequence with shared weights;
// frequency rows communicate through a learned dense map after attention.
// Conditioning (timestep + mel frames) enters through zero-initialized
// adaLN regressors, so every block starts as the identity.

#pragma once

#include <torch/torch.h>

#include <cstdint>

#include "lsevoc/diffusion.hpp"

namespace lsevoc::lse {

struct LseConfig {
  int n_blocks = 8;
  int n_heads = 8;
  int hidden = 320;
  int patch_t = 2;
  int patch_f = 8;
  int n_linear = 592;
  int n_mel = 80;
  int ffn_expand = 4;
  int cond_layers = 2;
  int time_embed_dim = 256;

  int freq_tokens() const { return n_linear / patch_f; }
  void validate() const;
};

// Hand-derivable parameter total for cfg (matches the module's numel sum).
std::int64_t parameter_count(const LseConfig& cfg);

// DiT-style sinusoid: [cos(p w_i), sin(p w_i)] with w_i = 10000^(-i/half).
torch::Tensor sinusoidal_embedding(const torch::Tensor& positions, int dim);

// [t_tok x hidden]; shared by every frequency row at a given time index.
torch::Tensor time_positional_embedding(std::int64_t t_tok, int hidden,
                                        torch::ScalarType dtype = torch::kFloat);

struct ConditionEmbedding {
  torch::Tensor c_prime;  // [B, T_tok, hidden]
  torch::Tensor t_prime;  // [B, hidden]
};

// gamma/beta/alpha for both residual stages, each [B, 1, T_tok, hidden]
// (broadcast over frequency rows).
struct ModulationParams {
  torch::Tensor shift1, scale1, gate1, shift2, scale2, gate2;
};

class PatchEmbedImpl : public torch::nn::Module {
 public:
  explicit PatchEmbedImpl(const LseConfig& cfg);
  // [B, F, T] -> TokenGrid [B, F_tok, T_tok, hidden]
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Linear proj{nullptr};

 private:
  LseConfig cfg_;
};
TORCH_MODULE(PatchEmbed);

class UnpatchifyImpl : public torch::nn::Module {
 public:
  explicit UnpatchifyImpl(const LseConfig& cfg);
  // [B, F_tok, T_tok, hidden] -> [B, F, T]
  torch::Tensor forward(const torch::Tensor& tokens);

  torch::nn::Linear proj{nullptr};

 private:
  LseConfig cfg_;
};
TORCH_MODULE(Unpatchify);

class ConditionEncoderImpl : public torch::nn::Module {
 public:
  explicit ConditionEncoderImpl(const LseConfig& cfg);
  // mel [B, n_mel, T], t [B] -> c' [B, T/patch_t, hidden], t' [B, hidden]
  ConditionEmbedding forward(const torch::Tensor& mel, const torch::Tensor& t);

  torch::nn::Sequential mel_proj{nullptr};
  torch::nn::Sequential time_mlp{nullptr};

 private:
  LseConfig cfg_;
};
TORCH_MODULE(ConditionEncoder);

class BackboneBlockImpl : public torch::nn::Module {
 public:
  explicit BackboneBlockImpl(const LseConfig& cfg);

  torch::Tensor forward(const torch::Tensor& x, const ConditionEmbedding& cond);
  ModulationParams modulation(const ConditionEmbedding& cond);
  // Pre-softmax stage-1 attention logits [B, F_tok, heads, T_tok, T_tok].
  torch::Tensor attention_scores(const torch::Tensor& x, const ConditionEmbedding& cond);
  // Learned per-row embedding followed by the dense row map, [B, F_tok, T_tok, C].
  torch::Tensor mix_frequencies(const torch::Tensor& a);

  torch::nn::Linear ada{nullptr};
  torch::nn::LayerNorm norm1{nullptr}, norm2{nullptr};
  torch::nn::Linear qkv{nullptr}, attn_out{nullptr};
  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
  torch::Tensor freq_embed;  // [F_tok, hidden]
  torch::Tensor freq_mix;    // [F_tok, F_tok], initialized to identity

 private:
  torch::Tensor attend(const torch::Tensor& h);
  LseConfig cfg_;
};
TORCH_MODULE(BackboneBlock);

class FinalLayerImpl : public torch::nn::Module {
 public:
  explicit FinalLayerImpl(const LseConfig& cfg);
  torch::Tensor forward(const torch::Tensor& x, const ConditionEmbedding& cond);

  torch::nn::Linear ada{nullptr};
  torch::nn::LayerNorm norm{nullptr};
  Unpatchify unpatchify{nullptr};
};
TORCH_MODULE(FinalLayer);

class LseNetImpl : public torch::nn::Module {
 public:
  explicit LseNetImpl(LseConfig cfg);

  // x [B, n_linear, T] (normalized, noisy), mel [B, n_mel, T], t int64 [B].
  // T must be a multiple of patch_t.
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& mel, const torch::Tensor& t);
  // Pads T up to a multiple of patch_t with the given normalized floor values,
  // runs forward and crops back.
  torch::Tensor forward_padded(const torch::Tensor& x, const torch::Tensor& mel,
                               const torch::Tensor& t, double x_pad, double mel_pad);

  // Patchified input plus positional embedding, i.e. the first block's input.
  torch::Tensor embed(const torch::Tensor& x);

  const LseConfig& config() const { return cfg_; }

  PatchEmbed patch_embed{nullptr};
  ConditionEncoder cond{nullptr};
  torch::nn::ModuleList blocks{nullptr};
  FinalLayer final_layer{nullptr};

 private:
  LseConfig cfg_;
};
TORCH_MODULE(LseNet);

diffusion::EpsModel as_eps_model(LseNet net);

}  // namespace lsevoc::lse
