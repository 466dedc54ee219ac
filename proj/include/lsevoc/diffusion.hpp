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

// Discrete variance-preserving diffusion: forward process, epsilon loss and
// the DPM++ 2M sampler on a Karras sigma ladder.

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lsevoc::diffusion {

struct NoiseSchedule {
  int n_steps = 0;
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;

  // Linearly spaced betas; the classic DDPM default is 1e-4 .. 0.02 over 1000.
  static NoiseSchedule linear(int n_steps = 1000, double beta_start = 1e-4,
                              double beta_end = 0.02);

  // Variance-exploding view of step t: sqrt((1 - abar_t) / abar_t).
  double sigma(int t) const;
  double sigma_min() const { return sigma(0); }
  double sigma_max() const { return sigma(n_steps - 1); }
  // Step whose sigma is nearest in log space.
  int nearest_step(double sigma) const;

  torch::Tensor alpha_bar_tensor() const;
};

struct SamplerPlan {
  int n_sample_steps = 32;
  double rho = 7.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::vector<double> sigmas;  // n_sample_steps + 1 entries, last is 0

  // Karras ladder between the schedule's extreme sigmas.
  static SamplerPlan karras(const NoiseSchedule& schedule, int n_sample_steps = 32,
                            double rho = 7.0);
  static SamplerPlan karras(int n_sample_steps, double sigma_min, double sigma_max,
                            double rho = 7.0);
};

// sigma_i = (smax^(1/rho) + i/(n-1) (smin^(1/rho) - smax^(1/rho)))^rho, then 0.
// A single step yields {sigma_max, 0}.
std::vector<double> karras_sigmas(int n, double sigma_min, double sigma_max, double rho);

// sqrt(abar_t) x0 + sqrt(1 - abar_t) eps. The tensor overload takes one step
// per leading-batch item.
torch::Tensor forward_diffuse(const torch::Tensor& x0, int t, const torch::Tensor& eps,
                              const NoiseSchedule& schedule);
torch::Tensor forward_diffuse(const torch::Tensor& x0, const torch::Tensor& t,
                              const torch::Tensor& eps, const NoiseSchedule& schedule);

// eps-prediction network: (x_t [B, F, T], cond [B, M, T], t int64 [B]) -> [B, F, T].
using EpsModel = std::function<torch::Tensor(const torch::Tensor& x, const torch::Tensor& cond,
                                             const torch::Tensor& t)>;

struct LossSample {
  torch::Tensor loss;  // scalar
  torch::Tensor t;     // int64 [B]
};

// Draws t ~ U{0..n_steps-1} and eps ~ N(0, I) from gen; MSE(model(x_t), eps).
LossSample training_loss(const EpsModel& model, const torch::Tensor& x0, const torch::Tensor& cond,
                         const NoiseSchedule& schedule, at::Generator& gen);

// Denoised estimate for the variance-exploding state x at level sigma:
// the model sees x / sqrt(1 + sigma^2) at the nearest discrete step.
torch::Tensor denoise(const EpsModel& model, const torch::Tensor& x, const torch::Tensor& cond,
                      double sigma, const NoiseSchedule& schedule);

// DPM++ 2M. Item i starts from sigma_max * N(0, I) drawn from seeds[i], so a
// batch gives the same result as sampling its items one at a time.
torch::Tensor dpmpp_2m_sample(const EpsModel& model, const torch::Tensor& cond,
                              std::int64_t n_bins, const SamplerPlan& plan,
                              const NoiseSchedule& schedule, std::span<const std::uint64_t> seeds);

at::Generator make_generator(std::uint64_t seed);

}  // namespace lsevoc::diffusion
