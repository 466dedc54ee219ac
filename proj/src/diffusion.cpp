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

#include "lsevoc/diffusion.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>
#include <limits>
#include <string>

#include "lsevoc/error.hpp"

namespace lsevoc::diffusion {

at::Generator make_generator(std::uint64_t seed) {
  return at::make_generator<at::CPUGeneratorImpl>(seed);
}

NoiseSchedule NoiseSchedule::linear(int n_steps, double beta_start, double beta_end) {
  if (n_steps < 2) throw ConfigError("noise schedule needs at least two steps");
  if (!(beta_start > 0.0) || !(beta_end < 1.0) || !(beta_start < beta_end))
    throw ConfigError("betas must satisfy 0 < beta_start < beta_end < 1");
  NoiseSchedule s;
  s.n_steps = n_steps;
  s.betas.resize(n_steps);
  s.alphas.resize(n_steps);
  s.alpha_bars.resize(n_steps);
  double prod = 1.0;
  for (int t = 0; t < n_steps; ++t) {
    s.betas[t] = beta_start + (beta_end - beta_start) * t / (n_steps - 1);
    s.alphas[t] = 1.0 - s.betas[t];
    prod *= s.alphas[t];
    s.alpha_bars[t] = prod;
  }
  return s;
}

double NoiseSchedule::sigma(int t) const {
  if (t < 0 || t >= n_steps) throw DomainError("diffusion step out of range");
  return std::sqrt((1.0 - alpha_bars[t]) / alpha_bars[t]);
}

int NoiseSchedule::nearest_step(double s) const {
  if (!(s > 0.0)) throw DomainError("nearest_step: sigma must be positive");
  const double target = std::log(s);
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n_steps; ++t) {
    const double d = std::abs(std::log(sigma(t)) - target);
    if (d < best_d) {
      best_d = d;
      best = t;
    }
  }
  return best;
}

torch::Tensor NoiseSchedule::alpha_bar_tensor() const {
  return torch::tensor(alpha_bars, torch::kDouble);
}

std::vector<double> karras_sigmas(int n, double sigma_min, double sigma_max, double rho) {
  if (n < 1) throw ConfigError("sampler needs at least one step");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
    throw ConfigError("karras ladder requires sigma_max > sigma_min > 0");
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  std::vector<double> sig;
  sig.reserve(n + 1);
  if (n == 1) {
    sig.push_back(sigma_max);
  } else {
    const double lo = std::pow(sigma_min, 1.0 / rho);
    const double hi = std::pow(sigma_max, 1.0 / rho);
    for (int i = 0; i < n; ++i) {
      const double ramp = static_cast<double>(i) / (n - 1);
      sig.push_back(std::pow(hi + ramp * (lo - hi), rho));
    }
    sig.front() = sigma_max;
    sig.back() = sigma_min;
  }
  sig.push_back(0.0);
  return sig;
}

SamplerPlan SamplerPlan::karras(int n_sample_steps, double sigma_min, double sigma_max,
                                double rho) {
  SamplerPlan p;
  p.n_sample_steps = n_sample_steps;
  p.rho = rho;
  p.sigma_min = sigma_min;
  p.sigma_max = sigma_max;
  p.sigmas = karras_sigmas(n_sample_steps, sigma_min, sigma_max, rho);
  return p;
}

SamplerPlan SamplerPlan::karras(const NoiseSchedule& schedule, int n_sample_steps, double rho) {
  return karras(n_sample_steps, schedule.sigma_min(), schedule.sigma_max(), rho);
}

torch::Tensor forward_diffuse(const torch::Tensor& x0, int t, const torch::Tensor& eps,
                              const NoiseSchedule& schedule) {
  if (t < 0 || t >= schedule.n_steps)
    throw DomainError("forward_diffuse: step " + std::to_string(t) + " out of range");
  if (!x0.sizes().equals(eps.sizes())) throw ShapeError("forward_diffuse: eps shape mismatch");
  const double ab = schedule.alpha_bars[t];
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

torch::Tensor forward_diffuse(const torch::Tensor& x0, const torch::Tensor& t,
                              const torch::Tensor& eps, const NoiseSchedule& schedule) {
  if (!x0.sizes().equals(eps.sizes())) throw ShapeError("forward_diffuse: eps shape mismatch");
  if (t.dim() != 1 || t.size(0) != x0.size(0))
    throw ShapeError("forward_diffuse: one step per batch item required");
  if (t.min().item<std::int64_t>() < 0 || t.max().item<std::int64_t>() >= schedule.n_steps)
    throw DomainError("forward_diffuse: step out of range");
  std::vector<std::int64_t> bshape(x0.dim(), 1);
  bshape[0] = x0.size(0);
  auto ab = schedule.alpha_bar_tensor().index_select(0, t.to(torch::kLong)).to(x0.scalar_type());
  ab = ab.view(bshape);
  return ab.sqrt() * x0 + (1.0 - ab).sqrt() * eps;
}

LossSample training_loss(const EpsModel& model, const torch::Tensor& x0, const torch::Tensor& cond,
                         const NoiseSchedule& schedule, at::Generator& gen) {
  if (x0.size(-1) != cond.size(-1))
    throw ShapeError("training_loss: target and condition frame counts differ");
  if (x0.size(0) != cond.size(0)) throw ShapeError("training_loss: batch size mismatch");
  auto t = torch::randint(schedule.n_steps, {x0.size(0)}, gen, torch::kLong);
  auto eps = torch::randn(x0.sizes(), gen, x0.options());
  auto xt = forward_diffuse(x0, t, eps, schedule);
  auto pred = model(xt, cond, t);
  return {torch::mse_loss(pred, eps), t};
}

torch::Tensor denoise(const EpsModel& model, const torch::Tensor& x, const torch::Tensor& cond,
                      double sigma, const NoiseSchedule& schedule) {
  const int step = schedule.nearest_step(sigma);
  auto t = torch::full({x.size(0)}, step, torch::kLong);
  auto eps = model(x / std::sqrt(1.0 + sigma * sigma), cond, t);
  return x - sigma * eps;
}

torch::Tensor dpmpp_2m_sample(const EpsModel& model, const torch::Tensor& cond,
                              std::int64_t n_bins, const SamplerPlan& plan,
                              const NoiseSchedule& schedule, std::span<const std::uint64_t> seeds) {
  if (plan.n_sample_steps < 1) throw ConfigError("sampler needs at least one step");
  if (plan.sigmas.size() != std::size_t(plan.n_sample_steps) + 1)
    throw ConfigError("sampler plan sigma ladder has the wrong length");
  if (seeds.size() != std::size_t(cond.size(0)))
    throw ShapeError("dpmpp_2m_sample: one seed per batch item required");
  torch::NoGradGuard no_grad;

  const auto frames = cond.size(-1);
  std::vector<torch::Tensor> init;
  init.reserve(seeds.size());
  for (auto seed : seeds) {
    auto gen = make_generator(seed);
    init.push_back(torch::randn({n_bins, frames}, gen, cond.options()));
  }
  const auto& sig = plan.sigmas;
  auto x = torch::stack(init) * sig[0];

  torch::Tensor old_denoised;
  for (int i = 0; i < plan.n_sample_steps; ++i) {
    auto denoised = denoise(model, x, cond, sig[i], schedule);
    if (sig[i + 1] == 0.0) {
      x = denoised;
    } else {
      // Half-log-SNR step h = lambda(next) - lambda(cur) with lambda = -log sigma.
      const double h = std::log(sig[i]) - std::log(sig[i + 1]);
      const double ratio = sig[i + 1] / sig[i];
      const double coef = std::expm1(-h);  // exp(-h) - 1
      if (i == 0 || !old_denoised.defined()) {
        x = ratio * x - coef * denoised;
      } else {
        const double h_last = std::log(sig[i - 1]) - std::log(sig[i]);
        const double r = h_last / h;
        auto d = (1.0 + 1.0 / (2.0 * r)) * denoised - (1.0 / (2.0 * r)) * old_denoised;
        x = ratio * x - coef * d;
      }
    }
    old_denoised = denoised;
  }
  return x;
}

}  // namespace lsevoc::diffusion
