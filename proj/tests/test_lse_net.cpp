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

#include "test_support.hpp"

#include <cmath>

#include "lsevoc/error.hpp"
#include "lsevoc/lse_net.hpp"

using namespace lsevoc;
using namespace lsevoc::lse;

namespace {

LseConfig tiny_config() {
  LseConfig c;
  c.n_blocks = 1;
  c.n_heads = 2;
  c.hidden = 16;
  c.n_linear = 16;
  c.n_mel = 8;
  c.time_embed_dim = 16;
  return c;
}

void randomize(torch::nn::Module& m, std::uint64_t seed, double scale) {
  torch::NoGradGuard g;
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  for (auto& p : m.parameters()) p.copy_(torch::randn(p.sizes(), gen, p.options()) * scale);
}

ConditionEmbedding random_cond(std::int64_t b, std::int64_t tt, int hidden, std::uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  return {torch::randn({b, tt, hidden}, gen), torch::randn({b, hidden}, gen)};
}

}  // namespace

TEST_CASE("patchify shapes for the default configuration") {
  LseConfig cfg;
  PatchEmbed pe(cfg);
  Unpatchify up(cfg);
  auto x = torch::randn({1, 592, 400});
  auto tokens = pe(x);
  CHECK(tokens.sizes().vec() == std::vector<std::int64_t>{1, 74, 200, 320});
  CHECK(up(tokens).sizes().vec() == std::vector<std::int64_t>{1, 592, 400});
  for (std::int64_t t : {2, 50, 400}) {
    auto xi = torch::randn({2, 592, t});
    CHECK(up(pe(xi)).sizes() == xi.sizes());
  }
  CHECK_THROWS_AS(pe(torch::randn({1, 592, 401})), ShapeError);
  CHECK_THROWS_AS(pe(torch::randn({1, 591, 400})), ShapeError);
}

TEST_CASE("patch tokens are local to their patch") {
  LseConfig cfg;
  PatchEmbed pe(cfg);
  torch::NoGradGuard g;
  auto x = torch::randn({1, 592, 20});
  auto base = pe(x);
  auto y = x.clone();
  // Patch (row 3, time token 4) covers bins 24..31, frames 8..9.
  y.slice(1, 24, 32).slice(2, 8, 10).zero_();
  auto changed = (pe(y) - base).abs().sum(-1)[0] > 0;
  CHECK(changed[3][4].item<bool>());
  CHECK(changed.sum().item<std::int64_t>() == 1);
}

TEST_CASE("unpatchify inverts the patch layout") {
  auto cfg = tiny_config();
  cfg.hidden = cfg.patch_f * cfg.patch_t;
  cfg.n_heads = 1;
  PatchEmbed pe(cfg);
  Unpatchify up(cfg);
  torch::NoGradGuard g;
  pe->proj->weight.copy_(torch::eye(cfg.hidden));
  pe->proj->bias.zero_();
  up->proj->weight.copy_(torch::eye(cfg.hidden));
  up->proj->bias.zero_();
  auto x = torch::randn({2, 16, 10});
  CHECK(torch::equal(up(pe(x)), x));
}

TEST_CASE("time positional embedding") {
  auto small = time_positional_embedding(1, 320);
  auto large = time_positional_embedding(10000, 320);
  CHECK(small.sizes().vec() == std::vector<std::int64_t>{1, 320});
  CHECK(large.sizes().vec() == std::vector<std::int64_t>{10000, 320});
  CHECK(torch::isfinite(large).all().item<bool>());
  CHECK(torch::allclose(large.narrow(0, 0, 1), small));
  for (std::int64_t j : {1, 17, 9999})
    CHECK((large[j] - large[j - 1]).abs().max().item<double>() > 1e-3);

  // embed() adds the same vector to every frequency row at a time index.
  LseNet net(tiny_config());
  torch::NoGradGuard g;
  auto x = torch::zeros({1, 16, 12});
  auto diff = net->embed(x) - net->patch_embed(x);
  for (std::int64_t f = 1; f < diff.size(1); ++f) CHECK(torch::equal(diff[0][f], diff[0][0]));
}

TEST_CASE("condition encoder") {
  LseConfig cfg;
  ConditionEncoder enc(cfg);
  torch::NoGradGuard g;
  auto mel = torch::randn({1, 80, 40});
  auto ce = enc(mel, torch::tensor({0}, torch::kLong));
  CHECK(ce.c_prime.sizes().vec() == std::vector<std::int64_t>{1, 20, 320});
  CHECK(ce.t_prime.sizes().vec() == std::vector<std::int64_t>{1, 320});

  auto late = enc(mel, torch::tensor({999}, torch::kLong));
  auto a = ce.t_prime[0], b = late.t_prime[0];
  CHECK((a.dot(b) / (a.norm() * b.norm())).item<double>() < 0.999);

  // Swapping two frame pairs swaps the matching c' time slots.
  auto swapped = mel.clone();
  swapped.slice(2, 4, 6).copy_(mel.slice(2, 10, 12));
  swapped.slice(2, 10, 12).copy_(mel.slice(2, 4, 6));
  auto cs = enc(swapped, torch::tensor({0}, torch::kLong)).c_prime;
  CHECK(torch::allclose(cs[0][2], ce.c_prime[0][5], 1e-5, 1e-6));
  CHECK(torch::allclose(cs[0][5], ce.c_prime[0][2], 1e-5, 1e-6));
  CHECK(torch::allclose(cs[0][7], ce.c_prime[0][7], 1e-5, 1e-6));

  CHECK_THROWS_AS(enc(torch::randn({1, 80, 41}), torch::tensor({0}, torch::kLong)), ShapeError);
  CHECK_THROWS_AS(enc(mel, torch::tensor({0, 1}, torch::kLong)), ShapeError);
}

TEST_CASE("backbone blocks are exact identities at initialization") {
  LseConfig cfg;
  cfg.n_blocks = 2;
  LseNet net(cfg);
  torch::NoGradGuard g;
  auto x = torch::randn({1, 74, 25, 320});
  auto cond = random_cond(1, 25, 320, 3);
  for (const auto& blk : *net->blocks) CHECK(torch::equal(blk->as<BackboneBlock>()->forward(x, cond), x));
  auto mod = net->blocks[0]->as<BackboneBlock>()->modulation(cond);
  for (auto* t : {&mod.shift1, &mod.scale1, &mod.gate1, &mod.shift2, &mod.scale2, &mod.gate2})
    CHECK(t->abs().max().item<double>() == 0.0);
  // The output path is zero-initialized too.
  auto eps = net(torch::randn({1, 592, 50}), torch::randn({1, 80, 50}), torch::tensor({10}, torch::kLong));
  CHECK(eps.abs().max().item<double>() == 0.0);
}

TEST_CASE("attention is confined to frequency rows when mixing is ablated") {
  auto cfg = tiny_config();
  cfg.n_linear = 32;  // four frequency rows
  BackboneBlock blk(cfg);
  randomize(*blk, 5, 0.3);
  torch::NoGradGuard g;
  blk->freq_mix.copy_(torch::eye(4));
  blk->freq_embed.zero_();
  auto x = torch::randn({1, 4, 9, 16});
  auto cond = random_cond(1, 9, 16, 6);
  auto base = blk(x, cond);
  for (std::int64_t f = 0; f < 4; ++f) {
    auto y = x.clone();
    y[0][f][3] += torch::randn({16});
    auto delta = (blk(y, cond) - base).abs().sum({-1, -2})[0];
    for (std::int64_t other = 0; other < 4; ++other) {
      if (other == f)
        CHECK(delta[other].item<double>() > 0.0);
      else
        CHECK(delta[other].item<double>() == 0.0);
    }
  }
}

TEST_CASE("blocks accept any number of time tokens") {
  auto cfg = tiny_config();
  BackboneBlock blk(cfg);
  randomize(*blk, 8, 0.2);
  torch::NoGradGuard g;
  for (std::int64_t tt : {3, 300}) {
    auto out = blk(torch::randn({1, 2, tt, 16}), random_cond(1, tt, 16, 9));
    CHECK(out.size(2) == tt);
    CHECK(torch::isfinite(out).all().item<bool>());
  }
}

TEST_CASE("attention scores shift with the input in time") {
  auto cfg = tiny_config();
  BackboneBlock blk(cfg);
  randomize(*blk, 10, 0.3);
  torch::NoGradGuard g;
  auto x = torch::randn({1, 2, 12, 16}, torch::kDouble);
  blk->to(torch::kDouble);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(4);
  ConditionEmbedding cond{torch::randn({1, 12, 16}, gen, torch::kDouble),
                          torch::randn({1, 16}, gen, torch::kDouble)};
  auto scores = blk->attention_scores(x, cond);
  const int k = 5;
  ConditionEmbedding shifted{torch::roll(cond.c_prime, {k}, {1}), cond.t_prime};
  auto moved = blk->attention_scores(torch::roll(x, {k}, {2}), shifted);
  CHECK(torch::allclose(moved, torch::roll(scores, {k, k}, {-2, -1}), 1e-10, 1e-12));
}

TEST_CASE("lse forward preserves shape and is deterministic") {
  LseConfig cfg;
  cfg.n_blocks = 2;
  cfg.hidden = 64;
  LseNet net(cfg);
  randomize(*net, 12, 0.05);
  torch::NoGradGuard g;
  for (std::int64_t t : {2, 100, 400}) {
    auto x = torch::randn({1, 592, t});
    auto mel = torch::randn({1, 80, t});
    auto step = torch::tensor({500}, torch::kLong);
    auto a = net(x, mel, step);
    CHECK(a.sizes() == x.sizes());
    CHECK(torch::equal(a, net(x, mel, step)));
  }
  auto odd = net->forward_padded(torch::randn({1, 592, 7}), torch::randn({1, 80, 7}),
                                 torch::tensor({3}, torch::kLong), -1.0, -1.0);
  CHECK(odd.size(-1) == 7);
  CHECK_THROWS_AS(net(torch::randn({1, 592, 8}), torch::randn({1, 80, 6}),
                      torch::tensor({3}, torch::kLong)),
                  ShapeError);
}

TEST_CASE("input gradient matches central differences") {
  LseNet net(tiny_config());
  net->to(torch::kDouble);
  randomize(*net, 13, 0.3);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(14);
  auto x = torch::randn({1, 16, 8}, gen, torch::kDouble).requires_grad_(true);
  auto mel = torch::randn({1, 8, 8}, gen, torch::kDouble);
  auto weights = torch::randn({1, 16, 8}, gen, torch::kDouble);
  auto t = torch::tensor({37}, torch::kLong);
  auto loss = [&](const torch::Tensor& in) { return (net(in, mel, t) * weights).sum(); };
  loss(x).backward();
  auto analytic = x.grad().clone();

  torch::NoGradGuard g;
  auto numeric = torch::zeros_like(analytic);
  auto flat = x.detach().clone().view({-1});
  const double h = 1e-6;
  for (std::int64_t i = 0; i < flat.numel(); ++i) {
    const double orig = flat[i].item<double>();
    flat[i] = orig + h;
    const double up = loss(flat.view({1, 16, 8})).item<double>();
    flat[i] = orig - h;
    const double down = loss(flat.view({1, 16, 8})).item<double>();
    flat[i] = orig;
    numeric.view({-1})[i] = (up - down) / (2 * h);
  }
  const double rel = ((analytic - numeric).norm() / numeric.norm()).item<double>();
  CHECK(rel < 1e-3);
  CHECK(numeric.norm().item<double>() > 1e-3);
}

TEST_CASE("parameter count of the default configuration") {
  LseConfig cfg;
  // Hand count (hidden 320, 74 frequency rows, 2x8 patches):
  //   patch embed        16*320 + 320                          =      5,440
  //   timestep mlp       256*320 + 320 + 320*320 + 320          =    184,960
  //   mel projection     160*320 + 320 + 320*320 + 320          =    154,240
  //   per block: adaLN 616,320 + qkv 308,160 + out 102,720
  //              + row embed 23,680 + row map 5,476
  //              + fc1 410,880 + fc2 409,920                    =  1,877,156
  //   final: adaLN 205,440 + projection 5,136                   =    210,576
  //   total 5,440 + 184,960 + 154,240 + 8 * 1,877,156 + 210,576 = 15,572,464
  const std::int64_t hand = 15572464;
  CHECK(parameter_count(cfg) == hand);
  LseNet net(cfg);
  std::int64_t n = 0;
  for (const auto& p : net->parameters()) n += p.numel();
  CHECK(n == hand);

  auto tiny = tiny_config();
  LseNet small(tiny);
  n = 0;
  for (const auto& p : small->parameters()) n += p.numel();
  CHECK(n == parameter_count(tiny));
}

TEST_CASE("invalid configurations are rejected") {
  LseConfig cfg;
  cfg.patch_f = 7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = LseConfig{};
  cfg.n_heads = 7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
