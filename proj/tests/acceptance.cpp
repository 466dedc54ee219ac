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

// Acceptance suite: one line per criterion, exit status 0 only if all pass.

#include <torch/torch.h>

#include <ATen/CPUGeneratorImpl.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "lsevoc/cli.hpp"
#include "lsevoc/data.hpp"
#include "lsevoc/diffusion.hpp"
#include "lsevoc/evalkit.hpp"
#include "lsevoc/hash.hpp"
#include "lsevoc/lse_net.hpp"
#include "lsevoc/spectral.hpp"
#include "lsevoc/training.hpp"
#include "lsevoc/vocos.hpp"
#include "lsevoc/wav.hpp"

using namespace lsevoc;
namespace fs = std::filesystem;

namespace {

bool g_verbose = false;
fs::path g_scratch;

// Accumulates sub-check results for one criterion.
class Report {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
    if (g_verbose) std::cerr << "    " << (ok ? "ok   " : "FAIL ") << what << "\n";
  }
  void note(const std::string& s) {
    notes_.push_back(s);
    if (g_verbose) std::cerr << "    " << s << "\n";
  }
  bool passed() const { return failures_.empty(); }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + ("failed: " + f);
    for (const auto& n : notes_) s += (s.empty() ? "" : "; ") + n;
    return s;
  }

 private:
  std::vector<std::string> failures_, notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  auto p = g_scratch / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

double max_abs(const torch::Tensor& t) { return t.abs().max().item<double>(); }

torch::Tensor sweep_tensor(double seconds, double f0, double f1, int harmonics, double amp = 0.5) {
  auto v = data::harmonic_sweep(seconds, f0, f1, harmonics, 44100, amp);
  return torch::from_blob(v.data(), {static_cast<std::int64_t>(v.size())}, torch::kFloat).clone();
}

void randomize(torch::nn::Module& m, std::uint64_t seed, double scale) {
  torch::NoGradGuard g;
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  for (auto& p : m.parameters()) p.copy_(torch::randn(p.sizes(), gen, p.options()) * scale);
}

// ---------------------------------------------------------------------------

void linear_bank_count(Report& r) {
  spectral::SpectralConfig cfg;
  const double df = spectral::linear_hop(8000.0, 80);
  const auto banks = static_cast<int>(std::floor(22050.0 / df));
  r.note("delta_f " + fmt("%.4f", df) + " Hz, banks " + std::to_string(banks));
  r.check(banks == 592, "floor(22050 / delta_f) == 592");
  r.check(cfg.n_linear() == 592, "default config has 592 linear banks");
  r.check(spectral::build_linear_filterbank(cfg).size(0) == 592, "linear filterbank has 592 rows");
}

void dsp_round_trips(Report& r) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1.0, 22050.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double hz = u(rng);
    worst = std::max(worst, std::abs(spectral::mel_to_hz(spectral::hz_to_mel(hz)) - hz) / hz);
  }
  r.note("mel-hz rel " + fmt("%.2e", worst));
  r.check(worst < 1e-9, "mel<->hz inverse to 1e-9 relative");

  spectral::SpectralConfig cfg;
  const auto p = spectral::StftParams::from(cfg);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(2);
  auto x = 0.5 * torch::randn({3 * 44100}, gen);
  auto y = spectral::istft(spectral::stft(x, p), p).narrow(0, 0, x.size(0));
  const auto w = cfg.window_size;
  const double interior = max_abs((y - x).narrow(0, w, x.size(0) - 2 * w));
  r.note("istft interior " + fmt("%.2e", interior));
  r.check(interior < 1e-4, "stft->istft interior error < 1e-4");

  double norm_err = 0.0;
  for (bool per_bin : {false, true}) {
    spectral::SpectralConfig c;
    if (per_bin) {
      c.per_bin_norm = true;
      auto m = torch::linspace(-6.0, -2.0, 592, torch::kDouble), s = torch::linspace(1.0, 3.0, 592, torch::kDouble);
      c.norm.linear_mean.assign(m.data_ptr<double>(), m.data_ptr<double>() + 592);
      c.norm.linear_std.assign(s.data_ptr<double>(), s.data_ptr<double>() + 592);
    } else {
      c.norm.linear_mean = {-4.0};
      c.norm.linear_std = {2.5};
    }
    auto v = torch::rand({592, 60}, gen) * 15.0 + c.loudness_floor() + 1e-3;
    auto back = spectral::denormalize(spectral::normalize(v, spectral::FeatureKind::linear, c),
                                      spectral::FeatureKind::linear, c);
    norm_err = std::max(norm_err, ((back - v).abs() / v.abs().clamp_min(1.0)).max().item<double>());
  }
  r.note("norm rel " + fmt("%.2e", norm_err));
  r.check(norm_err < 1e-5, "denormalize(normalize(x)) == x above the floor");
}

void diffusion_oracle(Report& r) {
  using namespace diffusion;
  auto sched = NoiseSchedule::linear();
  const double m = 0.7, s = 0.6;
  EpsModel oracle = [&sched, m, s](const torch::Tensor& x, const torch::Tensor&, const torch::Tensor& t) {
    auto ab = sched.alpha_bar_tensor().index_select(0, t).to(x.scalar_type());
    std::vector<std::int64_t> shape(x.dim(), 1);
    shape[0] = x.size(0);
    ab = ab.view(shape);
    return (1.0 - ab).sqrt() * (x - ab.sqrt() * m) / (ab * s * s + 1.0 - ab);
  };
  auto plan = SamplerPlan::karras(sched, 32);
  auto cond = torch::zeros({8, 1, 64}, torch::kDouble);
  std::vector<std::uint64_t> seeds{21, 22, 23, 24, 25, 26, 27, 28};
  auto x = dpmpp_2m_sample(oracle, cond, 16, plan, sched, seeds);
  const auto n = static_cast<double>(x.numel());
  const double mean = x.mean().item<double>(), var = x.var().item<double>();
  r.note("cells " + std::to_string(x.numel()) + ", mean " + fmt("%.4f", mean) + ", var " + fmt("%.4f", var));
  r.check(n >= 4096, "at least 4096 cells");
  r.check(std::abs(mean - m) < 3.0 * s / std::sqrt(n), "sample mean within 3 standard errors");
  r.check(std::abs(var - s * s) < 0.1 * s * s, "sample variance within 10%");

  auto gen = make_generator(5);
  const std::int64_t cells = 20000;
  bool all = true;
  for (int t : {0, 100, 300, 600, 999}) {
    auto x0 = m + s * torch::randn({cells}, gen, torch::kDouble);
    auto eps = torch::randn({cells}, gen, torch::kDouble);
    auto xt = forward_diffuse(x0, t, eps, sched);
    const double ab = sched.alpha_bars[static_cast<std::size_t>(t)];
    const double expected = ab * s * s + (1.0 - ab);
    const double se = expected * std::sqrt(2.0 / (cells - 1));
    all = all && std::abs(xt.var().item<double>() - expected) < 3.0 * se;
  }
  r.check(all, "forward-process variance matches the closed form within 3 standard errors");
}

void architecture_invariants(Report& r) {
  torch::NoGradGuard g;
  lse::LseConfig cfg;
  cfg.n_blocks = 2;
  lse::LseNet net(cfg);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(6);
  auto x = torch::randn({1, 74, 25, cfg.hidden}, gen);
  lse::ConditionEmbedding cond{torch::randn({1, 25, cfg.hidden}, gen), torch::randn({1, cfg.hidden}, gen)};
  bool ident = true;
  for (const auto& blk : *net->blocks) ident = ident && torch::equal(blk->as<lse::BackboneBlock>()->forward(x, cond), x);
  r.check(ident, "LSE backbone blocks are exact identities at initialization");

  vocos::Vocos2DConfig vc;
  vc.n_blocks = 3;
  vc.hidden = 16;
  vc.layer_scale_init = 0.0;
  torch::manual_seed(7);
  vocos::Vocos2D v2d(vc, spectral::SpectralConfig{});
  auto x_in = torch::randn({2, 592, 9}, gen) - 4.0;
  auto h = v2d->embed(x_in);
  r.check(torch::equal(v2d->backbone(h, x_in), h), "Vocos2D backbone is the identity at gamma = 0");

  lse::LseConfig mid;
  mid.n_blocks = 2;
  mid.hidden = 64;
  lse::LseNet shared(mid);
  randomize(*shared, 8, 0.05);
  bool shapes = true;
  for (std::int64_t t : {2, 50, 400}) {
    auto out = shared(torch::randn({1, 592, t}, gen), torch::randn({1, 80, t}, gen), torch::tensor({500}, torch::kLong));
    shapes = shapes && out.size(-1) == t && torch::isfinite(out).all().item<bool>();
  }
  r.check(shapes, "one LSE weight set handles T in {2, 50, 400}");

  lse::LseConfig tiny;
  tiny.n_blocks = 1;
  tiny.n_heads = 2;
  tiny.hidden = 16;
  tiny.n_linear = 32;
  tiny.n_mel = 8;
  tiny.time_embed_dim = 16;
  lse::BackboneBlock blk(tiny);
  randomize(*blk, 9, 0.3);
  blk->freq_mix.copy_(torch::eye(4));
  blk->freq_embed.zero_();
  auto a = torch::randn({1, 4, 9, 16}, gen);
  lse::ConditionEmbedding c9{torch::randn({1, 9, 16}, gen), torch::randn({1, 16}, gen)};
  auto base = blk(a, c9);
  bool isolated = true;
  for (std::int64_t f = 0; f < 4; ++f) {
    auto b = a.clone();
    b[0][f][3] += torch::randn({16}, gen);
    auto delta = (blk(b, c9) - base).abs().sum({-1, -2})[0];
    for (std::int64_t o = 0; o < 4; ++o) {
      const double d = delta[o].item<double>();
      isolated = isolated && (o == f ? d > 0.0 : d == 0.0);
    }
  }
  r.check(isolated, "frequency rows stay isolated when mixing is ablated");
}

double relative_fd_error(const std::function<torch::Tensor(const torch::Tensor&)>& loss, torch::Tensor x, double h) {
  x = x.detach().clone().requires_grad_(true);
  auto analytic = torch::autograd::grad({loss(x)}, {x})[0];
  torch::NoGradGuard g;
  auto numeric = torch::zeros_like(analytic);
  auto flat = x.detach().clone().view({-1});
  for (std::int64_t i = 0; i < flat.numel(); ++i) {
    const double orig = flat[i].item<double>();
    flat[i] = orig + h;
    const double up = loss(flat.view(x.sizes())).item<double>();
    flat[i] = orig - h;
    const double down = loss(flat.view(x.sizes())).item<double>();
    flat[i] = orig;
    numeric.view({-1})[i] = (up - down) / (2 * h);
  }
  return ((analytic - numeric).norm() / numeric.norm()).item<double>();
}

void gradient_checks(Report& r) {
  lse::LseConfig tiny;
  tiny.n_blocks = 1;
  tiny.n_heads = 2;
  tiny.hidden = 16;
  tiny.n_linear = 16;
  tiny.n_mel = 8;
  tiny.time_embed_dim = 16;
  lse::LseNet net(tiny);
  net->to(torch::kDouble);
  randomize(*net, 10, 0.3);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(11);
  auto mel = torch::randn({1, 8, 8}, gen, torch::kDouble);
  auto wts = torch::randn({1, 16, 8}, gen, torch::kDouble);
  auto t = torch::tensor({37}, torch::kLong);
  const double lse_err = relative_fd_error([&](const torch::Tensor& in) { return (net(in, mel, t) * wts).sum(); },
                                           torch::randn({1, 16, 8}, gen, torch::kDouble), 1e-6);



  auto c = torch::randn({257}, gen, torch::kDouble);
  vocos::DADraw d{-3.5, 41, 2.4};
  const double da_err = relative_fd_error([&](const torch::Tensor& w) { return (vocos::da_transform(w, d).pow(3) * c).sum(); },
                                          torch::randn({257}, gen, torch::kDouble), 1e-5);
  r.note("lse rel " + fmt("%.2e", lse_err) + ", da rel " + fmt("%.2e", da_err));
  r.check(lse_err < 1e-3, "tiny LSE finite differences within 1e-3 relative");
  r.check(da_err < 1e-3, "da_transform finite differences within 1e-3 relative");
}

void da_contract(Report& r) {
  auto opts = torch::TensorOptions().dtype(torch::kDouble);
  double worst = 0.0;
  for (std::int64_t n : {4096, 4097, 44100}) {
    auto w = torch::randn({n}, opts);
    auto mag = torch::fft::rfft(w).abs();
    for (double theta : {0.3, 1.7, 3.0, 4.9}) {
      auto rot = torch::fft::rfft(vocos::apply_phase_rotation(w, theta)).abs();
      worst = std::max(worst, ((rot - mag).abs() / mag.clamp_min(1e-12)).max().item<double>());
    }
  }
  r.note("magnitude rel " + fmt("%.2e", worst));
  r.check(worst < 1e-5, "phase rotation preserves magnitude spectra to 1e-5 relative");

  vocos::DADraw pi{0.0, 0, std::numbers::pi};
  auto wd = torch::randn({4410}, opts);
  auto wf = torch::randn({2, 4410});
  r.check(torch::equal(vocos::da_transform(wd, pi), -wd) && torch::equal(vocos::da_transform(wf, {pi, pi}), -wf),
          "theta = pi, g = 0, s = 0 yields exact negation");

  auto gen = diffusion::make_generator(12);
  auto draws = vocos::draw_augmentations(vocos::DAConfig{}, 10000, gen);
  double lo = 1e9, hi = -1e9;
  for (const auto& d : draws) lo = std::min(lo, d.gain_db), hi = std::max(hi, d.gain_db);
  auto x = torch::randn({64, 2048});
  std::vector<vocos::DADraw> sub(draws.begin(), draws.begin() + 64);
  auto y = vocos::da_transform(x, sub);
  auto ratio_db = 20.0 * (y.pow(2).sum(-1).sqrt() / x.pow(2).sum(-1).sqrt()).log10();
  const double applied = ratio_db.abs().max().item<double>();
  r.note("gain range [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "] dB");
  r.check(lo >= -6.0 && hi <= 6.0, "gain within +-6 dB over 10^4 draws");
  r.check(applied <= 6.0 + 1e-4, "applied energy change within +-6 dB");
}

// Returns the first step at which the trailing mean of `window` losses falls
// below `fraction` of the first window's mean, or -1.
std::int64_t loss_drop_step(const std::function<double()>& step, std::int64_t max_steps, int window,
                            double fraction, double& early, double& last) {
  std::vector<double> losses;
  double run = 0.0;
  early = last = std::numeric_limits<double>::quiet_NaN();
  for (std::int64_t i = 0; i < max_steps; ++i) {
    losses.push_back(step());
    run += losses.back();
    if (static_cast<int>(losses.size()) > window) run -= losses[losses.size() - 1 - window];
    if (static_cast<int>(losses.size()) == window) early = run / window;
    if (static_cast<int>(losses.size()) >= 2 * window) {
      last = run / window;
      if (last < fraction * early) return i + 1;
    }
  }
  return -1;
}

spectral::SpectralConfig corpus_norm(const std::vector<spectral::WaveformClip>& corpus) {
  spectral::SpectralConfig spec;
  spectral::FeatureExtractor fx(spec);
  std::vector<torch::Tensor> lin, mel;
  for (const auto& c : corpus) {
    lin.push_back(fx.log_linear(c.samples).flatten());
    mel.push_back(fx.log_mel(c.samples).flatten());
  }
  auto l = torch::cat(lin).to(torch::kDouble), m = torch::cat(mel).to(torch::kDouble);
  spec.norm.linear_mean = {l.mean().item<double>()};
  spec.norm.linear_std = {l.std().item<double>()};
  spec.norm.mel_mean = {m.mean().item<double>()};
  spec.norm.mel_std = {m.std().item<double>()};
  return spec;
}

void toy_training(Report& r) {
  std::vector<spectral::WaveformClip> corpus;
  for (int i = 0; i < 4; ++i) corpus.push_back({sweep_tensor(4.0, 100.0 + 60.0 * i, 2000.0 + 1500.0 * i, 12), 44100});
  auto spec = corpus_norm(corpus);

  lse::LseConfig lc;
  lc.n_blocks = 2;
  lc.n_heads = 2;
  lc.hidden = 32;
  lc.time_embed_dim = 32;
  training::LseTrainConfig lt;
  lt.steps = 2000;
  lt.batch_size = 4;
  lt.segment_seconds = 1.0;
  lt.optim.lr_init = 1e-3;
  lt.seed = 1;
  torch::manual_seed(mix_seed(1, 1));
  training::LseTrainer lse_tr(lc, spec, lt, training::lse_examples(training::segment_clips(corpus, 1.0), spec));
  double early = 0, last = 0;
  const auto drop = loss_drop_step([&] { return lse_tr.step(); }, 2000, 25, 0.5, early, last);
  r.note("lse loss " + fmt("%.3f", early) + " -> " + fmt("%.3f", last) + " at step " + std::to_string(drop));
  r.check(drop > 0, "LSE loss below 50% of its early value within 2000 steps");

  spectral::WaveformClip clip{sweep_tensor(4.0, 150.0, 3000.0, 20), 44100};
  std::vector<torch::Tensor> segs;
  for (auto& s : training::segment_clips({clip}, 1.0)) segs.push_back(s.samples);
  const auto full = clip.samples.unsqueeze(0);
  for (auto kind : {training::VocoderKind::vocos2d, training::VocoderKind::baseline}) {
    vocos::Vocos2DConfig g2d;
    g2d.n_blocks = 2;
    g2d.hidden = 16;
    vocos::BaselineVocosConfig g1d;
    g1d.n_blocks = 2;
    g1d.hidden = 32;
    training::VocoderTrainConfig vt;
    vt.steps = 3000;
    vt.batch_size = 1;
    vt.segment_seconds = 1.0;
    vt.disc.channels = 4;
    vt.seed = 2;
    vt.optim.lr_init = 2e-3;
    torch::manual_seed(mix_seed(2, kind == training::VocoderKind::vocos2d ? 2 : 3));
    training::VocoderTrainer tr(kind, g2d, g1d, spectral::SpectralConfig{}, vt, segs);
    const double initial = tr.resynthesis_mel_l1(full);
    double now = initial;
    std::int64_t reached = -1;
    for (std::int64_t s = 1; s <= 3000; ++s) {
      tr.step();
      if (s % 50 == 0) {
        now = tr.resynthesis_mel_l1(full);
        if (g_verbose && s % 250 == 0) std::cerr << "    " << to_string(kind) << " step " << s << " mel-l1 " << now << "\n";
        if (now < 0.35 * initial) {
          reached = s;
          break;
        }
      }
    }
    const std::string name = to_string(kind);
    r.note(name + " mel-l1 " + fmt("%.3f", initial) + " -> " + fmt("%.3f", now) + " at step " + std::to_string(reached));
    r.check(reached > 0, name + " Mel-L1 below 35% of initial within 3000 steps");
  }
}

torch::Tensor broadband(std::uint64_t seed, double seconds) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double f0 = 80.0 + 300.0 * u(rng);
  auto t = sweep_tensor(seconds, f0, f0 * (1.5 + u(rng)), 60, 0.4);
  auto g = at::make_generator<at::CPUGeneratorImpl>(seed);
  return t + 0.02 * torch::randn({t.size(0)}, g);
}

// gt plus brick-wall low-passed stand-ins for the other methods, 6 train and
// 3 test clips each.
fs::path method_fixtures() {
  using eval::brickwall_lowpass;
  auto root = scratch("methods");
  const std::map<std::string, double> cutoffs{{"gt", 0.0}, {"mdctgan", 8000.0}, {"vocos", 11000.0}, {"lse-vocos2d", 16000.0}};
  int id = 0;
  for (const auto& [method, cutoff] : cutoffs) {
    for (const char* split : {"train", "test"}) {
      fs::create_directories(root / method / split);
      for (int i = 0; i < (std::string(split) == "train" ? 6 : 3); ++i, ++id) {
        auto w = broadband(static_cast<std::uint64_t>(5000 + id), 1.0);
        if (cutoff > 0) w = brickwall_lowpass(w, cutoff, 44100);
        std::vector<float> v(w.data_ptr<float>(), w.data_ptr<float>() + w.numel());
        wav::write(root / method / split / (method + std::to_string(id) + ".wav"), v, 44100);
      }
    }
  }
  return root;
}

void evaluation_harness(Report& r) {
  using namespace eval;
  spectral::SpectralConfig spec;
  spectral::FeatureExtractor fx(spec);
  ClassifierConfig cc;
  cc.channels = {8, 16, 24, 32};
  ClassifierTrainConfig tc;
  tc.steps = 150;
  tc.crop_seconds = 1.0;
  tc.seed = 11;

  auto features = [&](InputKind kind, int first, int count, double cutoff) {
    std::vector<torch::Tensor> out;
    for (int i = first; i < first + count; ++i) {
      auto w = broadband(static_cast<std::uint64_t>(1000 + i), 1.0);
      if (cutoff > 0) w = brickwall_lowpass(w, cutoff, 44100);
      out.push_back(classifier_features(fx, kind, w));
    }
    return out;
  };

  for (auto kind : {InputKind::linear_filterbank, InputKind::raw_log_magnitude}) {
    cc.input_kind = kind;
    torch::manual_seed(2);
    ConvNeXtClassifier m(cc, spec.loudness_floor());
    train_classifier(m, features(kind, 0, 12, 0), features(kind, 100, 12, 8000.0), tc, spec);
    const double a = auc(score_all(m, features(kind, 200, 24, 0)), score_all(m, features(kind, 300, 24, 8000.0)));
    r.note(std::string(to_string(kind)) + " AUC " + fmt("%.3f", a));
    r.check(a > 0.95, std::string("real vs 8 kHz low-pass AUC > 0.95 (") + to_string(kind) + ")");
  }

  // Labels assigned at random over real and degraded items alike.
  const auto kind = InputKind::linear_filterbank;
  cc.input_kind = kind;
  auto relabel = [](std::vector<torch::Tensor> a, const std::vector<torch::Tensor>& b, std::uint64_t seed) {
    a.insert(a.end(), b.begin(), b.end());
    std::shuffle(a.begin(), a.end(), std::mt19937_64(seed));
    const auto half = static_cast<std::ptrdiff_t>(a.size() / 2);
    return std::make_pair(std::vector<torch::Tensor>(a.begin(), a.begin() + half),
                          std::vector<torch::Tensor>(a.begin() + half, a.end()));
  };
  auto [pos, neg] = relabel(features(kind, 0, 12, 0), features(kind, 100, 12, 8000.0), 17);
  auto [tpos, tneg] = relabel(features(kind, 400, 100, 0), features(kind, 600, 100, 8000.0), 18);
  torch::manual_seed(2);
  ConvNeXtClassifier shuffled(cc, spec.loudness_floor());
  train_classifier(shuffled, pos, neg, tc, spec);
  const double s = auc(score_all(shuffled, tpos), score_all(shuffled, tneg));
  r.note("shuffled AUC " + fmt("%.3f", s));
  r.check(std::abs(s - 0.5) <= 0.1, "shuffled-label AUC within 0.5 +- 0.1");

  // Regime runner on stand-in method audio.
  const auto root = method_fixtures();
  std::vector<std::string> notices;
  auto audio = load_method_audio(root, standard_methods(), notices);
  RegimeRunConfig rc;
  rc.classifier = cc;
  rc.train.steps = 40;
  rc.train.batch_size = 4;
  rc.train.crop_seconds = 1.0;
  auto table = evaluate_regimes(audio, rc, spec, root / "out");
  std::set<std::pair<std::string, InputKind>> cols;
  for (const auto& row : table.rows) cols.insert({row.regime, row.input_kind});
  bool seen_ok = true;
  int separated = 0, pairs = 0;
  for (const auto& reg : standard_regimes()) {
    for (auto k : rc.input_kinds) {
      const auto* gt = table.find("gt", reg.name, k);
      seen_ok = seen_ok && gt != nullptr && gt->seen;
      for (const auto& m : standard_methods()) {
        const auto* row = table.find(m, reg.name, k);
        const bool neg = std::find(reg.negatives.begin(), reg.negatives.end(), m) != reg.negatives.end();
        seen_ok = seen_ok && row != nullptr && row->seen == (m == kMethodGt || neg);
        if (neg && gt && row) {
          ++pairs;
          separated += gt->mean_score > row->mean_score;
        }
      }
    }
  }
  write_score_csv(root / "out" / "scores.csv", table);
  r.note("table rows " + std::to_string(table.rows.size()) + ", gt above seen negatives in " +
         std::to_string(separated) + "/" + std::to_string(pairs));
  r.check(cols.size() == 8, "8 classifiers (4 regimes x 2 input kinds)");
  r.check(table.rows.size() == 32, "every method scored by every classifier");
  r.check(seen_ok, "seen flags follow each regime's training set");
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli_cmd(std::vector<std::string> args, const fs::path& config) {
  args.insert(args.begin() + 1, {"--config", config.string()});
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0 && g_verbose) std::cerr << "    " << err.str();
  return {code, out.str()};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

// Every command once, in a fresh directory; returns all outputs and stdout.
std::map<std::string, std::string> cli_pipeline(const fs::path& root, const fs::path& config, bool& ok) {
  fs::remove_all(root);
  fs::create_directories(root);
  const auto s = [&](const fs::path& p) { return (root / p).string(); };
  std::vector<std::vector<std::string>> cmds{
      {"toy-corpus", "--out", s("toy")},
      {"extract", "--in", s("toy"), "--out", s("ds")},
      {"train", "--stage", "lse", "--data", s("ds"), "--runs", s("runs")},
      {"train", "--stage", "vocos2d", "--data", s("ds"), "--runs", s("runs")},
      {"train", "--stage", "vocos-baseline", "--data", s("ds"), "--runs", s("runs")},
      {"synth", "--runs", s("runs"), "--input", s("toy/sweep_000.wav"), "--out", s("lse.wav"), "--use-lse",
       "--seed", "3", "--dump-linear", s("lse.lsf")},
      {"synth", "--runs", s("runs"), "--input", s("toy/sweep_001.wav"), "--out", s("base.wav")},
      {"render", "--in", s("toy"), "--out", s("png")},
      {"eval", "--methods", (g_scratch / "methods").string(), "--out", s("eval")},
      {"config"},
  };
  std::string transcript;
  ok = true;
  for (const auto& c : cmds) {
    auto res = cli_cmd(c, config);
    ok = ok && res.code == 0;
    transcript += c.front() + "\n" + res.out;
  }
  auto files = snapshot(root);
  // Remove the root prefix so two roots compare equal.
  std::string t;
  for (std::size_t pos = 0;;) {
    auto hit = transcript.find(root.string(), pos);
    t += transcript.substr(pos, hit == std::string::npos ? std::string::npos : hit - pos);
    if (hit == std::string::npos) break;
    t += "<root>";
    pos = hit + root.string().size();
  }
  files["<stdout>"] = t;
  return files;
}

void reproducibility(Report& r) {
  auto dir = scratch("repro");
  const auto config = dir / "tiny.json";
  std::ofstream(config) << R"({
    "toy": {"n_clips": 4, "seconds": 2.0},
    "data": {"test_ratio": 0.25},
    "diffusion": {"sample_steps": 4},
    "lse": {"n_blocks": 1, "n_heads": 2, "hidden": 16, "time_embed_dim": 16},
    "lse_train": {"steps": 6, "batch_size": 2, "segment_seconds": 1.0, "precision": "fp32", "checkpoint_every": 3},
    "vocos2d": {"n_blocks": 1, "hidden": 8},
    "vocos_baseline": {"n_blocks": 1, "hidden": 16},
    "vocoder_train": {"steps": 3, "batch_size": 1, "segment_seconds": 0.5},
    "discriminator": {"channels": 2},
    "classifier": {"channels": [4, 8, 8, 8]},
    "classifier_train": {"steps": 3, "batch_size": 2, "crop_seconds": 0.5}
  })";
  method_fixtures();
  bool ok_a = false, ok_b = false;
  auto a = cli_pipeline(dir / "run", config, ok_a);
  auto b = cli_pipeline(dir / "run", config, ok_b);
  std::vector<std::string> differing;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end() || it->second != v) differing.push_back(k);
  }
  for (const auto& [k, v] : b) if (!a.count(k)) differing.push_back(k);
  r.check(ok_a && ok_b, "every CLI command succeeds");
  r.note(std::to_string(a.size()) + " outputs compared" + (differing.empty() ? "" : ", first difference " + differing.front()));
  r.check(differing.empty(), "CLI outputs byte-identical across runs");

  // Checkpoint round trip.
  std::vector<spectral::WaveformClip> corpus{{sweep_tensor(1.2, 100, 9000, 8), 44100}};
  spectral::SpectralConfig spec;
  lse::LseConfig lc;
  lc.n_blocks = 1;
  lc.n_heads = 2;
  lc.hidden = 16;
  lc.time_embed_dim = 16;
  training::LseTrainConfig lt;
  lt.steps = 1000;
  lt.batch_size = 2;
  lt.segment_seconds = 0.4;
  lt.seed = 5;
  auto examples = training::lse_examples(training::segment_clips(corpus, 0.4), spec);
  torch::manual_seed(1);
  training::LseTrainer t1(lc, spec, lt, examples);
  for (int i = 0; i < 50; ++i) t1.step();
  const auto ck = t1.checkpoint();
  training::save_checkpoint(dir / "ck1", ck);
  const auto loaded = training::load_checkpoint(dir / "ck1");
  bool tensors = loaded.tensors.size() == ck.tensors.size() && loaded.config == ck.config && loaded.meta == ck.meta;
  for (std::size_t i = 0; tensors && i < ck.tensors.size(); ++i) {
    tensors = loaded.tensors[i].first == ck.tensors[i].first &&
              loaded.tensors[i].second.scalar_type() == ck.tensors[i].second.scalar_type() &&
              torch::equal(loaded.tensors[i].second, ck.tensors[i].second);
  }
  training::save_checkpoint(dir / "ck2", loaded);
  r.check(tensors, "checkpoint load returns identical tensors, config and metadata");
  r.check(slurp(dir / "ck1" / "weights.bin") == slurp(dir / "ck2" / "weights.bin"), "re-saved checkpoint is bitwise identical");

  // Resume continues the loss trace exactly.
  std::vector<double> tail;
  for (int i = 0; i < 120; ++i) tail.push_back(t1.step());
  torch::manual_seed(77);
  training::LseTrainer t2(lc, spec, lt, examples);
  t2.restore(loaded);
  bool same = true;
  for (int i = 0; i < 120; ++i) same = same && t2.step() == tail[static_cast<std::size_t>(i)];
  r.check(same, "LSE resume reproduces 120 further losses exactly");

  std::vector<torch::Tensor> segs;
  for (auto& s : training::segment_clips({{sweep_tensor(0.6, 200, 5000, 8), 44100}}, 0.2)) segs.push_back(s.samples);
  vocos::Vocos2DConfig g2d;
  g2d.n_blocks = 1;
  g2d.hidden = 8;
  vocos::BaselineVocosConfig g1d;
  g1d.n_blocks = 1;
  g1d.hidden = 16;
  training::VocoderTrainConfig vt;
  vt.steps = 1000;
  vt.batch_size = 1;
  vt.segment_seconds = 0.2;
  vt.disc.channels = 2;
  vt.seed = 3;
  torch::manual_seed(2);
  training::VocoderTrainer v1(training::VocoderKind::vocos2d, g2d, g1d, spec, vt, segs);
  for (int i = 0; i < 10; ++i) v1.step();
  training::save_checkpoint(dir / "vck", v1.checkpoint());
  std::vector<std::pair<double, double>> vtail;
  for (int i = 0; i < 100; ++i) {
    auto rep = v1.step();
    vtail.emplace_back(rep.discriminator, rep.generator);
  }
  torch::manual_seed(9);
  training::VocoderTrainer v2(training::VocoderKind::vocos2d, g2d, g1d, spec, vt, segs);
  v2.restore(training::load_checkpoint(dir / "vck"));
  same = true;
  for (int i = 0; i < 100; ++i) {
    auto rep = v2.step();
    same = same && rep.discriminator == vtail[static_cast<std::size_t>(i)].first &&
           rep.generator == vtail[static_cast<std::size_t>(i)].second;
  }
  r.check(same, "Vocos2D resume reproduces 100 further D and G losses exactly");

  // The same through the CLI: 100 + 100 resumed steps against 200 straight.
  const auto ds = (dir / "run" / "ds").string();
  auto straight = cli_cmd({"train", "--stage", "lse", "--data", ds, "--runs", (dir / "straight").string(), "--steps", "200"}, config);
  auto first = cli_cmd({"train", "--stage", "lse", "--data", ds, "--runs", (dir / "resumed").string(), "--steps", "100"}, config);
  auto second = cli_cmd({"train", "--stage", "lse", "--data", ds, "--runs", (dir / "resumed").string(), "--steps", "200", "--resume"}, config);
  r.check(straight.code == 0 && first.code == 0 && second.code == 0, "CLI resume commands succeed");
  r.check(slurp(dir / "straight" / "lse" / "loss.csv") == slurp(dir / "resumed" / "lse" / "loss.csv") &&
              !slurp(dir / "resumed" / "lse" / "loss.csv").empty(),
          "CLI resumed loss log equals an uninterrupted run");
  r.check(slurp(dir / "straight" / "lse" / "checkpoint" / "weights.bin") ==
              slurp(dir / "resumed" / "lse" / "checkpoint" / "weights.bin"),
          "CLI resumed checkpoint equals an uninterrupted run");
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Report&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lsevoc acceptance suite"};
  std::vector<int> only;
  std::string scratch_dir = (fs::temp_directory_path() / "lsevoc_acceptance").string();
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--scratch", scratch_dir, "Working directory");
  app.add_flag("-v,--verbose", g_verbose, "Print each sub-check");
  CLI11_PARSE(app, argc, argv);

  torch::set_num_threads(1);
  at::globalContext().setDeterministicAlgorithms(true, true);
  g_scratch = scratch_dir;
  fs::create_directories(g_scratch);

  const std::vector<Criterion> criteria{
      {1, "linear filterbank count", linear_bank_count},
      {2, "dsp round trips", dsp_round_trips},
      {3, "diffusion oracle", diffusion_oracle},
      {4, "architecture invariants", architecture_invariants},
      {5, "gradient checks", gradient_checks},
      {6, "augmentation contract", da_contract},
      {7, "toy training", toy_training},
      {8, "evaluation harness", evaluation_harness},
      {9, "reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Report r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(r);
    } catch (const std::exception& e) {
      r.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !r.passed();
    std::printf("criterion %d %s: %s (%.1f s) %s\n", c.id, r.passed() ? "PASS" : "FAIL", c.name, secs,
                r.summary().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
