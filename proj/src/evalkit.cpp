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

#include "lsevoc/evalkit.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>

#include "lsevoc/data.hpp"
#include "lsevoc/diffusion.hpp"
#include "lsevoc/error.hpp"
#include "lsevoc/wav.hpp"

namespace lsevoc::eval {

namespace fs = std::filesystem;
namespace nn = torch::nn;

const char* to_string(InputKind k) {
  return k == InputKind::raw_log_magnitude ? "raw_log_magnitude" : "linear_filterbank";
}

InputKind input_kind_from_string(const std::string& name) {
  if (name == "raw_log_magnitude") return InputKind::raw_log_magnitude;
  if (name == "linear_filterbank") return InputKind::linear_filterbank;
  throw ConfigError("unknown input kind '" + name +
                    "' (expected raw_log_magnitude or linear_filterbank)");
}

int ClassifierConfig::total_downsampling() const {
  return std::accumulate(downsampling_ratios.begin(), downsampling_ratios.end(), 1,
                         std::multiplies<int>());
}

void ClassifierConfig::validate() const {
  if (downsampling_ratios.size() != 4 || blocks_per_stage.size() != 4 || channels.size() != 4) {
    throw ConfigError("classifier needs four stages of ratios, blocks and channels");
  }
  if (total_downsampling() != 64) throw ConfigError("classifier downsampling ratios must multiply to 64");
  const int blocks = std::accumulate(blocks_per_stage.begin(), blocks_per_stage.end(), 0);
  if (blocks != n_blocks) throw ConfigError("classifier blocks_per_stage must sum to n_blocks");
  for (int i = 0; i < 4; ++i) {
    if (downsampling_ratios[i] < 1 || blocks_per_stage[i] < 0 || channels[i] < 1) {
      throw ConfigError("classifier stage " + std::to_string(i) + " is invalid");
    }
  }
}

torch::Tensor classifier_features(const spectral::FeatureExtractor& fx, InputKind kind,
                                  const torch::Tensor& w) {
  torch::NoGradGuard g;
  return kind == InputKind::raw_log_magnitude ? fx.log_magnitude(w) : fx.log_linear(w);
}

// ---------------------------------------------------------------------------
// Model

namespace {

torch::Tensor channel_norm(nn::LayerNorm& ln, const torch::Tensor& x) {
  return ln->forward(x.permute({0, 2, 3, 1})).permute({0, 3, 1, 2});
}

void init_weights(nn::Module& m) {
  torch::NoGradGuard g;
  for (auto& item : m.named_parameters(true)) {
    const auto& name = item.key();
    auto& p = item.value();
    const bool is_bias = name.size() >= 4 && name.compare(name.size() - 4, 4, "bias") == 0;
    const bool is_norm = name.find("norm") != std::string::npos;
    const bool is_gamma = name.size() >= 5 && name.compare(name.size() - 5, 5, "gamma") == 0;
    if (is_gamma || is_norm) continue;
    if (is_bias) {
      p.zero_();
    } else {
      p.normal_(0.0, 0.02).clamp_(-0.04, 0.04);
    }
  }
}

}  // namespace

ClassifierBlockImpl::ClassifierBlockImpl(int c) {
  dwconv = register_module("dwconv", nn::Conv2d(nn::Conv2dOptions(c, c, 7).padding(3).groups(c)));
  norm = register_module("norm", nn::LayerNorm(nn::LayerNormOptions({c}).eps(1e-6)));
  pw1 = register_module("pw1", nn::Linear(c, 4 * c));
  pw2 = register_module("pw2", nn::Linear(4 * c, c));
  gamma = register_parameter("gamma", torch::full({c}, 1e-6));
}

torch::Tensor ClassifierBlockImpl::forward(const torch::Tensor& x) {
  auto h = dwconv(x).permute({0, 2, 3, 1});
  h = pw2(torch::gelu(pw1(norm(h)))) * gamma;
  return x + h.permute({0, 3, 1, 2});
}

namespace {

class DownsampleImpl : public nn::Module {
 public:
  DownsampleImpl(int in, int out, int ratio, bool stem) : stem_(stem) {
    norm = register_module("norm", nn::LayerNorm(nn::LayerNormOptions({stem ? out : in}).eps(1e-6)));
    conv = register_module("conv", nn::Conv2d(nn::Conv2dOptions(in, out, ratio).stride(ratio)));
  }
  torch::Tensor forward(const torch::Tensor& x) {
    return stem_ ? channel_norm(norm, conv(x)) : conv(channel_norm(norm, x));
  }
  nn::LayerNorm norm{nullptr};
  nn::Conv2d conv{nullptr};

 private:
  bool stem_;
};
TORCH_MODULE(Downsample);

}  // namespace

std::int64_t ConvNeXtClassifierImpl::content_frames(const torch::Tensor& x) const {
  torch::NoGradGuard g;
  const double tol = 1e-5 * std::max(1.0, std::abs(pad_));
  auto live = (x.to(torch::kDouble) - pad_).abs().gt(tol).any(1).any(0);
  auto idx = live.nonzero();
  return idx.numel() == 0 ? 1 : idx.max().item<std::int64_t>() + 1;
}

ConvNeXtClassifierImpl::ConvNeXtClassifierImpl(ClassifierConfig cfg, double pad_value)
    : cfg_(std::move(cfg)), pad_(pad_value) {
  cfg_.validate();
  downsample = register_module("downsample", nn::ModuleList());
  stages = register_module("stages", nn::ModuleList());
  for (int i = 0; i < 4; ++i) {
    const int in = i == 0 ? 1 : cfg_.channels[i - 1];
    downsample->push_back(Downsample(in, cfg_.channels[i], cfg_.downsampling_ratios[i], i == 0));
    nn::Sequential stage;
    for (int b = 0; b < cfg_.blocks_per_stage[i]; ++b) stage->push_back(ClassifierBlock(cfg_.channels[i]));
    stages->push_back(stage);
  }
  head_norm = register_module("head_norm", nn::LayerNorm(nn::LayerNormOptions({cfg_.channels[3]}).eps(1e-6)));
  head = register_module("head", nn::Linear(cfg_.channels[3], 1));
  init_weights(*this);
}

void ConvNeXtClassifierImpl::set_standardization(double mean, double std) {
  if (!(std > 0.0) || !std::isfinite(mean)) throw DataError("classifier standardization is degenerate");
  mean_ = mean;
  std_ = std;
}

torch::Tensor ConvNeXtClassifierImpl::prepare(const torch::Tensor& feats, std::int64_t& f_valid,
                                              std::int64_t& t_valid, std::int64_t& t_extent) {
  if (feats.dim() != 2 && feats.dim() != 3) throw ShapeError("classifier expects [B, F, T] features");
  auto x = feats.dim() == 2 ? feats.unsqueeze(0) : feats;
  if (x.size(-1) < 1 || x.size(-2) < 1) throw ShapeError("classifier: empty spectrogram");
  const auto r = cfg_.total_downsampling();
  t_extent = content_frames(x);
  f_valid = (x.size(1) + r - 1) / r;
  t_valid = (t_extent + r - 1) / r;
  x = x.narrow(2, 0, t_extent);
  x = (x.to(torch::kFloat) - mean_) / std_;
  const double pad = (pad_ - mean_) / std_;
  x = torch::constant_pad_nd(x, {0, t_valid * r - x.size(2), 0, f_valid * r - x.size(1)}, pad);
  return x.unsqueeze(1);
}

namespace {

torch::Tensor mask_valid(const torch::Tensor& x, std::int64_t fv, std::int64_t tv) {
  if (fv == x.size(2) && tv == x.size(3)) return x;
  auto m = torch::zeros({1, 1, x.size(2), x.size(3)}, x.options());
  m.narrow(2, 0, fv).narrow(3, 0, tv).fill_(1.0);
  return x * m;
}

}  // namespace

torch::Tensor ConvNeXtClassifierImpl::feature_map(const torch::Tensor& feats) {
  std::int64_t fv = 0, tv = 0, t = 0;
  auto x = prepare(feats, fv, tv, t);
  std::int64_t f = feats.size(-2);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto r = cfg_.downsampling_ratios[i];
    f = (f + r - 1) / r;
    t = (t + r - 1) / r;
    x = mask_valid(downsample[i]->as<DownsampleImpl>()->forward(x), f, t);
    for (auto& block : *stages[i]->as<nn::SequentialImpl>()) {
      x = mask_valid(block.forward(x), f, t);
    }
  }
  return x.narrow(2, 0, fv).narrow(3, 0, tv);
}

torch::Tensor ConvNeXtClassifierImpl::forward(const torch::Tensor& feats) {
  auto pooled = feature_map(feats).mean({2, 3});
  return head(head_norm(pooled)).squeeze(-1);
}

torch::Tensor ConvNeXtClassifierImpl::score(const torch::Tensor& feats) {
  return torch::sigmoid(forward(feats));
}

// ---------------------------------------------------------------------------
// Training

void ClassifierTrainConfig::validate() const {
  if (steps < 0) throw ConfigError("classifier_train.steps must be >= 0");
  if (batch_size < 1) throw ConfigError("classifier_train.batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("classifier_train.lr must be > 0");
  if (!(crop_seconds > 0.0)) throw ConfigError("classifier_train.crop_seconds must be > 0");
}

namespace {

torch::Tensor crop_or_pad(const torch::Tensor& f, std::int64_t frames, double pad, at::Generator& gen) {
  const auto t = f.size(-1);
  if (t == frames) return f;
  if (t < frames) return torch::constant_pad_nd(f, {0, frames - t}, pad);
  const auto off = torch::randint(t - frames + 1, {1}, gen, torch::kLong).item<std::int64_t>();
  return f.narrow(-1, off, frames);
}

}  // namespace

ClassifierTrainResult train_classifier(ConvNeXtClassifier& model,
                                       const std::vector<torch::Tensor>& positives,
                                       const std::vector<torch::Tensor>& negatives,
                                       const ClassifierTrainConfig& cfg,
                                       const spectral::SpectralConfig& spec) {
  cfg.validate();
  if (positives.empty() || negatives.empty()) {
    throw DataError("classifier training needs both positive and negative items");
  }
  ClassifierTrainResult res;
  const double np = static_cast<double>(positives.size());
  const double nn_ = static_cast<double>(negatives.size());
  if (np > 10.0 * nn_ || nn_ > 10.0 * np) {
    res.pos_weight = nn_ / np;
    res.warnings.push_back("class imbalance " + std::to_string(positives.size()) + ":" +
                           std::to_string(negatives.size()) + " exceeds 10:1; positives weighted by " +
                           std::to_string(res.pos_weight));
    std::cerr << "warning: " << res.warnings.back() << "\n";
  }

  std::vector<torch::Tensor> items;
  std::vector<float> labels;
  double sum = 0.0, sq = 0.0, count = 0.0;
  for (const auto* set : {&positives, &negatives}) {
    for (const auto& f : *set) {
      auto d = f.to(torch::kDouble);
      sum += d.sum().item<double>();
      sq += d.pow(2).sum().item<double>();
      count += static_cast<double>(d.numel());
      items.push_back(f.to(torch::kFloat));
      labels.push_back(set == &positives ? 1.0f : 0.0f);
    }
  }
  const double mean = sum / count;
  model->set_standardization(mean, std::sqrt(std::max(sq / count - mean * mean, 1e-12)));

  const auto frames =
      std::max<std::int64_t>(1, std::llround(cfg.crop_seconds * spec.frames_per_second));
  const auto f_bins = items.front().size(0);
  for (const auto& it : items) {
    if (it.size(0) != f_bins) throw ShapeError("classifier items must share one bin count");
  }
  torch::optim::AdamW opt(model->parameters(),
                          torch::optim::AdamWOptions(cfg.lr).weight_decay(cfg.weight_decay));
  auto pos_weight = torch::full({1}, res.pos_weight);
  model->train();
  for (std::int64_t step = 0; step < cfg.steps; ++step) {
    auto gen = diffusion::make_generator(mix_seed(cfg.seed, static_cast<std::uint64_t>(step)));
    auto idx = torch::randint(static_cast<std::int64_t>(items.size()), {cfg.batch_size}, gen, torch::kLong);
    std::vector<torch::Tensor> xs;
    std::vector<float> ys;
    for (std::int64_t b = 0; b < cfg.batch_size; ++b) {
      const auto i = static_cast<std::size_t>(idx[b].item<std::int64_t>());
      xs.push_back(crop_or_pad(items[i], frames, model->pad_value(), gen));
      ys.push_back(labels[i]);
    }
    auto y = torch::tensor(ys);
    auto logits = model->forward(torch::stack(xs));
    auto loss = torch::binary_cross_entropy_with_logits(
        logits, y, {}, pos_weight, at::Reduction::Mean);
    opt.zero_grad();
    loss.backward();
    opt.step();
    res.losses.push_back(loss.item<double>());
  }
  model->eval();
  res.final_loss = res.losses.empty() ? 0.0 : res.losses.back();
  return res;
}

std::vector<double> score_all(ConvNeXtClassifier& model, const std::vector<torch::Tensor>& feats) {
  torch::NoGradGuard g;
  model->eval();
  std::vector<double> out;
  out.reserve(feats.size());
  for (const auto& f : feats) out.push_back(model->score(f).item<double>());
  return out;
}

double auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) throw DataError("auc needs positive and negative scores");
  std::vector<std::pair<double, int>> all;
  for (double s : pos) all.emplace_back(s, 1);
  for (double s : neg) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].second == 1) rank_sum += avg;
    }
    i = j;
  }
  const double np = static_cast<double>(pos.size()), nn_ = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn_);
}

training::Checkpoint classifier_checkpoint(ConvNeXtClassifier& model, const std::string& regime) {
  const auto& c = model->config();
  training::Checkpoint ck;
  ck.config = {{"stage", "classifier"},
               {"regime", regime},
               {"classifier",
                {{"n_blocks", c.n_blocks},
                 {"downsampling_ratios", c.downsampling_ratios},
                 {"blocks_per_stage", c.blocks_per_stage},
                 {"channels", c.channels},
                 {"input_kind", to_string(c.input_kind)}}}};
  ck.meta = {{"input_mean", model->input_mean()},
             {"input_std", model->input_std()},
             {"pad_value", model->pad_value()}};
  training::append_module(ck.tensors, "model", *model);
  return ck;
}

ConvNeXtClassifier classifier_from_checkpoint(const training::Checkpoint& ckpt,
                                              const spectral::SpectralConfig& spec) {
  if (ckpt.config.value("stage", std::string()) != "classifier") {
    throw DataError("checkpoint is not a classifier checkpoint");
  }
  const auto& j = ckpt.config.at("classifier");
  ClassifierConfig c;
  c.n_blocks = j.at("n_blocks").get<int>();
  c.downsampling_ratios = j.at("downsampling_ratios").get<std::vector<int>>();
  c.blocks_per_stage = j.at("blocks_per_stage").get<std::vector<int>>();
  c.channels = j.at("channels").get<std::vector<int>>();
  c.input_kind = input_kind_from_string(j.at("input_kind").get<std::string>());
  ConvNeXtClassifier m(c, ckpt.meta.at("pad_value").get<double>());
  training::load_module(*m, ckpt, "model");
  m->set_standardization(ckpt.meta.at("input_mean").get<double>(), ckpt.meta.at("input_std").get<double>());
  m->eval();
  return m;
}

// ---------------------------------------------------------------------------
// Regimes

const std::vector<std::string>& standard_methods() {
  static const std::vector<std::string> m{"gt", "mdctgan", "vocos", "lse-vocos2d"};
  return m;
}

const std::vector<RegimeSpec>& standard_regimes() {
  static const std::vector<RegimeSpec> r{{"mdctgan-only", {"mdctgan"}},
                                         {"vocos-only", {"vocos"}},
                                         {"both", {"mdctgan", "vocos"}},
                                         {"lse-vocos2d-only", {"lse-vocos2d"}}};
  return r;
}

const RegimeSpec& regime_by_name(const std::string& name) {
  for (const auto& r : standard_regimes()) {
    if (r.name == name) return r;
  }
  throw UsageError("unknown regime '" + name +
                   "' (expected mdctgan-only, vocos-only, both or lse-vocos2d-only)");
}

const ScoreRow* ScoreTable::find(const std::string& method, const std::string& regime,
                                 InputKind kind) const {
  for (const auto& r : rows) {
    if (r.method == method && r.regime == regime && r.input_kind == kind) return &r;
  }
  return nullptr;
}

void write_score_csv(const fs::path& path, const ScoreTable& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << "method,seen,regime,input_kind,mean_score,count\n";
  char buf[64];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.mean_score);
    os << r.method << "," << (r.seen ? 1 : 0) << "," << r.regime << "," << to_string(r.input_kind)
       << "," << buf << "," << r.count << "\n";
  }
  if (!os) throw DataError("write failed for " + path.string());
}

namespace {

// 3x5 glyphs for "0123456789.", one row per 3-bit mask.
constexpr std::uint8_t kGlyphs[11][5] = {
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
    {0, 0, 0, 0, 2}};

void fill(Image& img, int x0, int y0, int w, int h, std::array<std::uint8_t, 3> c) {
  for (int y = std::max(0, y0); y < std::min(img.height, y0 + h); ++y) {
    for (int x = std::max(0, x0); x < std::min(img.width, x0 + w); ++x) {
      auto* p = &img.rgb[static_cast<std::size_t>((y * img.width + x) * 3)];
      p[0] = c[0];
      p[1] = c[1];
      p[2] = c[2];
    }
  }
}

void draw_text(Image& img, int x, int y, const std::string& s, int scale,
               std::array<std::uint8_t, 3> c) {
  for (char ch : s) {
    const int g = ch == '.' ? 10 : (ch >= '0' && ch <= '9' ? ch - '0' : -1);
    if (g >= 0) {
      for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 3; ++col) {
          if (kGlyphs[g][row] & (4 >> col)) fill(img, x + col * scale, y + row * scale, scale, scale, c);
        }
      }
    }
    x += 4 * scale;
  }
}

}  // namespace

void render_score_figure(const fs::path& path, const ScoreTable& table) {
  std::vector<std::string> methods;
  std::vector<std::pair<std::string, InputKind>> cols;
  for (const auto& r : table.rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    const auto col = std::make_pair(r.regime, r.input_kind);
    if (std::find(cols.begin(), cols.end(), col) == cols.end()) cols.push_back(col);
  }
  constexpr int cw = 64, ch = 32, margin = 4;
  Image img;
  img.width = std::max<int>(1, static_cast<int>(cols.size()) * cw + 2 * margin);
  img.height = std::max<int>(1, static_cast<int>(methods.size()) * ch + 2 * margin);
  img.rgb.assign(static_cast<std::size_t>(img.width * img.height * 3), 255);
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (std::size_t ci = 0; ci < cols.size(); ++ci) {
      const auto* r = table.find(methods[mi], cols[ci].first, cols[ci].second);
      if (r == nullptr) continue;
      const int x = margin + static_cast<int>(ci) * cw;
      const int y = margin + static_cast<int>(mi) * ch;
      fill(img, x + 1, y + 1, cw - 2, ch - 2, viridis(r->mean_score));
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.2f", r->mean_score);
      const std::array<std::uint8_t, 3> ink = r->mean_score > 0.6 ? std::array<std::uint8_t, 3>{0, 0, 0}
                                                                  : std::array<std::uint8_t, 3>{255, 255, 255};
      draw_text(img, x + 10, y + 8, buf, 3, ink);
    }
  }
  write_png(path, img);
}

void check_disjoint(const std::map<std::string, MethodAudio>& audio) {
  std::set<std::string> train;
  for (const auto& [m, a] : audio) train.insert(a.train_ids.begin(), a.train_ids.end());
  for (const auto& [m, a] : audio) {
    for (const auto& id : a.test_ids) {
      if (train.count(id)) {
        throw DataError("test item '" + id + "' of method " + m + " also appears in training data");
      }
    }
  }
}

namespace {

std::pair<std::vector<spectral::WaveformClip>, std::vector<std::string>> load_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<spectral::WaveformClip> clips;
  std::vector<std::string> ids;
  for (const auto& f : files) {
    auto a = wav::read(f);
    auto mono = data::resample(a.mono(), a.sample_rate, 44100);
    clips.push_back({torch::from_blob(mono.data(), {static_cast<std::int64_t>(mono.size())}, torch::kFloat).clone(),
                     44100});
    ids.push_back(f.stem().string());
  }
  return {std::move(clips), std::move(ids)};
}

}  // namespace

std::map<std::string, MethodAudio> load_method_audio(const fs::path& root,
                                                     const std::vector<std::string>& methods,
                                                     std::vector<std::string>& notices) {
  std::map<std::string, MethodAudio> out;
  for (const auto& m : methods) {
    const auto dir = root / m;
    if (!fs::is_directory(dir)) {
      notices.push_back("no audio for method " + m + " under " + dir.string() + "; rows omitted");
      continue;
    }
    MethodAudio a;
    std::tie(a.train, a.train_ids) = load_dir(dir / "train");
    std::tie(a.test, a.test_ids) = load_dir(dir / "test");
    if (a.train.empty() && a.test.empty()) {
      notices.push_back("method " + m + " has no WAV files; rows omitted");
      continue;
    }
    out.emplace(m, std::move(a));
  }
  return out;
}

ScoreTable evaluate_regimes(const std::map<std::string, MethodAudio>& audio, const RegimeRunConfig& cfg,
                            const spectral::SpectralConfig& spec, const fs::path& out_dir) {
  check_disjoint(audio);
  ScoreTable table;
  auto gt = audio.find(kMethodGt);
  if (gt == audio.end() || gt->second.train.empty()) {
    throw DataError("regime evaluation needs gt training audio");
  }
  spectral::FeatureExtractor fx(spec);
  std::map<std::pair<std::string, InputKind>, std::pair<std::vector<torch::Tensor>, std::vector<torch::Tensor>>>
      feats;
  auto features_of = [&](const std::string& method, InputKind kind) -> const auto& {
    auto key = std::make_pair(method, kind);
    auto it = feats.find(key);
    if (it == feats.end()) {
      const auto& a = audio.at(method);
      std::vector<torch::Tensor> tr, te;
      for (const auto& c : a.train) tr.push_back(classifier_features(fx, kind, c.samples));
      for (const auto& c : a.test) te.push_back(classifier_features(fx, kind, c.samples));
      it = feats.emplace(key, std::make_pair(std::move(tr), std::move(te))).first;
    }
    return it->second;
  };

  std::uint64_t run = 0;
  for (const auto& regime_name : cfg.regimes) {
    const auto& regime = regime_by_name(regime_name);
    std::vector<std::string> negs;
    for (const auto& n : regime.negatives) {
      auto it = audio.find(n);
      if (it == audio.end() || it->second.train.empty()) {
        table.notices.push_back("regime " + regime.name + ": no training audio for " + n);
      } else {
        negs.push_back(n);
      }
    }
    if (negs.empty()) {
      table.notices.push_back("regime " + regime.name + " skipped: no negative training audio");
      continue;
    }
    for (auto kind : cfg.input_kinds) {
      auto ccfg = cfg.classifier;
      ccfg.input_kind = kind;
      auto tcfg = cfg.train;
      tcfg.seed = mix_seed(cfg.train.seed, run++);
      torch::manual_seed(static_cast<std::uint64_t>(tcfg.seed));
      ConvNeXtClassifier model(ccfg, spec.loudness_floor());
      std::vector<torch::Tensor> neg_feats;
      for (const auto& n : negs) {
        const auto& f = features_of(n, kind).first;
        neg_feats.insert(neg_feats.end(), f.begin(), f.end());
      }
      train_classifier(model, features_of(kMethodGt, kind).first, neg_feats, tcfg, spec);
      if (!out_dir.empty()) {
        training::save_checkpoint(out_dir / "classifiers" / (regime.name + "." + to_string(kind)),
                                  classifier_checkpoint(model, regime.name));
      }
      for (const auto& method : standard_methods()) {
        auto it = audio.find(method);
        if (it == audio.end() || it->second.test.empty()) continue;
        auto scores = score_all(model, features_of(method, kind).second);
        ScoreRow row;
        row.method = method;
        row.seen = method == kMethodGt || std::find(negs.begin(), negs.end(), method) != negs.end();
        row.regime = regime.name;
        row.input_kind = kind;
        row.count = static_cast<std::int64_t>(scores.size());
        row.mean_score = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Images

void write_png(const fs::path& path, const Image& img) {
  if (img.width < 1 || img.height < 1 ||
      img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw ShapeError("write_png: inconsistent image");
  }
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw DataError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw DataError("libpng failed writing " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(&img.rgb[static_cast<std::size_t>(y) * img.width * 3]));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw DataError("cannot finish " + path.string());
}

Image read_png(const fs::path& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw DataError("cannot read " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw DataError("libpng failed reading " + path.string());
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw DataError(path.string() + ": expected 8-bit RGB");
  }
  Image img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, &img.rgb[static_cast<std::size_t>(y) * img.width * 3], nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

std::array<std::uint8_t, 3> viridis(double x) {
  static constexpr double c[7][3] = {{0.2777273272234177, 0.005407344544966578, 0.3340998053353061},
                                     {0.1050930431085774, 1.404613529898575, 1.384590162594685},
                                     {-0.3308618287255563, 0.214847559468213, 0.09509516302823659},
                                     {-4.634230498983486, -5.799100973351585, -19.33244095627987},
                                     {6.228269936347081, 14.17993336680509, 56.69055260068105},
                                     {4.776384997670288, -13.74514537774601, -65.35303263337234},
                                     {-5.435455855934631, 4.645852612178535, 26.3124352495832}};
  const double t = std::clamp(x, 0.0, 1.0);
  std::array<std::uint8_t, 3> out{};
  for (int k = 0; k < 3; ++k) {
    double v = c[6][k];
    for (int i = 5; i >= 0; --i) v = c[i][k] + t * v;
    out[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  }
  return out;
}

Image spectrogram_image(const spectral::WaveformClip& clip, const spectral::SpectralConfig& cfg) {
  torch::NoGradGuard g;
  auto mag = spectral::stft(clip.samples.reshape({-1}).to(torch::kDouble), spectral::StftParams::from(cfg)).abs();
  const auto bins = mag.size(0);
  const auto frames = mag.size(1);
  const double peak = mag.max().item<double>();
  torch::Tensor level;
  if (peak > 0.0) {
    auto db = 20.0 * torch::log10(mag.clamp_min(peak * 1e-12) / peak);
    level = ((db.clamp(-80.0, 0.0) + 80.0) / 80.0).contiguous();
  } else {
    level = torch::zeros_like(mag);
  }
  Image img;
  img.width = static_cast<int>(frames);
  img.height = static_cast<int>(bins);
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  auto acc = level.accessor<double, 2>();
  for (int y = 0; y < img.height; ++y) {
    const auto k = bins - 1 - y;
    for (int x = 0; x < img.width; ++x) {
      const auto c = viridis(acc[k][x]);
      auto* p = &img.rgb[(static_cast<std::size_t>(y) * img.width + x) * 3];
      p[0] = c[0];
      p[1] = c[1];
      p[2] = c[2];
    }
  }
  return img;
}

void render_spectrogram(const spectral::WaveformClip& clip, const fs::path& path,
                        const spectral::SpectralConfig& cfg) {
  if (clip.size() < 1) throw ShapeError("render: empty waveform");
  write_png(path, spectrogram_image(clip, cfg));
}

int spectrogram_row(double hz, const spectral::SpectralConfig& cfg) {
  return cfg.n_bins() - 1 - static_cast<int>(std::lround(hz / cfg.bin_hz()));
}

torch::Tensor brickwall_lowpass(const torch::Tensor& w, double cutoff_hz, int sample_rate) {
  const auto n = w.size(-1);
  auto spec = torch::fft::rfft(w, n, -1);
  const auto keep = static_cast<std::int64_t>(std::floor(cutoff_hz * n / sample_rate)) + 1;
  if (keep < spec.size(-1)) spec.narrow(-1, keep, spec.size(-1) - keep).zero_();
  return torch::fft::irfft(spec, n, -1);
}

ClassifierScoreProvider::ClassifierScoreProvider(ConvNeXtClassifier model, spectral::SpectralConfig spec,
                                                 std::string name)
    : model_(std::move(model)), spec_(std::move(spec)), fx_(spec_), name_(std::move(name)) {}

double ClassifierScoreProvider::score(const fs::path& wav) {
  auto a = wav::read(wav);
  auto mono = data::resample(a.mono(), a.sample_rate, spec_.sample_rate);
  auto t = torch::from_blob(mono.data(), {static_cast<std::int64_t>(mono.size())}, torch::kFloat).clone();
  torch::NoGradGuard g;
  model_->eval();
  return model_->score(classifier_features(fx_, model_->config().input_kind, t)).item<double>();
}

}  // namespace lsevoc::eval
