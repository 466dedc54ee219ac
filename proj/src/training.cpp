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

#include "lsevoc/training.hpp"

#include <ATen/autocast_mode.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "lsevoc/error.hpp"
#include "lsevoc/hash.hpp"

namespace lsevoc::training {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little endian");

const char* to_string(Precision p) { return p == Precision::fp16 ? "fp16" : "fp32"; }

Precision precision_from_string(const std::string& name) {
  if (name == "fp32") return Precision::fp32;
  if (name == "fp16") return Precision::fp16;
  throw ConfigError("unknown precision '" + name + "' (expected fp32 or fp16)");
}

void OptimConfig::validate() const {
  if (!(lr_init > 0.0)) throw ConfigError("optim.lr_init must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("optim betas must lie in [0, 1)");
  }
  if (weight_decay < 0.0) throw ConfigError("optim.weight_decay must be >= 0");
  if (!(eps > 0.0)) throw ConfigError("optim.eps must be > 0");
}

torch::optim::AdamW make_adamw(const std::vector<torch::Tensor>& params, const OptimConfig& cfg) {
  cfg.validate();
  torch::optim::AdamWOptions o(cfg.lr_init);
  o.betas({cfg.beta1, cfg.beta2}).weight_decay(cfg.weight_decay).eps(cfg.eps);
  return torch::optim::AdamW(params, o);
}

void set_lr(torch::optim::Optimizer& opt, double lr) {
  for (auto& g : opt.param_groups()) g.options().set_lr(lr);
}

// ---------------------------------------------------------------------------
// Schedules

LrScheduleState LrScheduleState::plateau(double lr_init, std::int64_t window, double half_life) {
  LrScheduleState s;
  s.mode = LrMode::plateau_halving;
  s.lr_init = s.lr = lr_init;
  s.window = window;
  s.half_life = half_life;
  s.validate();
  return s;
}

LrScheduleState LrScheduleState::exponential(double lr_init, double rate, std::int64_t interval) {
  LrScheduleState s;
  s.mode = LrMode::exponential;
  s.lr_init = s.lr = lr_init;
  s.decay_rate = rate;
  s.decay_interval = interval;
  s.validate();
  return s;
}

void LrScheduleState::validate() const {
  if (!(lr_init > 0.0)) throw ConfigError("schedule lr_init must be > 0");
  if (window < 1) throw ConfigError("schedule window must be >= 1");
  if (half_life < 0.0) throw ConfigError("schedule half_life must be >= 0");
  if (!(decay_rate > 0.0 && decay_rate <= 1.0)) throw ConfigError("decay_rate must lie in (0, 1]");
  if (decay_interval < 1) throw ConfigError("decay_interval must be >= 1");
}

double plateau_halve(LrScheduleState& s, double loss) {
  if (s.half_life > 0.0 && !std::isnan(s.smoothed)) {
    const double keep = std::pow(0.5, 1.0 / s.half_life);
    s.smoothed += (1.0 - keep) * (loss - s.smoothed);
  } else {
    s.smoothed = loss;
  }
  if (s.smoothed < s.best_loss) {
    s.best_loss = s.smoothed;
    s.steps_since_best = 1;
  } else {
    ++s.steps_since_best;
  }
  if (s.steps_since_best >= s.window) {
    s.lr *= 0.5;
    s.steps_since_best = 0;
  }
  ++s.step;
  return s.lr;
}

double exponential_step(LrScheduleState& s) {
  ++s.step;
  s.lr = s.lr_init * std::pow(s.decay_rate, static_cast<double>(s.step / s.decay_interval));
  return s.lr;
}

double schedule_update(LrScheduleState& s, double loss) {
  return s.mode == LrMode::plateau_halving ? plateau_halve(s, loss) : exponential_step(s);
}

json to_json(const LrScheduleState& s) {
  json j;
  j["mode"] = s.mode == LrMode::plateau_halving ? "plateau_halving" : "exponential";
  j["lr_init"] = s.lr_init;
  j["lr"] = s.lr;
  j["best_loss"] = std::isinf(s.best_loss) ? json(nullptr) : json(s.best_loss);
  j["smoothed"] = std::isnan(s.smoothed) ? json(nullptr) : json(s.smoothed);
  j["steps_since_best"] = s.steps_since_best;
  j["window"] = s.window;
  j["half_life"] = s.half_life;
  j["decay_rate"] = s.decay_rate;
  j["decay_interval"] = s.decay_interval;
  j["step"] = s.step;
  return j;
}

LrScheduleState schedule_from_json(const json& j) {
  LrScheduleState s;
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "plateau_halving") {
    s.mode = LrMode::plateau_halving;
  } else if (mode == "exponential") {
    s.mode = LrMode::exponential;
  } else {
    throw DataError("checkpoint: unknown schedule mode '" + mode + "'");
  }
  s.lr_init = j.at("lr_init").get<double>();
  s.lr = j.at("lr").get<double>();
  s.best_loss = j.at("best_loss").is_null() ? std::numeric_limits<double>::infinity()
                                            : j.at("best_loss").get<double>();
  s.smoothed = j.at("smoothed").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                          : j.at("smoothed").get<double>();
  s.steps_since_best = j.at("steps_since_best").get<std::int64_t>();
  s.window = j.at("window").get<std::int64_t>();
  s.half_life = j.at("half_life").get<double>();
  s.decay_rate = j.at("decay_rate").get<double>();
  s.decay_interval = j.at("decay_interval").get<std::int64_t>();
  s.step = j.at("step").get<std::int64_t>();
  return s;
}

// ---------------------------------------------------------------------------
// EMA

namespace {

NamedTensors snapshot(const torch::nn::Module& m) {
  NamedTensors out;
  for (const auto& item : m.named_parameters(true)) {
    out.emplace_back(item.key(), item.value().detach().clone());
  }
  return out;
}

}  // namespace

EmaState ema_init(const torch::nn::Module& model, double decay) {
  if (!(decay >= 0.0 && decay <= 1.0)) throw ConfigError("ema decay must lie in [0, 1]");
  return {decay, snapshot(model), 0};
}

void ema_update(EmaState& ema, const NamedTensors& weights) {
  if (weights.size() != ema.shadow.size()) throw ShapeError("ema: parameter count mismatch");
  torch::NoGradGuard g;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    auto& [name, shadow] = ema.shadow[i];
    const auto& [wname, w] = weights[i];
    if (name != wname || !shadow.sizes().equals(w.sizes())) {
      throw ShapeError("ema: parameter '" + wname + "' does not match shadow '" + name + "'");
    }
    if (ema.decay == 0.0) {
      shadow.copy_(w);
    } else if (ema.decay != 1.0) {
      shadow.mul_(ema.decay).add_(w.detach(), 1.0 - ema.decay);
    }
  }
  ++ema.step;
}

void ema_update(EmaState& ema, const torch::nn::Module& model) {
  NamedTensors w;
  for (const auto& item : model.named_parameters(true)) w.emplace_back(item.key(), item.value());
  ema_update(ema, w);
}

void ema_apply(const EmaState& ema, torch::nn::Module& model) {
  auto params = model.named_parameters(true);
  torch::NoGradGuard g;
  for (const auto& [name, shadow] : ema.shadow) {
    auto* p = params.find(name);
    if (p == nullptr || !p->sizes().equals(shadow.sizes())) {
      throw ShapeError("ema: model has no parameter matching '" + name + "'");
    }
    p->copy_(shadow);
  }
}

// ---------------------------------------------------------------------------
// Segmentation

std::vector<Segment> segment_clips(const std::vector<spectral::WaveformClip>& corpus,
                                   double seconds, int sample_rate) {
  if (corpus.empty()) throw DataError("segment_clips: empty corpus");
  if (!(seconds > 0.0)) throw ConfigError("segment length must be > 0");
  const auto len = static_cast<std::int64_t>(std::llround(seconds * sample_rate));
  std::vector<Segment> out;
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const auto& clip = corpus[c];
    if (clip.sample_rate != sample_rate) {
      throw DataError("segment_clips: clip " + std::to_string(c) + " has sample rate " +
                      std::to_string(clip.sample_rate));
    }
    auto s = clip.samples.reshape({-1}).to(torch::kFloat);
    const auto n = s.size(0);
    for (std::int64_t off = 0; off < n; off += len) {
      const auto rest = n - off;
      if (rest >= len) {
        out.push_back({c, off, s.narrow(0, off, len).clone()});
      } else if (2 * rest >= len) {
        out.push_back({c, off, torch::constant_pad_nd(s.narrow(0, off, rest), {0, len - rest})});
      }
    }
  }
  if (out.empty()) throw DataError("segment_clips: every clip is shorter than half a segment");
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'L', 'S', 'E', 'C', 'K', 'P', 'T', '1'};

std::uint8_t dtype_code(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat: return 0;
    case torch::kDouble: return 1;
    case torch::kLong: return 2;
    case torch::kHalf: return 3;
    default: throw DataError("checkpoint: unsupported dtype");
  }
}

torch::ScalarType dtype_from_code(std::uint8_t c) {
  switch (c) {
    case 0: return torch::kFloat;
    case 1: return torch::kDouble;
    case 2: return torch::kLong;
    case 3: return torch::kHalf;
    default: throw DataError("checkpoint: bad dtype code " + std::to_string(c));
  }
}

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("checkpoint: truncated");
  return v;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
  if (!os) throw DataError("cannot write " + p.string());
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw DataError("cannot read " + p.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

}  // namespace

void write_tensors(const fs::path& path, const NamedTensors& tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    auto c = t.detach().to(torch::kCPU).contiguous();
    put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint8_t>(os, dtype_code(c.scalar_type()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(c.dim()));
    for (auto d : c.sizes()) put<std::int64_t>(os, d);
    const auto bytes = static_cast<std::uint64_t>(c.numel() * c.element_size());
    put<std::uint64_t>(os, bytes);
    os.write(static_cast<const char*>(c.data_ptr()), static_cast<std::streamsize>(bytes));
  }
  if (!os) throw DataError("write failed for " + path.string());
}

NamedTensors read_tensors(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw DataError(path.string() + ": not a weights file");
  }
  const auto count = get<std::uint32_t>(is);
  NamedTensors out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto nlen = get<std::uint32_t>(is);
    if (nlen > 4096) throw DataError("checkpoint: corrupt entry name");
    std::string name(nlen, '\0');
    if (!is.read(name.data(), nlen)) throw DataError("checkpoint: truncated");
    const auto dtype = dtype_from_code(get<std::uint8_t>(is));
    const auto ndim = get<std::uint32_t>(is);
    if (ndim > 16) throw DataError("checkpoint: corrupt rank");
    std::vector<std::int64_t> dims(ndim);
    for (auto& d : dims) d = get<std::int64_t>(is);
    const auto bytes = get<std::uint64_t>(is);
    auto t = torch::empty(dims, torch::TensorOptions().dtype(dtype));
    if (bytes != static_cast<std::uint64_t>(t.numel() * t.element_size())) {
      throw DataError("checkpoint: size mismatch for '" + name + "'");
    }
    if (!is.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(bytes))) {
      throw DataError("checkpoint: truncated payload for '" + name + "'");
    }
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

const torch::Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw DataError("checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return true;
  }
  return false;
}

void save_checkpoint(const fs::path& dir, const Checkpoint& ckpt) {
  const auto parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const auto tmp = parent / (dir.filename().string() + ".tmp");
  const auto old = parent / (dir.filename().string() + ".old");
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  write_text(tmp / "config.json", ckpt.config.dump(2) + "\n");
  write_text(tmp / "meta.json", ckpt.meta.dump(2) + "\n");
  write_tensors(tmp / "weights.bin", ckpt.tensors);
  fs::remove_all(old);
  if (fs::exists(dir)) fs::rename(dir, old);
  fs::rename(tmp, dir);
  fs::remove_all(old);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("no checkpoint directory at " + dir.string());
  Checkpoint c;
  c.config = read_json(dir / "config.json");
  c.meta = read_json(dir / "meta.json");
  c.tensors = read_tensors(dir / "weights.bin");
  return c;
}

void append_module(NamedTensors& out, const std::string& prefix, const torch::nn::Module& m) {
  for (const auto& item : m.named_parameters(true)) {
    out.emplace_back(prefix + "/" + item.key(), item.value().detach().clone());
  }
}

void load_module(torch::nn::Module& m, const Checkpoint& ckpt, const std::string& prefix) {
  std::map<std::string, const torch::Tensor*> index;
  for (const auto& [n, t] : ckpt.tensors) index[n] = &t;
  torch::NoGradGuard g;
  for (auto& item : m.named_parameters(true)) {
    auto it = index.find(prefix + "/" + item.key());
    if (it == index.end()) throw DataError("checkpoint is missing '" + prefix + "/" + item.key() + "'");
    if (!it->second->sizes().equals(item.value().sizes())) {
      throw DataError("checkpoint shape mismatch for '" + it->first + "'");
    }
    item.value().copy_(*it->second);
  }
}

void append_adamw(NamedTensors& out, const std::string& prefix, torch::optim::AdamW& opt,
                  const torch::nn::Module& m) {
  auto& state = opt.state();
  for (const auto& item : m.named_parameters(true)) {
    auto it = state.find(item.value().unsafeGetTensorImpl());
    if (it == state.end()) continue;
    auto& s = static_cast<torch::optim::AdamWParamState&>(*it->second);
    const auto base = prefix + "/" + item.key();
    out.emplace_back(base + "/step", torch::tensor(s.step(), torch::kLong));
    out.emplace_back(base + "/exp_avg", s.exp_avg().clone());
    out.emplace_back(base + "/exp_avg_sq", s.exp_avg_sq().clone());
  }
}

void load_adamw(torch::optim::AdamW& opt, const torch::nn::Module& m, const Checkpoint& ckpt,
                const std::string& prefix) {
  auto& state = opt.state();
  state.clear();
  for (const auto& item : m.named_parameters(true)) {
    const auto base = prefix + "/" + item.key();
    if (!ckpt.has(base + "/step")) continue;
    auto s = std::make_unique<torch::optim::AdamWParamState>();
    s->step(ckpt.tensor(base + "/step").item<std::int64_t>());
    s->exp_avg(ckpt.tensor(base + "/exp_avg").clone());
    s->exp_avg_sq(ckpt.tensor(base + "/exp_avg_sq").clone());
    if (!s->exp_avg().sizes().equals(item.value().sizes())) {
      throw DataError("checkpoint optimizer state shape mismatch for '" + base + "'");
    }
    state[item.value().unsafeGetTensorImpl()] = std::move(s);
  }
}

void append_ema(NamedTensors& out, const std::string& prefix, const EmaState& ema) {
  for (const auto& [name, t] : ema.shadow) out.emplace_back(prefix + "/" + name, t.clone());
}

void load_ema(EmaState& ema, const Checkpoint& ckpt, const std::string& prefix) {
  for (auto& [name, t] : ema.shadow) {
    const auto& src = ckpt.tensor(prefix + "/" + name);
    if (!src.sizes().equals(t.sizes())) throw DataError("checkpoint EMA shape mismatch for " + name);
    t = src.clone();
  }
}

LossLog::LossLog(const fs::path& path, std::int64_t keep_through) {
  std::vector<std::string> kept;
  if (keep_through >= 0 && fs::exists(path)) {
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      if (std::stoll(line.substr(0, line.find(','))) <= keep_through) kept.push_back(line);
    }
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  out_.open(path, std::ios::trunc);
  if (!out_) throw DataError("cannot write " + path.string());
  out_ << "step,loss,lr\n";
  for (const auto& l : kept) out_ << l << "\n";
  out_.flush();
}

void LossLog::write(std::int64_t step, double loss, double lr) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g\n", static_cast<long long>(step), loss, lr);
  out_ << buf;
  out_.flush();
}

LossScaler::LossScaler(bool enabled, double init_scale, std::int64_t growth_interval)
    : enabled_(enabled), scale_(enabled ? init_scale : 1.0), growth_interval_(growth_interval) {}

torch::Tensor LossScaler::scale(const torch::Tensor& loss) const {
  return enabled_ ? loss * scale_ : loss;
}

bool LossScaler::unscale(const std::vector<torch::Tensor>& params) {
  if (!enabled_) return true;
  torch::NoGradGuard g;
  bool finite = true;
  for (const auto& p : params) {
    auto grad = p.grad();
    if (!grad.defined()) continue;
    grad.div_(scale_);
    if (finite && !torch::isfinite(grad).all().item<bool>()) finite = false;
  }
  if (!finite) {
    for (const auto& p : params) {
      if (p.grad().defined()) p.grad().zero_();
    }
  }
  return finite;
}

void LossScaler::update(bool finite) {
  if (!enabled_) return;
  if (!finite) {
    scale_ = std::max(1.0, scale_ * 0.5);
    good_steps_ = 0;
  } else if (++good_steps_ >= growth_interval_) {
    scale_ *= 2.0;
    good_steps_ = 0;
  }
}

json LossScaler::to_json() const {
  return {{"enabled", enabled_}, {"scale", scale_}, {"good_steps", good_steps_}};
}

void LossScaler::from_json(const json& j) {
  scale_ = j.at("scale").get<double>();
  good_steps_ = j.at("good_steps").get<std::int64_t>();
}

// ---------------------------------------------------------------------------
// LSE trainer

namespace {

class AutocastScope {
 public:
  explicit AutocastScope(bool enabled) : enabled_(enabled) {
    if (!enabled_) return;
    prev_enabled_ = at::autocast::is_autocast_enabled(at::kCPU);
    prev_dtype_ = at::autocast::get_autocast_dtype(at::kCPU);
    at::autocast::set_autocast_enabled(at::kCPU, true);
    at::autocast::set_autocast_dtype(at::kCPU, at::kHalf);
    at::autocast::increment_nesting();
  }
  ~AutocastScope() {
    if (!enabled_) return;
    if (at::autocast::decrement_nesting() == 0) at::autocast::clear_cache();
    at::autocast::set_autocast_enabled(at::kCPU, prev_enabled_);
    at::autocast::set_autocast_dtype(at::kCPU, prev_dtype_);
  }

 private:
  bool enabled_;
  bool prev_enabled_ = false;
  at::ScalarType prev_dtype_ = at::kBFloat16;
};

torch::Tensor batch_indices(std::size_t n, int batch, at::Generator& gen) {
  return torch::randint(static_cast<std::int64_t>(n), {batch}, gen,
                        torch::TensorOptions().dtype(torch::kLong));
}

void check_finite_or_throw(double value, const char* what, const fs::path& diag_dir,
                           const Checkpoint& ckpt, std::int64_t step) {
  if (std::isfinite(value)) return;
  std::string where;
  if (!diag_dir.empty()) {
    const auto dir = diag_dir / "diverged";
    save_checkpoint(dir, ckpt);
    where = "; diagnostic checkpoint at " + dir.string();
  }
  throw DivergenceError(std::string(what) + " became non-finite at step " + std::to_string(step) +
                        where);
}

}  // namespace

void LseTrainConfig::validate() const {
  if (steps < 0) throw ConfigError("train.steps must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(segment_seconds > 0.0)) throw ConfigError("train.segment_seconds must be > 0");
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  optim.validate();
}

std::vector<LseExample> lse_examples(const std::vector<Segment>& segments,
                                     const spectral::SpectralConfig& spec) {
  spectral::FeatureExtractor fx(spec);
  std::vector<LseExample> out;
  out.reserve(segments.size());
  torch::NoGradGuard g;
  for (const auto& s : segments) {
    auto lin = spectral::normalize(fx.log_linear(s.samples), spectral::FeatureKind::linear, spec);
    auto mel = spectral::normalize(fx.log_mel(s.samples), spectral::FeatureKind::mel, spec);
    out.push_back({lin, mel});
  }
  return out;
}

LseTrainer::LseTrainer(lse::LseConfig net_cfg, spectral::SpectralConfig spec, LseTrainConfig cfg,
                       std::vector<LseExample> data, json manifest)
    : net_cfg_(std::move(net_cfg)),
      spec_(std::move(spec)),
      cfg_(std::move(cfg)),
      data_(std::move(data)),
      manifest_(std::move(manifest)),
      schedule_(diffusion::NoiseSchedule::linear()),
      scaler_(cfg_.optim.precision == Precision::fp16) {
  cfg_.validate();
  net_cfg_.validate();
  if (data_.empty()) throw DataError("lse trainer: no training examples");
  const auto frames = data_.front().linear.size(-1);
  for (const auto& e : data_) {
    if (e.linear.size(0) != net_cfg_.n_linear || e.mel.size(0) != net_cfg_.n_mel) {
      throw ShapeError("lse trainer: feature bins do not match the network config");
    }
    if (e.linear.size(-1) != frames || e.mel.size(-1) != frames) {
      throw ShapeError("lse trainer: examples must share one frame count");
    }
  }
  if (frames % net_cfg_.patch_t != 0) throw ShapeError("lse trainer: frames must divide patch_t");
  net_ = lse::LseNet(net_cfg_);
  opt_ = std::make_unique<torch::optim::AdamW>(make_adamw(net_->parameters(), cfg_.optim));
  sched_ = LrScheduleState::plateau(cfg_.optim.lr_init, cfg_.plateau_window, cfg_.plateau_half_life);
  ema_ = ema_init(*net_, cfg_.ema_decay);
}

double LseTrainer::step() {
  auto gen = diffusion::make_generator(mix_seed(cfg_.seed, static_cast<std::uint64_t>(step_)));
  auto idx = batch_indices(data_.size(), cfg_.batch_size, gen);
  std::vector<torch::Tensor> xs, cs;
  for (std::int64_t i = 0; i < idx.size(0); ++i) {
    const auto& e = data_[static_cast<std::size_t>(idx[i].item<std::int64_t>())];
    xs.push_back(e.linear);
    cs.push_back(e.mel);
  }
  auto x0 = torch::stack(xs);
  auto cond = torch::stack(cs);
  set_lr(*opt_, sched_.lr);
  net_->train();
  torch::Tensor loss;
  {
    AutocastScope ac(cfg_.optim.precision == Precision::fp16);
    loss = diffusion::training_loss(lse::as_eps_model(net_), x0, cond, schedule_, gen).loss;
  }
  loss = loss.to(torch::kFloat);
  const double value = loss.item<double>();
  if (!std::isfinite(value)) check_finite_or_throw(value, "lse loss", diag_dir_, checkpoint(), step_);
  opt_->zero_grad();
  scaler_.scale(loss).backward();
  const bool finite = scaler_.unscale(net_->parameters());
  scaler_.update(finite);
  if (finite) opt_->step();
  ema_update(ema_, *net_);
  plateau_halve(sched_, value);
  ++step_;
  return value;
}

void LseTrainer::run(const fs::path& dir) {
  LossLog log(dir / "loss.csv", step_ - 1);
  diag_dir_ = dir;
  while (step_ < cfg_.steps) {
    const auto s = step_;
    const double lr = sched_.lr;
    const double loss = step();
    log.write(s, loss, lr);
    if (cfg_.checkpoint_every > 0 && step_ % cfg_.checkpoint_every == 0 && step_ < cfg_.steps) {
      save_checkpoint(dir / "checkpoint", checkpoint());
    }
  }
  save_checkpoint(dir / "checkpoint", checkpoint());
}

Checkpoint LseTrainer::checkpoint() const {
  Checkpoint c;
  c.config = manifest_;
  c.config["stage"] = "lse";
  c.meta = {{"step", step_},
            {"lr", sched_.lr},
            {"ema_decay", ema_.decay},
            {"ema_step", ema_.step},
            {"schedule", to_json(sched_)},
            {"loss_scaler", scaler_.to_json()},
            {"corpus_fingerprint", manifest_.value("corpus_fingerprint", std::string())},
            {"seed", cfg_.seed}};
  append_module(c.tensors, "model", *net_);
  append_ema(c.tensors, "ema", ema_);
  append_adamw(c.tensors, "optim", *opt_, *net_);
  return c;
}

void LseTrainer::restore(const Checkpoint& ckpt) {
  if (ckpt.config.value("stage", std::string()) != "lse") {
    throw DataError("checkpoint is not an lse checkpoint");
  }
  load_module(*net_, ckpt, "model");
  load_ema(ema_, ckpt, "ema");
  ema_.step = ckpt.meta.at("ema_step").get<std::int64_t>();
  load_adamw(*opt_, *net_, ckpt, "optim");
  sched_ = schedule_from_json(ckpt.meta.at("schedule"));
  scaler_.from_json(ckpt.meta.at("loss_scaler"));
  step_ = ckpt.meta.at("step").get<std::int64_t>();
}

void LseTrainer::corrupt(double factor) {
  torch::NoGradGuard g;
  for (auto& p : net_->parameters()) p.mul_(factor);
}

// ---------------------------------------------------------------------------
// Vocoder trainer

const char* to_string(VocoderKind k) { return k == VocoderKind::vocos2d ? "vocos2d" : "vocos-baseline"; }

VocoderKind vocoder_kind_from_string(const std::string& name) {
  if (name == "vocos2d") return VocoderKind::vocos2d;
  if (name == "vocos-baseline") return VocoderKind::baseline;
  throw ConfigError("unknown vocoder stage '" + name + "' (expected vocos2d or vocos-baseline)");
}

void VocoderTrainConfig::validate() const {
  if (steps < 0) throw ConfigError("vocoder_train.steps must be >= 0");
  if (batch_size < 1) throw ConfigError("vocoder_train.batch_size must be >= 1");
  if (!(segment_seconds > 0.0)) throw ConfigError("vocoder_train.segment_seconds must be > 0");
  if (checkpoint_every < 0) throw ConfigError("vocoder_train.checkpoint_every must be >= 0");
  if (optim.precision != Precision::fp32) {
    throw ConfigError("vocoder training runs in fp32 only");
  }
  optim.validate();
  da.validate();
  disc.validate();
}

VocoderTrainer::VocoderTrainer(VocoderKind kind, vocos::Vocos2DConfig g2d,
                               vocos::BaselineVocosConfig g1d, spectral::SpectralConfig spec,
                               VocoderTrainConfig cfg, std::vector<torch::Tensor> segments,
                               json manifest)
    : kind_(kind),
      spec_(std::move(spec)),
      cfg_(std::move(cfg)),
      segments_(std::move(segments)),
      manifest_(std::move(manifest)),
      fx_(spec_) {
  cfg_.validate();
  if (segments_.empty()) throw DataError("vocoder trainer: no training segments");
  const auto n = segments_.front().size(-1);
  for (const auto& s : segments_) {
    if (s.dim() != 1 || s.size(0) != n) throw ShapeError("vocoder trainer: segments must share one length");
  }
  if (cfg_.da.max_shift >= n) throw ConfigError("da.max_shift must be shorter than the segments");
  if (kind_ == VocoderKind::vocos2d) {
    g2d_ = vocos::Vocos2D(std::move(g2d), spec_);
  } else {
    g1d_ = vocos::BaselineVocos(std::move(g1d), spec_);
  }
  disc_ = vocos::MultiResolutionDiscriminator(cfg_.disc);
  opt_g_ = std::make_unique<torch::optim::AdamW>(make_adamw(generator().parameters(), cfg_.optim));
  opt_d_ = std::make_unique<torch::optim::AdamW>(make_adamw(disc_->parameters(), cfg_.optim));
  sched_ = LrScheduleState::exponential(cfg_.optim.lr_init, cfg_.decay_rate, cfg_.decay_interval);
  ema_ = ema_init(generator(), cfg_.ema_decay);
}

torch::nn::Module& VocoderTrainer::generator() {
  if (kind_ == VocoderKind::vocos2d) return *g2d_;
  return *g1d_;
}

torch::Tensor VocoderTrainer::features(const torch::Tensor& w) const {
  torch::NoGradGuard g;
  return kind_ == VocoderKind::vocos2d ? fx_.log_linear(w) : fx_.log_mel(w);
}

torch::Tensor VocoderTrainer::generate(const torch::Tensor& feats) {
  return kind_ == VocoderKind::vocos2d ? g2d_->forward(feats) : g1d_->forward(feats);
}

double VocoderTrainer::resynthesis_mel_l1(const torch::Tensor& w) {
  torch::NoGradGuard g;
  auto real = w.dim() == 1 ? w.unsqueeze(0) : w;
  auto fake = generate(features(real)).narrow(-1, 0, real.size(-1));
  return vocos::mel_l1(fx_, real, fake).item<double>();
}

VocoderStepReport VocoderTrainer::step() {
  auto gen = diffusion::make_generator(mix_seed(cfg_.seed, static_cast<std::uint64_t>(step_)));
  auto idx = batch_indices(segments_.size(), cfg_.batch_size, gen);
  std::vector<torch::Tensor> ws;
  for (std::int64_t i = 0; i < idx.size(0); ++i) {
    ws.push_back(segments_[static_cast<std::size_t>(idx[i].item<std::int64_t>())]);
  }
  auto real = torch::stack(ws);
  auto draws = vocos::draw_augmentations(cfg_.da, real.size(0), gen);
  set_lr(*opt_g_, sched_.lr);
  set_lr(*opt_d_, sched_.lr);
  generator().train();

  auto fake = generate(features(real)).narrow(-1, 0, real.size(-1));

  VocoderStepReport rep;
  opt_d_->zero_grad();
  auto d_loss = vocos::discriminator_loss(disc_, real, fake.detach(), draws);
  rep.discriminator = d_loss.item<double>();
  if (!std::isfinite(rep.discriminator)) {
    check_finite_or_throw(rep.discriminator, "discriminator loss", diag_dir_, checkpoint(), step_);
  }
  d_loss.backward();
  opt_d_->step();
  audit_.push_back({step_, 'D'});

  for (auto& p : disc_->parameters()) p.set_requires_grad(false);
  opt_g_->zero_grad();
  auto g = vocos::generator_losses(disc_, fx_, real, fake, draws, cfg_.weights);
  for (auto& p : disc_->parameters()) p.set_requires_grad(true);
  rep.generator = g.total.item<double>();
  rep.adversarial = g.adversarial.item<double>();
  rep.feature_matching = g.feature_matching.item<double>();
  rep.mel_l1 = g.spectral_l1.item<double>();
  if (!std::isfinite(rep.generator)) {
    check_finite_or_throw(rep.generator, "generator loss", diag_dir_, checkpoint(), step_);
  }
  g.total.backward();
  opt_g_->step();
  audit_.push_back({step_, 'G'});

  ema_update(ema_, generator());
  exponential_step(sched_);
  ++step_;
  return rep;
}

void VocoderTrainer::run(const fs::path& dir) {
  LossLog log(dir / "loss.csv", step_ - 1);
  diag_dir_ = dir;
  while (step_ < cfg_.steps) {
    const auto s = step_;
    const double lr = sched_.lr;
    const auto rep = step();
    log.write(s, rep.generator, lr);
    if (cfg_.checkpoint_every > 0 && step_ % cfg_.checkpoint_every == 0 && step_ < cfg_.steps) {
      save_checkpoint(dir / "checkpoint", checkpoint());
    }
  }
  save_checkpoint(dir / "checkpoint", checkpoint());
}

Checkpoint VocoderTrainer::checkpoint() const {
  auto& self = const_cast<VocoderTrainer&>(*this);
  Checkpoint c;
  c.config = manifest_;
  c.config["stage"] = to_string(kind_);
  c.meta = {{"step", step_},
            {"lr", sched_.lr},
            {"ema_decay", ema_.decay},
            {"ema_step", ema_.step},
            {"schedule", to_json(sched_)},
            {"corpus_fingerprint", manifest_.value("corpus_fingerprint", std::string())},
            {"seed", cfg_.seed}};
  append_module(c.tensors, "generator", self.generator());
  append_module(c.tensors, "discriminator", *disc_);
  append_ema(c.tensors, "ema", ema_);
  append_adamw(c.tensors, "optim_g", *opt_g_, self.generator());
  append_adamw(c.tensors, "optim_d", *opt_d_, *disc_);
  return c;
}

void VocoderTrainer::restore(const Checkpoint& ckpt) {
  if (ckpt.config.value("stage", std::string()) != to_string(kind_)) {
    throw DataError(std::string("checkpoint is not a ") + to_string(kind_) + " checkpoint");
  }
  load_module(generator(), ckpt, "generator");
  load_module(*disc_, ckpt, "discriminator");
  load_ema(ema_, ckpt, "ema");
  ema_.step = ckpt.meta.at("ema_step").get<std::int64_t>();
  load_adamw(*opt_g_, generator(), ckpt, "optim_g");
  load_adamw(*opt_d_, *disc_, ckpt, "optim_d");
  sched_ = schedule_from_json(ckpt.meta.at("schedule"));
  step_ = ckpt.meta.at("step").get<std::int64_t>();
  audit_.clear();
}

}  // namespace lsevoc::training
