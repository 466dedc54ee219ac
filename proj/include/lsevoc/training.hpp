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

// Optimization loops for both stages: schedules, EMA, segmentation,
// checkpoints, and the LSE diffusion and GAN vocoder trainers.

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lsevoc/diffusion.hpp"
#include "lsevoc/lse_net.hpp"
#include "lsevoc/spectral.hpp"
#include "lsevoc/vocos.hpp"

namespace lsevoc::training {

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

enum class Precision { fp32, fp16 };
const char* to_string(Precision p);
Precision precision_from_string(const std::string& name);

struct OptimConfig {
  double lr_init = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.01;
  double eps = 1e-8;
  Precision precision = Precision::fp32;
  void validate() const;
};

torch::optim::AdamW make_adamw(const std::vector<torch::Tensor>& params, const OptimConfig& cfg);
void set_lr(torch::optim::Optimizer& opt, double lr);

// ---------------------------------------------------------------------------
// Learning-rate schedules

enum class LrMode { plateau_halving, exponential };

struct LrScheduleState {
  LrMode mode = LrMode::plateau_halving;
  double lr_init = 1e-4;
  double lr = 1e-4;
  // plateau_halving
  double best_loss = std::numeric_limits<double>::infinity();
  double smoothed = std::numeric_limits<double>::quiet_NaN();
  std::int64_t steps_since_best = 0;
  std::int64_t window = 150000;
  double half_life = 1000.0;  // smoothing half-life in steps; 0 uses the raw loss
  // exponential
  double decay_rate = 0.995;
  std::int64_t decay_interval = 1000;
  std::int64_t step = 0;

  static LrScheduleState plateau(double lr_init, std::int64_t window, double half_life);
  static LrScheduleState exponential(double lr_init, double rate, std::int64_t interval);
  void validate() const;
};

// One observed loss. The counter is 1 on the step that sets a new minimum of
// the smoothed loss and grows by one on every other step; when it reaches
// `window` the lr halves and the counter restarts at 0.
double plateau_halve(LrScheduleState& s, double loss);
// lr = lr_init * rate^floor(step / interval), then step advances.
double exponential_step(LrScheduleState& s);
// Dispatch on mode; returns the lr for the next step.
double schedule_update(LrScheduleState& s, double loss);

nlohmann::json to_json(const LrScheduleState& s);
LrScheduleState schedule_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// EMA

struct EmaState {
  double decay = 0.999;
  NamedTensors shadow;
  std::int64_t step = 0;
};

// Shadow starts as a copy of the current weights.
EmaState ema_init(const torch::nn::Module& model, double decay);
// shadow <- decay * shadow + (1 - decay) * weights.
void ema_update(EmaState& ema, const NamedTensors& weights);
void ema_update(EmaState& ema, const torch::nn::Module& model);
void ema_apply(const EmaState& ema, torch::nn::Module& model);

// ---------------------------------------------------------------------------
// Segmentation

struct Segment {
  std::size_t clip = 0;
  std::int64_t offset = 0;  // samples
  torch::Tensor samples;    // [seconds * sample_rate]
};

// Non-overlapping fixed-length segments. A trailing remainder shorter than
// half a segment is dropped; a longer one is zero-padded.
std::vector<Segment> segment_clips(const std::vector<spectral::WaveformClip>& corpus,
                                   double seconds, int sample_rate = 44100);

// ---------------------------------------------------------------------------
// Checkpoints
//
// A checkpoint is a directory holding config.json, meta.json and weights.bin.
// weights.bin layout (little endian):
//   "LSECKPT1"  u32 entry_count
//   per entry:  u32 name_len, name bytes, u8 dtype (0 f32, 1 f64, 2 i64, 3 f16),
//               u32 ndim, i64 dims[ndim], u64 byte_count, raw row-major data

struct Checkpoint {
  nlohmann::json config;
  nlohmann::json meta;
  NamedTensors tensors;

  const torch::Tensor& tensor(const std::string& name) const;
  bool has(const std::string& name) const;
};

void write_tensors(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors read_tensors(const std::filesystem::path& path);
// Writes into a sibling temp directory, then renames over `dir`.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

void append_module(NamedTensors& out, const std::string& prefix, const torch::nn::Module& m);
void load_module(torch::nn::Module& m, const Checkpoint& ckpt, const std::string& prefix);
void append_adamw(NamedTensors& out, const std::string& prefix, torch::optim::AdamW& opt,
                  const torch::nn::Module& m);
void load_adamw(torch::optim::AdamW& opt, const torch::nn::Module& m, const Checkpoint& ckpt,
                const std::string& prefix);
void append_ema(NamedTensors& out, const std::string& prefix, const EmaState& ema);
void load_ema(EmaState& ema, const Checkpoint& ckpt, const std::string& prefix);

// CSV with header `step,loss,lr`. Reopening an existing log keeps only rows
// with step <= keep_through.
class LossLog {
 public:
  LossLog() = default;
  LossLog(const std::filesystem::path& path, std::int64_t keep_through = -1);
  void write(std::int64_t step, double loss, double lr);
  bool is_open() const { return out_.is_open(); }

 private:
  std::ofstream out_;
};

// Dynamic loss scale for FP16 backward passes.
class LossScaler {
 public:
  explicit LossScaler(bool enabled, double init_scale = 65536.0, std::int64_t growth_interval = 2000);
  torch::Tensor scale(const torch::Tensor& loss) const;
  // Divides gradients by the scale; false (with gradients zeroed) on overflow.
  bool unscale(const std::vector<torch::Tensor>& params);
  void update(bool finite);
  double value() const { return scale_; }
  bool enabled() const { return enabled_; }
  nlohmann::json to_json() const;
  void from_json(const nlohmann::json& j);

 private:
  bool enabled_;
  double scale_;
  std::int64_t growth_interval_;
  std::int64_t good_steps_ = 0;
};

// ---------------------------------------------------------------------------
// LSE trainer

struct LseTrainConfig {
  std::int64_t steps = 2000;
  int batch_size = 4;
  double segment_seconds = 8.0;
  std::uint64_t seed = 0;
  OptimConfig optim{};
  std::int64_t plateau_window = 150000;
  double plateau_half_life = 1000.0;
  double ema_decay = 0.999;
  std::int64_t checkpoint_every = 0;  // 0: final checkpoint only
  void validate() const;
};

// Normalized features of one segment, equal frame counts.
struct LseExample {
  torch::Tensor linear;  // [n_linear, T]
  torch::Tensor mel;     // [n_mel, T]
};

// Normalized log features for every segment.
std::vector<LseExample> lse_examples(const std::vector<Segment>& segments,
                                     const spectral::SpectralConfig& spec);

class LseTrainer {
 public:
  LseTrainer(lse::LseConfig net_cfg, spectral::SpectralConfig spec, LseTrainConfig cfg,
             std::vector<LseExample> data, nlohmann::json manifest = nlohmann::json::object());

  // One optimizer step; returns the batch loss. NaN loss writes a diagnostic
  // checkpoint (when a directory is set) and throws DivergenceError.
  double step();
  // Steps until `cfg.steps`, logging every step and checkpointing to `dir`.
  void run(const std::filesystem::path& dir);

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& ckpt);
  void set_diagnostic_dir(std::filesystem::path dir) { diag_dir_ = std::move(dir); }

  std::int64_t steps_done() const { return step_; }
  double lr() const { return sched_.lr; }
  const LrScheduleState& schedule() const { return sched_; }
  lse::LseNet& model() { return net_; }
  const EmaState& ema() const { return ema_; }
  // Multiplies every parameter by `factor` (fault injection in tests).
  void corrupt(double factor);

 private:
  lse::LseConfig net_cfg_;
  spectral::SpectralConfig spec_;
  LseTrainConfig cfg_;
  std::vector<LseExample> data_;
  nlohmann::json manifest_;
  diffusion::NoiseSchedule schedule_;
  lse::LseNet net_{nullptr};
  std::unique_ptr<torch::optim::AdamW> opt_;
  LrScheduleState sched_;
  EmaState ema_;
  LossScaler scaler_;
  std::int64_t step_ = 0;
  std::filesystem::path diag_dir_;
};

// ---------------------------------------------------------------------------
// Vocoder trainer

enum class VocoderKind { vocos2d, baseline };
const char* to_string(VocoderKind k);
VocoderKind vocoder_kind_from_string(const std::string& name);

struct VocoderTrainConfig {
  std::int64_t steps = 3000;
  int batch_size = 2;
  double segment_seconds = 4.0;
  std::uint64_t seed = 0;
  OptimConfig optim{5e-4, 0.8, 0.9, 0.01, 1e-8, Precision::fp32};
  double decay_rate = 0.995;
  std::int64_t decay_interval = 1000;
  double ema_decay = 0.999;
  vocos::LossWeights weights{};
  vocos::DAConfig da{};
  vocos::DiscriminatorConfig disc{};
  std::int64_t checkpoint_every = 0;
  void validate() const;
};

struct VocoderStepReport {
  double discriminator = 0.0;
  double generator = 0.0;
  double adversarial = 0.0;
  double feature_matching = 0.0;
  double mel_l1 = 0.0;
};

struct AuditEntry {
  std::int64_t step;
  char role;  // 'D' or 'G'
};

class VocoderTrainer {
 public:
  VocoderTrainer(VocoderKind kind, vocos::Vocos2DConfig g2d, vocos::BaselineVocosConfig g1d,
                 spectral::SpectralConfig spec, VocoderTrainConfig cfg,
                 std::vector<torch::Tensor> segments,
                 nlohmann::json manifest = nlohmann::json::object());

  // Discriminator update followed by a generator update.
  VocoderStepReport step();
  void run(const std::filesystem::path& dir);

  // Generator input features for waveforms [B, n].
  torch::Tensor features(const torch::Tensor& w) const;
  torch::Tensor generate(const torch::Tensor& feats);
  // Mel L1 between w and the generator's resynthesis of w, without gradients.
  double resynthesis_mel_l1(const torch::Tensor& w);

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& ckpt);
  void set_diagnostic_dir(std::filesystem::path dir) { diag_dir_ = std::move(dir); }

  std::int64_t steps_done() const { return step_; }
  double lr() const { return sched_.lr; }
  const std::vector<AuditEntry>& audit() const { return audit_; }
  torch::nn::Module& generator();
  const EmaState& ema() const { return ema_; }

 private:
  VocoderKind kind_;
  spectral::SpectralConfig spec_;
  VocoderTrainConfig cfg_;
  std::vector<torch::Tensor> segments_;
  nlohmann::json manifest_;
  spectral::FeatureExtractor fx_;
  vocos::Vocos2D g2d_{nullptr};
  vocos::BaselineVocos g1d_{nullptr};
  vocos::MultiResolutionDiscriminator disc_{nullptr};
  std::unique_ptr<torch::optim::AdamW> opt_g_, opt_d_;
  LrScheduleState sched_;
  EmaState ema_;
  std::int64_t step_ = 0;
  std::vector<AuditEntry> audit_;
  std::filesystem::path diag_dir_;
};

}  // namespace lsevoc::training
