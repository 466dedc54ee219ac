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

// Objective realism harness: a small ConvNeXt spectrogram classifier, the
// negative-sample training regimes, score tables and spectrogram images.

#pragma once

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lsevoc/spectral.hpp"
#include "lsevoc/training.hpp"

namespace lsevoc::eval {

enum class InputKind { raw_log_magnitude, linear_filterbank };
const char* to_string(InputKind k);
InputKind input_kind_from_string(const std::string& name);

struct ClassifierConfig {
  int n_blocks = 8;
  std::vector<int> downsampling_ratios{4, 4, 2, 2};
  std::vector<int> blocks_per_stage{2, 2, 2, 2};
  std::vector<int> channels{32, 64, 96, 128};
  InputKind input_kind = InputKind::raw_log_magnitude;
  void validate() const;
  int total_downsampling() const;
};

// Spectrogram features of waveforms [..., n] for the given input kind.
torch::Tensor classifier_features(const spectral::FeatureExtractor& fx, InputKind kind,
                                  const torch::Tensor& w);

class ClassifierBlockImpl : public torch::nn::Module {
 public:
  explicit ClassifierBlockImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);  // [B, C, F, T]

  torch::nn::Conv2d dwconv{nullptr};
  torch::nn::LayerNorm norm{nullptr};
  torch::nn::Linear pw1{nullptr}, pw2{nullptr};
  torch::Tensor gamma;
};
TORCH_MODULE(ClassifierBlock);

class ConvNeXtClassifierImpl : public torch::nn::Module {
 public:
  ConvNeXtClassifierImpl(ClassifierConfig cfg, double pad_value);

  // Features [B, F, T] (or [F, T]) -> logits [B]. Trailing frames equal to
  // pad_value are dropped, then F and T are padded with pad_value up to
  // multiples of the total downsampling; cells past the content are zeroed
  // after every stage and excluded from pooling.
  torch::Tensor forward(const torch::Tensor& feats);
  torch::Tensor score(const torch::Tensor& feats);  // sigmoid(logits)
  // Final feature map before pooling, [B, C, ceil(F/64), ceil(T'/64)] where
  // T' excludes trailing pad frames.
  torch::Tensor feature_map(const torch::Tensor& feats);

  void set_standardization(double mean, double std);
  double input_mean() const { return mean_; }
  double input_std() const { return std_; }
  double pad_value() const { return pad_; }
  const ClassifierConfig& config() const { return cfg_; }

  torch::nn::ModuleList downsample{nullptr};
  torch::nn::ModuleList stages{nullptr};
  torch::nn::LayerNorm head_norm{nullptr};
  torch::nn::Linear head{nullptr};

 private:
  torch::Tensor prepare(const torch::Tensor& feats, std::int64_t& f_valid, std::int64_t& t_valid,
                        std::int64_t& t_extent);
  std::int64_t content_frames(const torch::Tensor& x) const;
  ClassifierConfig cfg_;
  double pad_;
  double mean_ = 0.0;
  double std_ = 1.0;
};
TORCH_MODULE(ConvNeXtClassifier);

struct ClassifierTrainConfig {
  std::int64_t steps = 500;
  int batch_size = 8;
  double lr = 1e-3;
  double weight_decay = 0.05;
  double crop_seconds = 4.0;
  std::uint64_t seed = 0;
  void validate() const;
};

struct ClassifierTrainResult {
  double final_loss = 0.0;
  double pos_weight = 1.0;
  std::vector<std::string> warnings;
  std::vector<double> losses;
};

// BCE training on features (each [F, T]); label 1 = real. Random crops of
// crop_seconds; an imbalance above 10:1 reweights positives by n_neg/n_pos
// and records a warning. Sets the input standardization from the data.
ClassifierTrainResult train_classifier(ConvNeXtClassifier& model,
                                       const std::vector<torch::Tensor>& positives,
                                       const std::vector<torch::Tensor>& negatives,
                                       const ClassifierTrainConfig& cfg,
                                       const spectral::SpectralConfig& spec);

std::vector<double> score_all(ConvNeXtClassifier& model, const std::vector<torch::Tensor>& feats);

// Mann-Whitney AUC with tie averaging; positives should score higher.
double auc(const std::vector<double>& positive_scores, const std::vector<double>& negative_scores);

training::Checkpoint classifier_checkpoint(ConvNeXtClassifier& model, const std::string& regime);
ConvNeXtClassifier classifier_from_checkpoint(const training::Checkpoint& ckpt,
                                              const spectral::SpectralConfig& spec);

// ---------------------------------------------------------------------------
// Regimes

struct RegimeSpec {
  std::string name;
  std::vector<std::string> negatives;
};

inline constexpr const char* kMethodGt = "gt";
// gt, mdctgan, vocos, lse-vocos2d.
const std::vector<std::string>& standard_methods();
// mdctgan-only, vocos-only, both, lse-vocos2d-only.
const std::vector<RegimeSpec>& standard_regimes();
const RegimeSpec& regime_by_name(const std::string& name);

struct ScoreRow {
  std::string method;
  bool seen = false;  // method audio took part in this classifier's training
  std::string regime;
  InputKind input_kind = InputKind::raw_log_magnitude;
  double mean_score = 0.0;
  std::int64_t count = 0;
};

struct ScoreTable {
  std::vector<ScoreRow> rows;
  std::vector<std::string> notices;
  const ScoreRow* find(const std::string& method, const std::string& regime, InputKind kind) const;
};

void write_score_csv(const std::filesystem::path& path, const ScoreTable& table);
// Heatmap: one row per method, one column per (regime, input kind).
void render_score_figure(const std::filesystem::path& path, const ScoreTable& table);

// Audio sets per method: <root>/<method>/{train,test}/*.wav.
struct MethodAudio {
  std::vector<spectral::WaveformClip> train, test;
  std::vector<std::string> train_ids, test_ids;  // file stems
};
std::map<std::string, MethodAudio> load_method_audio(const std::filesystem::path& root,
                                                     const std::vector<std::string>& methods,
                                                     std::vector<std::string>& notices);

struct RegimeRunConfig {
  std::vector<std::string> regimes{"mdctgan-only", "vocos-only", "both", "lse-vocos2d-only"};
  std::vector<InputKind> input_kinds{InputKind::raw_log_magnitude, InputKind::linear_filterbank};
  ClassifierConfig classifier{};
  ClassifierTrainConfig train{};
};

// Trains one classifier per (regime, input kind) on gt-vs-negatives train
// audio and scores every method's test audio. Classifier checkpoints go to
// <out_dir>/classifiers/<regime>.<kind> when out_dir is non-empty.
ScoreTable evaluate_regimes(const std::map<std::string, MethodAudio>& audio,
                            const RegimeRunConfig& cfg, const spectral::SpectralConfig& spec,
                            const std::filesystem::path& out_dir = {});

// Test ids must not occur among any method's train ids.
void check_disjoint(const std::map<std::string, MethodAudio>& audio);

// ---------------------------------------------------------------------------
// Images

// RGB8 image, row-major, top row first.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

// Perceptually uniform colormap (viridis polynomial fit), x in [0, 1].
std::array<std::uint8_t, 3> viridis(double x);

// Log-magnitude STFT image: one column per frame, one row per FFT bin with
// Nyquist at the top, dB relative to the clip peak clipped to [-80, 0].
Image spectrogram_image(const spectral::WaveformClip& clip, const spectral::SpectralConfig& cfg);
void render_spectrogram(const spectral::WaveformClip& clip, const std::filesystem::path& path,
                        const spectral::SpectralConfig& cfg);
// Image row showing frequency hz.
int spectrogram_row(double hz, const spectral::SpectralConfig& cfg);

// Brick-wall low-pass via FFT, zeroing bins above cutoff_hz.
torch::Tensor brickwall_lowpass(const torch::Tensor& w, double cutoff_hz, int sample_rate);

// External quality metrics plug in here; scores are per WAV path.
class ScoreProvider {
 public:
  virtual ~ScoreProvider() = default;
  virtual std::string name() const = 0;
  virtual double score(const std::filesystem::path& wav) = 0;
};

class ClassifierScoreProvider : public ScoreProvider {
 public:
  ClassifierScoreProvider(ConvNeXtClassifier model, spectral::SpectralConfig spec, std::string name);
  std::string name() const override { return name_; }
  double score(const std::filesystem::path& wav) override;

 private:
  ConvNeXtClassifier model_;
  spectral::SpectralConfig spec_;
  spectral::FeatureExtractor fx_;
  std::string name_;
};

}  // namespace lsevoc::eval
