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

#include "lsevoc/config.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "lsevoc/error.hpp"

namespace lsevoc::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::reference_setup: return "reference setup";
    case Provenance::design_choice: return "design choice";
    case Provenance::plumbing: return "plumbing";
  }
  return "?";
}

namespace {

constexpr auto R = Provenance::reference_setup;
constexpr auto D = Provenance::design_choice;
constexpr auto P = Provenance::plumbing;
using enum ValueType;

std::vector<KeySpec> build_registry() {
  return {
      {"spectral", "sample_rate", integer, 44100, R, "audio sample rate, Hz"},
      {"spectral", "frames_per_second", integer, 50, R, "feature frame rate; hop = sample_rate / frames_per_second"},
      {"spectral", "fft_size", integer, 2048, D, "STFT size"},
      {"spectral", "window_size", integer, 2048, D, "Hann window length"},
      {"spectral", "n_mel", integer, 80, R, "Slaney mel filter banks"},
      {"spectral", "mel_f_max", real, 8000.0, R, "upper edge of the mel filterbank, Hz"},
      {"spectral", "amplitude_floor", real, 1e-5, D, "magnitude floor before the log"},
      {"spectral", "per_bin_norm", boolean, false, D, "per-bank instead of scalar normalization"},

      {"data", "test_ratio", real, 0.1, D, "fraction of clips assigned to the test split"},
      {"data", "split_seed", integer, 0, P, "seed of the id-hash split"},
      {"data", "resampler_zero_crossings", integer, 32, D, "sinc zero crossings per side"},
      {"data", "resampler_kaiser_beta", real, 9.0, D, "Kaiser window beta"},
      {"data", "resampler_rolloff", real, 0.945, D, "cutoff as a fraction of the lower Nyquist"},

      {"toy", "n_clips", integer, 8, D, "clips written by toy-corpus"},
      {"toy", "seconds", real, 8.0, D, "length of each toy clip"},
      {"toy", "seed", integer, 0, P, "toy corpus seed"},

      {"diffusion", "sample_steps", integer, 32, R, "DPM++ 2M Karras sampling steps"},
      {"diffusion", "rho", real, 7.0, D, "Karras ladder exponent"},

      {"lse", "n_blocks", integer, 8, R, "backbone blocks"},
      {"lse", "n_heads", integer, 8, R, "self-attention heads"},
      {"lse", "hidden", integer, 320, R, "hidden width"},
      {"lse", "patch_t", integer, 2, D, "frames per patch"},
      {"lse", "patch_f", integer, 8, D, "linear banks per patch"},
      {"lse", "ffn_expand", integer, 4, D, "feed-forward expansion"},
      {"lse", "cond_layers", integer, 2, D, "condition MLP depth"},
      {"lse", "time_embed_dim", integer, 256, D, "sinusoidal step embedding width"},

      {"lse_train", "steps", integer, 1200000, R, "optimizer steps"},
      {"lse_train", "batch_size", integer, 18, R, "segments per step"},
      {"lse_train", "segment_seconds", real, 8.0, R, "training segment length"},
      {"lse_train", "lr", real, 1e-4, R, "initial AdamW learning rate"},
      {"lse_train", "beta1", real, 0.9, D, "AdamW beta1"},
      {"lse_train", "beta2", real, 0.999, D, "AdamW beta2"},
      {"lse_train", "weight_decay", real, 0.01, D, "AdamW decoupled weight decay"},
      {"lse_train", "eps", real, 1e-8, D, "AdamW epsilon"},
      {"lse_train", "precision", string, "fp16", R, "fp16 (autocast with loss scaling) or fp32"},
      {"lse_train", "plateau_window", integer, 150000, R, "steps without a new minimum before halving"},
      {"lse_train", "plateau_half_life", real, 1000.0, D, "half-life of the loss smoother, steps"},
      {"lse_train", "ema_decay", real, 0.999, D, "EMA decay of the saved weights"},
      {"lse_train", "checkpoint_every", integer, 10000, P, "steps between checkpoints; 0 = final only"},
      {"lse_train", "seed", integer, 0, P, "initialization and batch seed"},

      {"vocos2d", "n_blocks", integer, 24, R, "ConvNeXt blocks"},
      {"vocos2d", "hidden", integer, 256, R, "hidden width"},
      {"vocos2d", "kernel_time", integer, 7, D, "depthwise kernel extent along time"},
      {"vocos2d", "kernel_freq", integer, 7, D, "depthwise kernel extent along frequency"},
      {"vocos2d", "bottleneck_expand", integer, 3, D, "pointwise expansion"},
      {"vocos2d", "freq_grid", integer, 37, D, "frequency cells inside the generator"},
      {"vocos2d", "layer_scale_init", real, -1.0, D, "initial block gate; negative = 1 / n_blocks"},

      {"vocos_baseline", "n_blocks", integer, 10, R, "ConvNeXt blocks"},
      {"vocos_baseline", "hidden", integer, 512, R, "hidden width"},
      {"vocos_baseline", "bottleneck_expand", integer, 3, D, "pointwise expansion"},
      {"vocos_baseline", "kernel", integer, 7, D, "depthwise kernel"},
      {"vocos_baseline", "layer_scale_init", real, -1.0, D, "initial block gate; negative = 1 / n_blocks"},

      {"vocoder_train", "steps", integer, 900000, R, "generator/discriminator step pairs"},
      {"vocoder_train", "batch_size", integer, 16, D, "segments per step"},
      {"vocoder_train", "segment_seconds", real, 4.0, R, "training segment length"},
      {"vocoder_train", "lr", real, 5e-4, R, "initial AdamW learning rate"},
      {"vocoder_train", "beta1", real, 0.8, D, "AdamW beta1"},
      {"vocoder_train", "beta2", real, 0.9, D, "AdamW beta2"},
      {"vocoder_train", "weight_decay", real, 0.01, D, "AdamW decoupled weight decay"},
      {"vocoder_train", "eps", real, 1e-8, D, "AdamW epsilon"},
      {"vocoder_train", "decay_rate", real, 0.995, R, "exponential learning-rate decay factor"},
      {"vocoder_train", "decay_interval", integer, 1000, D, "steps per decay application"},
      {"vocoder_train", "ema_decay", real, 0.999, R, "EMA decay of the saved weights"},
      {"vocoder_train", "weight_adversarial", real, 1.0, D, "adversarial loss weight"},
      {"vocoder_train", "weight_feature_matching", real, 1.0, D, "feature-matching loss weight"},
      {"vocoder_train", "weight_mel", real, 45.0, D, "mel L1 loss weight"},
      {"vocoder_train", "checkpoint_every", integer, 10000, P, "steps between checkpoints; 0 = final only"},
      {"vocoder_train", "seed", integer, 0, P, "initialization, batch and augmentation seed"},

      {"da", "enabled", boolean, true, R, "augment discriminator inputs"},
      {"da", "loudness_range_db", real, 6.0, R, "gain drawn from +-range dB"},
      {"da", "max_shift", integer, 882, D, "largest circular sample shift"},

      {"discriminator", "fft_sizes", int_list, json::array({2048, 1024, 512}), D, "STFT size per resolution"},
      {"discriminator", "hops", int_list, json::array({512, 256, 128}), D, "hop per resolution"},
      {"discriminator", "windows", int_list, json::array({2048, 1024, 512}), D, "window per resolution"},
      {"discriminator", "weights", real_list, json::array({1.0, 1.0, 1.0}), D, "loss weight per resolution"},
      {"discriminator", "channels", integer, 32, D, "convolution channels"},

      {"classifier", "n_blocks", integer, 8, R, "ConvNeXt blocks"},
      {"classifier", "downsampling_ratios", int_list, json::array({4, 4, 2, 2}), R, "per-stage downsampling"},
      {"classifier", "blocks_per_stage", int_list, json::array({2, 2, 2, 2}), D, "blocks in each stage"},
      {"classifier", "channels", int_list, json::array({32, 64, 96, 128}), D, "channels in each stage"},

      {"classifier_train", "steps", integer, 500, D, "optimizer steps per classifier"},
      {"classifier_train", "batch_size", integer, 8, D, "crops per step"},
      {"classifier_train", "lr", real, 1e-3, D, "AdamW learning rate"},
      {"classifier_train", "weight_decay", real, 0.05, D, "AdamW weight decay"},
      {"classifier_train", "crop_seconds", real, 4.0, D, "training crop length"},
      {"classifier_train", "seed", integer, 0, P, "initialization and batch seed"},

      {"eval", "regimes", string_list,
       json::array({"mdctgan-only", "vocos-only", "both", "lse-vocos2d-only"}), R,
       "negative-sample regimes"},
      {"eval", "input_kinds", string_list, json::array({"raw_log_magnitude", "linear_filterbank"}), R,
       "classifier input representations"},

      {"synth", "seed", integer, 0, P, "sampling seed"},

      {"paths", "runs", string, "runs", P, "training output root (env LSEVOC_RUNS_DIR)"},
      {"paths", "cache", string, "", P, "feature cache; empty = <dataset>/cache (env LSEVOC_CACHE_DIR)"},

      {"runtime", "threads", integer, 0, P, "intra-op threads; 0 = library default"},
  };
}

bool type_ok(ValueType t, const json& v) {
  auto all = [&](auto pred) {
    return v.is_array() && std::all_of(v.begin(), v.end(), pred);
  };
  switch (t) {
    case integer: return v.is_number_integer();
    case real: return v.is_number();
    case boolean: return v.is_boolean();
    case string: return v.is_string();
    case int_list: return all([](const json& e) { return e.is_number_integer(); });
    case real_list: return all([](const json& e) { return e.is_number(); });
    case string_list: return all([](const json& e) { return e.is_string(); });
  }
  return false;
}

const char* type_name(ValueType t) {
  switch (t) {
    case integer: return "integer";
    case real: return "number";
    case boolean: return "boolean";
    case string: return "string";
    case int_list: return "integer list";
    case real_list: return "number list";
    case string_list: return "string list";
  }
  return "?";
}

json coerce(ValueType t, const json& v) {
  if (t == real && v.is_number()) return v.get<double>();
  if (t == real_list && v.is_array()) {
    json out = json::array();
    for (const auto& e : v) out.push_back(e.is_number() ? json(e.get<double>()) : e);
    return out;
  }
  return v;
}

json parse_value(ValueType t, const std::string& text) {
  const bool list = t == int_list || t == real_list || t == string_list;
  if (t == string) return text;
  if (list && (text.empty() || text.front() != '[')) {
    json out = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (t == string_list) {
        out.push_back(item);
      } else {
        out.push_back(json::parse(item, nullptr, false));
      }
    }
    return out;
  }
  return json::parse(text, nullptr, false);
}

std::vector<int> ints(const json& v) { return v.get<std::vector<int>>(); }

}  // namespace

const std::vector<KeySpec>& key_registry() {
  static const std::vector<KeySpec> r = build_registry();
  return r;
}

const KeySpec* find_key(const std::string& path) {
  for (const auto& k : key_registry()) {
    if (k.path() == path) return &k;
  }
  return nullptr;
}

std::string keys_help() {
  std::ostringstream os;
  os << "Configuration keys (section.key = default  [provenance]  description):\n";
  std::string section;
  for (const auto& k : key_registry()) {
    if (k.section != section) {
      section = k.section;
      os << "\n  [" << section << "]\n";
    }
    os << "    " << std::left << std::setw(38) << (k.path() + " = " + k.default_value.dump()) << " ["
       << to_string(k.provenance) << "]  " << k.doc << "\n";
  }
  return os.str();
}

GlobalConfig::GlobalConfig() : tree_(json::object()) {
  for (const auto& k : key_registry()) tree_[k.section][k.key] = k.default_value;
  if (const char* env = std::getenv("LSEVOC_RUNS_DIR"); env && *env) tree_["paths"]["runs"] = env;
  if (const char* env = std::getenv("LSEVOC_CACHE_DIR"); env && *env) tree_["paths"]["cache"] = env;
}

void GlobalConfig::set(const std::string& path, const json& value, const std::string& origin) {
  const auto* spec = find_key(path);
  if (spec == nullptr) throw ConfigError(origin + ": unknown config key '" + path + "'");
  if (!type_ok(spec->type, value)) {
    throw ConfigError(origin + ": " + path + " expects " + type_name(spec->type) + ", got " + value.dump());
  }
  tree_[spec->section][spec->key] = coerce(spec->type, value);
}

void GlobalConfig::merge(const json& doc, const std::string& origin) {
  if (!doc.is_object()) throw ConfigError(origin + ": config must be a JSON object of sections");
  for (const auto& [section, body] : doc.items()) {
    if (!tree_.contains(section)) throw ConfigError(origin + ": unknown config section '" + section + "'");
    if (!body.is_object()) throw ConfigError(origin + ": section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) set(section + "." + key, value, origin);
  }
}

void GlobalConfig::merge_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  json doc = json::parse(is, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  merge(doc, path.string());
}

void GlobalConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  }
  const auto path = assignment.substr(0, eq);
  const auto* spec = find_key(path);
  if (spec == nullptr) throw ConfigError("--set: unknown config key '" + path + "'");
  auto value = parse_value(spec->type, assignment.substr(eq + 1));
  if (value.is_discarded()) throw ConfigError("--set: cannot parse value for " + path);
  set(path, value, "--set");
}

const json& GlobalConfig::get(const std::string& path) const {
  const auto* spec = find_key(path);
  if (spec == nullptr) throw ConfigError("unknown config key '" + path + "'");
  return tree_.at(spec->section).at(spec->key);
}

std::int64_t GlobalConfig::integer(const std::string& path) const { return get(path).get<std::int64_t>(); }
double GlobalConfig::real(const std::string& path) const { return get(path).get<double>(); }
bool GlobalConfig::boolean(const std::string& path) const { return get(path).get<bool>(); }
std::string GlobalConfig::string(const std::string& path) const { return get(path).get<std::string>(); }

json GlobalConfig::section(const std::string& name) const {
  if (!tree_.contains(name)) throw ConfigError("unknown config section '" + name + "'");
  return tree_.at(name);
}

spectral::SpectralConfig GlobalConfig::spectral() const {
  spectral::SpectralConfig c;
  c.sample_rate = static_cast<int>(integer("spectral.sample_rate"));
  c.frames_per_second = static_cast<int>(integer("spectral.frames_per_second"));
  c.fft_size = static_cast<int>(integer("spectral.fft_size"));
  c.window_size = static_cast<int>(integer("spectral.window_size"));
  c.n_mel = static_cast<int>(integer("spectral.n_mel"));
  c.mel_f_max = real("spectral.mel_f_max");
  c.amplitude_floor = real("spectral.amplitude_floor");
  c.per_bin_norm = boolean("spectral.per_bin_norm");
  c.validate();
  return c;
}

data::IngestConfig GlobalConfig::ingest() const {
  data::IngestConfig c;
  c.sample_rate = static_cast<int>(integer("spectral.sample_rate"));
  c.test_ratio = real("data.test_ratio");
  c.split_seed = static_cast<std::uint64_t>(integer("data.split_seed"));
  c.resampler.zero_crossings = static_cast<int>(integer("data.resampler_zero_crossings"));
  c.resampler.kaiser_beta = real("data.resampler_kaiser_beta");
  c.resampler.rolloff = real("data.resampler_rolloff");
  if (!(c.test_ratio >= 0.0 && c.test_ratio < 1.0)) throw ConfigError("data.test_ratio must lie in [0, 1)");
  return c;
}

data::ToyCorpusConfig GlobalConfig::toy() const {
  data::ToyCorpusConfig c;
  c.n_clips = static_cast<int>(integer("toy.n_clips"));
  c.seconds = real("toy.seconds");
  c.sample_rate = static_cast<int>(integer("spectral.sample_rate"));
  c.seed = static_cast<std::uint64_t>(integer("toy.seed"));
  if (c.n_clips < 1 || !(c.seconds > 0.0)) throw ConfigError("toy.n_clips and toy.seconds must be positive");
  return c;
}

lse::LseConfig GlobalConfig::lse() const {
  const auto spec = spectral();
  lse::LseConfig c;
  c.n_blocks = static_cast<int>(integer("lse.n_blocks"));
  c.n_heads = static_cast<int>(integer("lse.n_heads"));
  c.hidden = static_cast<int>(integer("lse.hidden"));
  c.patch_t = static_cast<int>(integer("lse.patch_t"));
  c.patch_f = static_cast<int>(integer("lse.patch_f"));
  c.ffn_expand = static_cast<int>(integer("lse.ffn_expand"));
  c.cond_layers = static_cast<int>(integer("lse.cond_layers"));
  c.time_embed_dim = static_cast<int>(integer("lse.time_embed_dim"));
  c.n_linear = spec.n_linear();
  c.n_mel = spec.n_mel;
  c.validate();
  return c;
}

diffusion::SamplerPlan GlobalConfig::sampler(const diffusion::NoiseSchedule& schedule) const {
  const auto n = integer("diffusion.sample_steps");
  if (n < 1) throw ConfigError("diffusion.sample_steps must be >= 1");
  return diffusion::SamplerPlan::karras(schedule, static_cast<int>(n), real("diffusion.rho"));
}

vocos::Vocos2DConfig GlobalConfig::vocos2d() const {
  const auto spec = spectral();
  vocos::Vocos2DConfig c;
  c.n_blocks = static_cast<int>(integer("vocos2d.n_blocks"));
  c.hidden = static_cast<int>(integer("vocos2d.hidden"));
  c.depthwise_kernel = {static_cast<int>(integer("vocos2d.kernel_time")),
                        static_cast<int>(integer("vocos2d.kernel_freq"))};
  c.bottleneck_expand = static_cast<int>(integer("vocos2d.bottleneck_expand"));
  c.freq_grid = static_cast<int>(integer("vocos2d.freq_grid"));
  c.layer_scale_init = real("vocos2d.layer_scale_init");
  c.out_bins = spec.n_bins();
  c.input_bins = spec.n_linear();
  c.validate();
  return c;
}

vocos::BaselineVocosConfig GlobalConfig::baseline() const {
  const auto spec = spectral();
  vocos::BaselineVocosConfig c;
  c.n_blocks = static_cast<int>(integer("vocos_baseline.n_blocks"));
  c.hidden = static_cast<int>(integer("vocos_baseline.hidden"));
  c.bottleneck_expand = static_cast<int>(integer("vocos_baseline.bottleneck_expand"));
  c.kernel = static_cast<int>(integer("vocos_baseline.kernel"));
  c.layer_scale_init = real("vocos_baseline.layer_scale_init");
  c.input_bins = spec.n_mel;
  c.out_bins = spec.n_bins();
  c.validate();
  return c;
}

training::LseTrainConfig GlobalConfig::lse_train() const {
  training::LseTrainConfig c;
  c.steps = integer("lse_train.steps");
  c.batch_size = static_cast<int>(integer("lse_train.batch_size"));
  c.segment_seconds = real("lse_train.segment_seconds");
  c.seed = static_cast<std::uint64_t>(integer("lse_train.seed"));
  c.optim = {real("lse_train.lr"),           real("lse_train.beta1"), real("lse_train.beta2"),
             real("lse_train.weight_decay"), real("lse_train.eps"),
             training::precision_from_string(string("lse_train.precision"))};
  c.plateau_window = integer("lse_train.plateau_window");
  c.plateau_half_life = real("lse_train.plateau_half_life");
  c.ema_decay = real("lse_train.ema_decay");
  c.checkpoint_every = integer("lse_train.checkpoint_every");
  c.validate();
  return c;
}

training::VocoderTrainConfig GlobalConfig::vocoder_train() const {
  training::VocoderTrainConfig c;
  c.steps = integer("vocoder_train.steps");
  c.batch_size = static_cast<int>(integer("vocoder_train.batch_size"));
  c.segment_seconds = real("vocoder_train.segment_seconds");
  c.seed = static_cast<std::uint64_t>(integer("vocoder_train.seed"));
  c.optim = {real("vocoder_train.lr"),           real("vocoder_train.beta1"), real("vocoder_train.beta2"),
             real("vocoder_train.weight_decay"), real("vocoder_train.eps"),   training::Precision::fp32};
  c.decay_rate = real("vocoder_train.decay_rate");
  c.decay_interval = integer("vocoder_train.decay_interval");
  c.ema_decay = real("vocoder_train.ema_decay");
  c.weights = {real("vocoder_train.weight_adversarial"), real("vocoder_train.weight_feature_matching"),
               real("vocoder_train.weight_mel")};
  c.checkpoint_every = integer("vocoder_train.checkpoint_every");
  c.da.enabled = boolean("da.enabled");
  c.da.loudness_range_db = real("da.loudness_range_db");
  c.da.max_shift = static_cast<int>(integer("da.max_shift"));
  const auto ffts = ints(get("discriminator.fft_sizes"));
  const auto hops = ints(get("discriminator.hops"));
  const auto wins = ints(get("discriminator.windows"));
  if (ffts.size() != hops.size() || ffts.size() != wins.size()) {
    throw ConfigError("discriminator.fft_sizes, hops and windows must have equal lengths");
  }
  c.disc.resolutions.clear();
  for (std::size_t i = 0; i < ffts.size(); ++i) c.disc.resolutions.push_back({ffts[i], hops[i], wins[i]});
  c.disc.weights = get("discriminator.weights").get<std::vector<double>>();
  c.disc.channels = static_cast<int>(integer("discriminator.channels"));
  c.validate();
  return c;
}

eval::ClassifierConfig GlobalConfig::classifier() const {
  eval::ClassifierConfig c;
  c.n_blocks = static_cast<int>(integer("classifier.n_blocks"));
  c.downsampling_ratios = ints(get("classifier.downsampling_ratios"));
  c.blocks_per_stage = ints(get("classifier.blocks_per_stage"));
  c.channels = ints(get("classifier.channels"));
  c.validate();
  return c;
}

eval::ClassifierTrainConfig GlobalConfig::classifier_train() const {
  eval::ClassifierTrainConfig c;
  c.steps = integer("classifier_train.steps");
  c.batch_size = static_cast<int>(integer("classifier_train.batch_size"));
  c.lr = real("classifier_train.lr");
  c.weight_decay = real("classifier_train.weight_decay");
  c.crop_seconds = real("classifier_train.crop_seconds");
  c.seed = static_cast<std::uint64_t>(integer("classifier_train.seed"));
  c.validate();
  return c;
}

eval::RegimeRunConfig GlobalConfig::regime_run() const {
  eval::RegimeRunConfig c;
  c.regimes = get("eval.regimes").get<std::vector<std::string>>();
  for (const auto& r : c.regimes) eval::regime_by_name(r);
  c.input_kinds.clear();
  for (const auto& k : get("eval.input_kinds").get<std::vector<std::string>>()) {
    c.input_kinds.push_back(eval::input_kind_from_string(k));
  }
  if (c.regimes.empty() || c.input_kinds.empty()) throw ConfigError("eval.regimes and eval.input_kinds must be non-empty");
  c.classifier = classifier();
  c.train = classifier_train();
  return c;
}

namespace {

void diff_into(const json& a, const json& b, const std::string& prefix, const std::set<std::string>& ignore,
               std::vector<std::string>& out) {
  if (ignore.count(prefix)) return;
  if (a.is_object() && b.is_object()) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a.items()) keys.insert(k);
    for (const auto& [k, v] : b.items()) keys.insert(k);
    for (const auto& k : keys) {
      const auto p = prefix.empty() ? k : prefix + "." + k;
      if (!a.contains(k)) {
        if (!ignore.count(p)) out.push_back(p + ": (absent) -> " + b.at(k).dump());
      } else if (!b.contains(k)) {
        if (!ignore.count(p)) out.push_back(p + ": " + a.at(k).dump() + " -> (absent)");
      } else {
        diff_into(a.at(k), b.at(k), p, ignore, out);
      }
    }
    return;
  }
  if (a != b) out.push_back(prefix + ": " + a.dump() + " -> " + b.dump());
}

}  // namespace

std::vector<std::string> config_diff(const json& expected, const json& actual,
                                     const std::vector<std::string>& ignore) {
  std::vector<std::string> out;
  diff_into(expected, actual, "", {ignore.begin(), ignore.end()}, out);
  return out;
}

}  // namespace lsevoc::cli
