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

#include "lsevoc/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "lsevoc/error.hpp"
#include "lsevoc/wav.hpp"

namespace lsevoc::data {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Resampling

namespace {

double kaiser(double u, double beta) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - u * u)) / std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

// Taps for output positions whose fractional input offset is `frac`,
// covering input offsets j = 1 - K .. K; normalized to unit sum.
std::vector<double> phase_taps(double frac, int K, double fc, double half_width, double beta) {
  std::vector<double> taps(static_cast<std::size_t>(2 * K));
  double sum = 0.0;
  for (int j = 1 - K; j <= K; ++j) {
    const double u = frac - j;
    const double v = 2.0 * fc * sinc(2.0 * fc * u) * kaiser(u / half_width, beta);
    taps[static_cast<std::size_t>(j + K - 1)] = v;
    sum += v;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

}  // namespace

std::vector<float> resample(const std::vector<float>& x, int from_rate, int to_rate,
                            const ResamplerConfig& cfg) {
  if (from_rate <= 0 || to_rate <= 0) throw ConfigError("resample: rates must be positive");
  if (from_rate == to_rate) return x;
  const auto g = std::gcd(from_rate, to_rate);
  const std::int64_t L = to_rate / g;
  const std::int64_t M = from_rate / g;
  const double fc = 0.5 * cfg.rolloff * std::min(1.0, static_cast<double>(L) / M);
  const double half_width = cfg.zero_crossings / (2.0 * fc);
  const int K = static_cast<int>(std::ceil(half_width)) + 1;
  const auto n_in = static_cast<std::int64_t>(x.size());
  const auto n_out = static_cast<std::int64_t>(std::llround(static_cast<double>(n_in) * L / M));

  std::vector<std::vector<double>> bank;
  constexpr std::int64_t kMaxPhases = 4096;
  if (L <= kMaxPhases) {
    bank.reserve(static_cast<std::size_t>(L));
    for (std::int64_t p = 0; p < L; ++p) {
      bank.push_back(phase_taps(static_cast<double>(p) / L, K, fc, half_width, cfg.kaiser_beta));
    }
  }

  std::vector<float> y(static_cast<std::size_t>(n_out));
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t num = n * M;
    const std::int64_t i0 = num / L;
    const std::int64_t p = num % L;
    std::vector<double> local;
    const std::vector<double>* taps;
    if (!bank.empty()) {
      taps = &bank[static_cast<std::size_t>(p)];
    } else {
      local = phase_taps(static_cast<double>(p) / L, K, fc, half_width, cfg.kaiser_beta);
      taps = &local;
    }
    double acc = 0.0;
    for (int j = 1 - K; j <= K; ++j) {
      const auto k = i0 + j;
      if (k < 0 || k >= n_in) continue;
      acc += (*taps)[static_cast<std::size_t>(j + K - 1)] * x[static_cast<std::size_t>(k)];
    }
    y[static_cast<std::size_t>(n)] = static_cast<float>(acc);
  }
  return y;
}

// ---------------------------------------------------------------------------
// Ingestion and manifest

std::string entry_id(const std::string& relative_path) {
  auto stem = fs::path(relative_path).stem().string();
  std::string clean;
  for (char c : stem) {
    clean += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  if (clean.empty()) clean = "clip";
  return clean + "-" + to_hex(fingerprint_of(relative_path)).substr(0, 8);
}

std::string assign_split(const std::string& id, double test_ratio, std::uint64_t seed) {
  const auto fp = fingerprint_of(id);
  std::uint64_t h = 0;
  std::memcpy(&h, fp.data(), sizeof(h));
  const double u = static_cast<double>(mix_seed(seed, h) >> 11) * 0x1.0p-53;
  return u < test_ratio ? "test" : "train";
}

IngestResult ingest(const fs::path& in_dir, const fs::path& out_dir, const IngestConfig& cfg) {
  if (!fs::is_directory(in_dir)) throw DataError("no audio found: " + in_dir.string() + " is not a directory");
  if (!(cfg.test_ratio >= 0.0 && cfg.test_ratio < 1.0)) {
    throw ConfigError("data.test_ratio must lie in [0, 1)");
  }
  std::vector<std::string> rels;
  for (const auto& e : fs::recursive_directory_iterator(in_dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext != ".wav") continue;
    rels.push_back(fs::relative(e.path(), in_dir).generic_string());
  }
  std::sort(rels.begin(), rels.end());

  IngestResult res;
  std::set<std::string> ids;
  fs::create_directories(out_dir / "audio");
  for (const auto& rel : rels) {
    wav::Audio audio;
    try {
      audio = wav::read(in_dir / rel);
    } catch (const DataError& e) {
      res.warnings.push_back("skipping " + rel + ": " + e.what());
      std::cerr << "warning: " << res.warnings.back() << "\n";
      continue;
    }
    if (audio.frames() == 0) {
      res.warnings.push_back("skipping " + rel + ": no samples");
      std::cerr << "warning: " << res.warnings.back() << "\n";
      continue;
    }
    auto mono = resample(audio.mono(), audio.sample_rate, cfg.sample_rate, cfg.resampler);
    ManifestEntry m;
    m.id = entry_id(rel);
    if (!ids.insert(m.id).second) throw DataError("id collision for " + rel);
    m.source_path = rel;
    m.duration_s = static_cast<double>(mono.size()) / cfg.sample_rate;
    m.sample_rate_original = audio.sample_rate;
    m.split = assign_split(m.id, cfg.test_ratio, cfg.split_seed);
    wav::write(audio_path(out_dir, m.id), mono, cfg.sample_rate, wav::SampleFormat::float32);
    res.entries.push_back(std::move(m));
  }
  if (res.entries.empty()) throw DataError("no audio found under " + in_dir.string());
  write_manifest(out_dir / "manifest.jsonl", res.entries);
  return res;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  for (const auto& e : entries) {
    ojson j;
    j["id"] = e.id;
    j["source_path"] = e.source_path;
    j["duration_s"] = e.duration_s;
    j["sample_rate_original"] = e.sample_rate_original;
    j["split"] = e.split;
    os << j.dump() << "\n";
  }
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    ManifestEntry e;
    try {
      auto j = ojson::parse(line);
      e.id = j.at("id").get<std::string>();
      e.source_path = j.at("source_path").get<std::string>();
      e.duration_s = j.at("duration_s").get<double>();
      e.sample_rate_original = j.at("sample_rate_original").get<int>();
      e.split = j.at("split").get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    if (!ids.insert(e.id).second) throw DataError("manifest: duplicate id " + e.id);
    if (!(e.duration_s > 0.0)) throw DataError("manifest: non-positive duration for " + e.id);
    if (e.split != "train" && e.split != "test") throw DataError("manifest: bad split for " + e.id);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> select_split(const std::vector<ManifestEntry>& entries,
                                        const std::string& split) {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

Fingerprint manifest_fingerprint(const std::vector<ManifestEntry>& entries) {
  Fnv128 h;
  for (const auto& e : entries) {
    h.update(e.id).update(";").update(e.split).update(";");
    h.update_pod(e.duration_s);
  }
  return h.digest();
}

fs::path audio_path(const fs::path& dataset_dir, const std::string& id) {
  return dataset_dir / "audio" / (id + ".wav");
}

spectral::WaveformClip load_clip(const fs::path& dataset_dir, const ManifestEntry& entry) {
  auto a = wav::read(audio_path(dataset_dir, entry.id));
  auto mono = a.mono();
  auto t = torch::from_blob(mono.data(), {static_cast<std::int64_t>(mono.size())}, torch::kFloat).clone();
  return {t, a.sample_rate};
}

// ---------------------------------------------------------------------------
// Normalization statistics

namespace {

struct Moments {
  torch::Tensor count;  // [K] double
  torch::Tensor mean;
  torch::Tensor m2;

  // Chan et al. pairwise merge of per-bin moments.
  void merge(const torch::Tensor& values) {
    auto v = values.to(torch::kDouble);
    const double n = static_cast<double>(v.size(1));
    auto mu = v.mean(1);
    auto m2b = (v - mu.unsqueeze(1)).pow(2).sum(1);
    if (!count.defined()) {
      count = torch::full_like(mu, n);
      mean = mu;
      m2 = m2b;
      return;
    }
    auto tot = count + n;
    auto delta = mu - mean;
    mean = mean + delta * (n / tot);
    m2 = m2 + m2b + delta.pow(2) * count * (n / tot);
    count = tot;
  }

  std::pair<double, double> global() const {
    const double n = count.sum().item<double>();
    const double mu = (mean * count).sum().item<double>() / n;
    const double m2g = (m2 + count * (mean - mu).pow(2)).sum().item<double>();
    return {mu, std::sqrt(m2g / n)};
  }
};

constexpr double kMinStd = 1e-3;

void finish(const Moments& m, bool per_bin, const char* what, std::vector<double>& mean_out,
            std::vector<double>& std_out) {
  const auto [mu, sd] = m.global();
  if (!(sd >= kMinStd)) {
    throw DataError(std::string("degenerate corpus: ") + what + " std " + std::to_string(sd) +
                    " is below " + std::to_string(kMinStd));
  }
  if (!per_bin) {
    mean_out = {mu};
    std_out = {sd};
    return;
  }
  auto sdb = (m.m2 / m.count).sqrt();
  const auto k = sdb.size(0);
  mean_out.resize(static_cast<std::size_t>(k));
  std_out.resize(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) {
    mean_out[static_cast<std::size_t>(i)] = m.mean[i].item<double>();
    const double s = sdb[i].item<double>();
    std_out[static_cast<std::size_t>(i)] = s >= kMinStd ? s : sd;
  }
}

}  // namespace

spectral::NormStats compute_norm_stats(const fs::path& dataset_dir,
                                       const std::vector<ManifestEntry>& entries,
                                       const spectral::SpectralConfig& cfg) {
  auto train = select_split(entries, "train");
  if (train.empty()) throw DataError("norm stats: the train split is empty");
  spectral::FeatureExtractor fx(cfg);
  Moments lin, mel;
  torch::NoGradGuard g;
  for (const auto& e : train) {
    auto clip = load_clip(dataset_dir, e);
    lin.merge(fx.log_linear(clip.samples));
    mel.merge(fx.log_mel(clip.samples));
  }
  spectral::NormStats s;
  finish(lin, cfg.per_bin_norm, "linear", s.linear_mean, s.linear_std);
  finish(mel, cfg.per_bin_norm, "mel", s.mel_mean, s.mel_std);
  return s;
}

namespace {

ojson vec_or_scalar(const std::vector<double>& v) {
  if (v.size() == 1) return v.front();
  return v;
}

std::vector<double> read_vec(const ojson& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

}  // namespace

nlohmann::json norm_stats_to_json(const spectral::NormStats& s) {
  ojson j;
  j["linear_mean"] = vec_or_scalar(s.linear_mean);
  j["linear_std"] = vec_or_scalar(s.linear_std);
  j["mel_mean"] = vec_or_scalar(s.mel_mean);
  j["mel_std"] = vec_or_scalar(s.mel_std);
  return nlohmann::json::parse(j.dump());
}

spectral::NormStats norm_stats_from_json(const nlohmann::json& j) {
  try {
    const auto o = ojson::parse(j.dump());
    spectral::NormStats s;
    s.linear_mean = read_vec(o, "linear_mean");
    s.linear_std = read_vec(o, "linear_std");
    s.mel_mean = read_vec(o, "mel_mean");
    s.mel_std = read_vec(o, "mel_std");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("normalization statistics: ") + e.what());
  }
}

void write_norm_stats(const fs::path& path, const spectral::NormStats& s) {
  std::ofstream os(path, std::ios::binary);
  os << norm_stats_to_json(s).dump(2) << "\n";
  if (!os) throw DataError("cannot write " + path.string());
}

spectral::NormStats read_norm_stats(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read stats file " + path.string());
  try {
    auto j = ojson::parse(is);
    spectral::NormStats s;
    s.linear_mean = read_vec(j, "linear_mean");
    s.linear_std = read_vec(j, "linear_std");
    s.mel_mean = read_vec(j, "mel_mean");
    s.mel_std = read_vec(j, "mel_std");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Feature cache

namespace {

constexpr char kFeatMagic[8] = {'L', 'S', 'E', 'F', 'E', 'A', 'T', '1'};

}  // namespace

fs::path cache_path(const fs::path& cache_dir, const std::string& id, spectral::FeatureKind kind) {
  return cache_dir / (id + "." + spectral::to_string(kind) + ".lsf");
}

void write_feature(const fs::path& path, const torch::Tensor& values, const Fingerprint& fp) {
  if (values.dim() != 2) throw ShapeError("feature record must be [bins, frames]");
  auto v = values.detach().to(torch::kCPU, torch::kFloat).contiguous();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os.write(kFeatMagic, 8);
  const auto bins = static_cast<std::uint32_t>(v.size(0));
  const auto frames = static_cast<std::uint32_t>(v.size(1));
  os.write(reinterpret_cast<const char*>(&bins), 4);
  os.write(reinterpret_cast<const char*>(&frames), 4);
  os.write(reinterpret_cast<const char*>(fp.data()), 16);
  os.write(static_cast<const char*>(v.data_ptr()), static_cast<std::streamsize>(v.numel() * 4));
  if (!os) throw DataError("write failed for " + path.string());
}

FeatureRecord read_feature(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read feature record " + path.string());
  char magic[8];
  std::uint32_t bins = 0, frames = 0;
  FeatureRecord r;
  if (!is.read(magic, 8) || std::memcmp(magic, kFeatMagic, 8) != 0) {
    throw DataError(path.string() + ": not a feature record");
  }
  is.read(reinterpret_cast<char*>(&bins), 4);
  is.read(reinterpret_cast<char*>(&frames), 4);
  is.read(reinterpret_cast<char*>(r.fingerprint.data()), 16);
  if (!is) throw DataError(path.string() + ": truncated header");
  r.values = torch::empty({bins, frames}, torch::kFloat);
  const auto bytes = static_cast<std::streamsize>(static_cast<std::uint64_t>(bins) * frames * 4);
  if (!is.read(static_cast<char*>(r.values.data_ptr()), bytes)) {
    throw DataError(path.string() + ": payload shorter than " + std::to_string(bins) + "x" +
                    std::to_string(frames));
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw DataError(path.string() + ": trailing bytes after payload");
  }
  return r;
}

CacheReport cache_features(const fs::path& dataset_dir, const std::vector<ManifestEntry>& entries,
                           const spectral::SpectralConfig& cfg, const fs::path& cache_dir,
                           bool overwrite) {
  fs::create_directories(cache_dir);
  const auto fp = cfg.fingerprint();
  spectral::FeatureExtractor fx(cfg);
  CacheReport rep;
  torch::NoGradGuard g;
  for (const auto& e : entries) {
    torch::Tensor samples;
    for (auto kind : {spectral::FeatureKind::mel, spectral::FeatureKind::linear}) {
      const auto path = cache_path(cache_dir, e.id, kind);
      if (fs::exists(path) && !overwrite) {
        const auto rec = read_feature(path);
        if (rec.fingerprint != fp) {
          throw StaleCacheError(path.string() + " was built with spectral config " +
                                to_hex(rec.fingerprint) + ", active config is " + to_hex(fp) +
                                "; delete the cache directory or rerun extract with "
                                "--overwrite-cache to regenerate it");
        }
        ++rep.skipped;
        continue;
      }
      if (!samples.defined()) samples = load_clip(dataset_dir, e).samples;
      auto values = kind == spectral::FeatureKind::mel ? fx.log_mel(samples) : fx.log_linear(samples);
      write_feature(path, values, fp);
      ++rep.written;
    }
  }
  return rep;
}

torch::Tensor load_feature(const fs::path& cache_dir, const std::string& id,
                           spectral::FeatureKind kind, const spectral::SpectralConfig& cfg) {
  const auto path = cache_path(cache_dir, id, kind);
  if (!fs::exists(path)) {
    throw DataError("missing feature cache " + path.string() + "; run `lsevoc extract` first");
  }
  auto rec = read_feature(path);
  if (rec.fingerprint != cfg.fingerprint()) {
    throw StaleCacheError(path.string() + " does not match the active spectral config; rerun "
                          "extract with --overwrite-cache");
  }
  return rec.values;
}

// ---------------------------------------------------------------------------
// Toy corpus

std::vector<float> harmonic_sweep(double seconds, double f0, double f1, int harmonics,
                                  int sample_rate, double amplitude) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  std::vector<float> out(n);
  const double ratio = std::log(f1 / f0);
  const double nyq = 0.45 * sample_rate;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    // Instantaneous frequency f0 * (f1/f0)^(t/T); phase is its integral.
    const double phase = ratio == 0.0
                             ? 2.0 * M_PI * f0 * t
                             : 2.0 * M_PI * f0 * seconds / ratio * (std::exp(ratio * t / seconds) - 1.0);
    const double inst = f0 * std::exp(ratio * t / seconds);
    double v = 0.0;
    double norm = 0.0;
    for (int k = 1; k <= harmonics; ++k) {
      norm += 1.0 / k;
      if (k * inst >= nyq) continue;
      v += std::sin(k * phase) / k;
    }
    const double env = 0.6 + 0.4 * std::sin(2.0 * M_PI * 0.5 * t);
    out[i] = static_cast<float>(amplitude * env * v / norm);
  }
  return out;
}

std::vector<fs::path> write_toy_corpus(const fs::path& dir, const ToyCorpusConfig& cfg) {
  if (cfg.n_clips < 1) throw ConfigError("toy corpus needs at least one clip");
  fs::create_directories(dir);
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<fs::path> out;
  for (int i = 0; i < cfg.n_clips; ++i) {
    const double lo = 80.0 + 320.0 * uniform();
    const double hi = std::min(16000.0, lo * (10.0 + 30.0 * uniform()));
    const bool up = i % 2 == 0;
    auto w = harmonic_sweep(cfg.seconds, up ? lo : hi, up ? hi : lo, 6, cfg.sample_rate);
    char name[32];
    std::snprintf(name, sizeof(name), "sweep_%03d.wav", i);
    out.push_back(dir / name);
    wav::write(out.back(), w, cfg.sample_rate, wav::SampleFormat::pcm16);
  }
  return out;
}

}  // namespace lsevoc::data
