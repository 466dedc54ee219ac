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

// Corpus preparation: resampling, ingestion into a JSONL manifest,
// normalization statistics and the on-disk feature cache.

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsevoc/hash.hpp"
#include "lsevoc/spectral.hpp"

namespace lsevoc::data {

// Kaiser-windowed sinc, evaluated as a polyphase bank for rational ratios.
struct ResamplerConfig {
  int zero_crossings = 32;  // per side of the sinc kernel
  double kaiser_beta = 9.0;
  double rolloff = 0.945;   // cutoff as a fraction of the lower Nyquist
};

// Output length is round(n * to / from).
std::vector<float> resample(const std::vector<float>& x, int from_rate, int to_rate,
                            const ResamplerConfig& cfg = {});

struct ManifestEntry {
  std::string id;
  std::string source_path;  // relative to the ingested directory
  double duration_s = 0.0;
  int sample_rate_original = 0;
  std::string split;  // "train" or "test"
};

struct IngestConfig {
  int sample_rate = 44100;
  double test_ratio = 0.1;
  std::uint64_t split_seed = 0;
  ResamplerConfig resampler{};
};

struct IngestResult {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> warnings;  // one per skipped file
};

// Reads every *.wav below `in_dir` (sorted by relative path), mixes to mono,
// resamples, writes <out_dir>/audio/<id>.wav (float32) and
// <out_dir>/manifest.jsonl. Throws DataError when nothing could be read.
IngestResult ingest(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                    const IngestConfig& cfg = {});

// "<stem>-<8 hex of the path hash>", stem reduced to [A-Za-z0-9_-].
std::string entry_id(const std::string& relative_path);
// Seeded hash of the id against the ratio.
std::string assign_split(const std::string& id, double test_ratio, std::uint64_t seed);

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
// Validates unique ids, positive durations and known splits.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> select_split(const std::vector<ManifestEntry>& entries,
                                        const std::string& split);
Fingerprint manifest_fingerprint(const std::vector<ManifestEntry>& entries);

std::filesystem::path audio_path(const std::filesystem::path& dataset_dir, const std::string& id);
spectral::WaveformClip load_clip(const std::filesystem::path& dataset_dir,
                                 const ManifestEntry& entry);

// Single pass over floor-clipped log features of the train split (double
// accumulation). Global scalars, or per-bin vectors when cfg.per_bin_norm.
// Throws DataError for an empty split or a std below 1e-3.
spectral::NormStats compute_norm_stats(const std::filesystem::path& dataset_dir,
                                       const std::vector<ManifestEntry>& entries,
                                       const spectral::SpectralConfig& cfg);
void write_norm_stats(const std::filesystem::path& path, const spectral::NormStats& stats);
spectral::NormStats read_norm_stats(const std::filesystem::path& path);
nlohmann::json norm_stats_to_json(const spectral::NormStats& stats);
spectral::NormStats norm_stats_from_json(const nlohmann::json& j);

// Feature cache record: "LSEFEAT1", u32 bins, u32 frames, 16-byte fingerprint,
// float32 row-major payload, all little endian.
struct FeatureRecord {
  torch::Tensor values;  // [bins, frames] float32, un-normalized log features
  Fingerprint fingerprint{};
};

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, const std::string& id,
                                 spectral::FeatureKind kind);
void write_feature(const std::filesystem::path& path, const torch::Tensor& values,
                   const Fingerprint& fp);
FeatureRecord read_feature(const std::filesystem::path& path);

struct CacheReport {
  int written = 0;
  int skipped = 0;
};

// One record per (clip, kind). Existing records with the active fingerprint
// are left untouched; a different fingerprint raises StaleCacheError unless
// `overwrite` is set.
CacheReport cache_features(const std::filesystem::path& dataset_dir,
                           const std::vector<ManifestEntry>& entries,
                           const spectral::SpectralConfig& cfg,
                           const std::filesystem::path& cache_dir, bool overwrite = false);
// Loads a record and checks its fingerprint against cfg.
torch::Tensor load_feature(const std::filesystem::path& cache_dir, const std::string& id,
                           spectral::FeatureKind kind, const spectral::SpectralConfig& cfg);

// Synthetic corpus used by the toy experiments: harmonic sine sweeps with a
// decaying envelope, written as 16-bit WAVs.
struct ToyCorpusConfig {
  int n_clips = 8;
  double seconds = 8.0;
  int sample_rate = 44100;
  std::uint64_t seed = 0;
};
// Exponential sweep f0 -> f1 with `harmonics` partials at 1/k amplitude.
std::vector<float> harmonic_sweep(double seconds, double f0, double f1, int harmonics,
                                  int sample_rate, double amplitude = 0.5);
std::vector<std::filesystem::path> write_toy_corpus(const std::filesystem::path& dir,
                                                    const ToyCorpusConfig& cfg);

}  // namespace lsevoc::data
