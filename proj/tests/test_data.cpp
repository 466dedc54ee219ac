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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>

#include "lsevoc/data.hpp"
#include "lsevoc/error.hpp"
#include "lsevoc/wav.hpp"

using namespace lsevoc;
using namespace lsevoc::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("lsevoc_test_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

std::vector<float> tone(double hz, double seconds, int rate, double amp = 0.5) {
  std::vector<float> out(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * i / rate));
  }
  return out;
}

double alias_db(const std::vector<float>& y, int rate, double hz) {
  auto t = torch::from_blob(const_cast<float*>(y.data()), {static_cast<std::int64_t>(y.size())},
                            torch::kFloat)
               .to(torch::kDouble);
  auto w = torch::hann_window(t.size(0), torch::TensorOptions().dtype(torch::kDouble));
  auto p = torch::fft::rfft(t * w).abs().pow(2);
  const double bin_hz = static_cast<double>(rate) / t.size(0);
  const auto k = static_cast<std::int64_t>(std::llround(hz / bin_hz));
  const auto peak = p.argmax().item<std::int64_t>();
  CHECK(std::abs(peak - k) <= 1);
  const auto guard = static_cast<std::int64_t>(std::ceil(20.0 / bin_hz));
  auto mask = torch::ones_like(p, torch::kBool);
  mask.narrow(0, std::max<std::int64_t>(0, k - guard), 2 * guard + 1).fill_(false);
  const double outside = p.masked_select(mask).sum().item<double>();
  return 10.0 * std::log10(outside / p.sum().item<double>());
}

}  // namespace

TEST_CASE("resampler preserves duration and tone position") {
  auto x = tone(1000.0, 1.0, 48000);
  auto y = resample(x, 48000, 44100);
  CHECK(y.size() == 44100);
  CHECK(alias_db(y, 44100, 1000.0) < -60.0);

  auto hi = tone(15000.0, 1.0, 48000);
  CHECK(alias_db(resample(hi, 48000, 44100), 44100, 15000.0) < -60.0);

  auto up = resample(tone(1000.0, 1.0, 22050), 22050, 44100);
  CHECK(up.size() == 44100);
  CHECK(alias_db(up, 44100, 1000.0) < -60.0);

  std::vector<float> dc(48000, 0.25f);
  auto ydc = resample(dc, 48000, 44100);
  for (std::size_t i = 200; i < ydc.size() - 200; i += 97) CHECK(ydc[i] == doctest::Approx(0.25).epsilon(1e-5));
  CHECK(resample(x, 44100, 44100) == x);
  CHECK_THROWS_AS(resample(x, 0, 44100), ConfigError);
}

TEST_CASE("resampler rejects content above the new Nyquist") {
  auto y = resample(tone(23000.0, 1.0, 48000), 48000, 44100);
  double e = 0.0;
  for (std::size_t i = 1000; i < y.size() - 1000; ++i) e += static_cast<double>(y[i]) * y[i];
  const double rms = std::sqrt(e / (y.size() - 2000));
  CHECK(20.0 * std::log10(rms / (0.5 / std::sqrt(2.0))) < -60.0);
}

TEST_CASE("ingest mixes, resamples and writes a manifest") {
  auto in = scratch("ingest_in");
  auto out = scratch("ingest_out");
  wav::Audio stereo;
  stereo.sample_rate = 48000;
  stereo.channels = 2;
  stereo.data = {tone(440.0, 3.0, 48000, 0.4), tone(660.0, 3.0, 48000, 0.4)};
  wav::write(in / "stereo.wav", stereo);
  fs::create_directories(in / "a");
  fs::create_directories(in / "b");
  wav::write(in / "a" / "take.wav", tone(300.0, 1.0, 44100), 44100);
  wav::write(in / "b" / "take.wav", tone(300.0, 1.5, 44100), 44100);
  {
    std::ofstream bad(in / "broken.wav");
    bad << "not a wave file";
  }
  {
    std::ofstream txt(in / "notes.txt");
    txt << "ignored";
  }

  auto res = ingest(in, out, IngestConfig{});
  CHECK(res.entries.size() == 3);
  CHECK(res.warnings.size() == 1);
  const ManifestEntry* st = nullptr;
  for (const auto& e : res.entries) {
    if (e.source_path == "stereo.wav") st = &e;
  }
  REQUIRE(st != nullptr);
  CHECK(st->sample_rate_original == 48000);
  CHECK(std::abs(st->duration_s - 3.0) <= 1.0 / 44100);
  auto a = wav::read(audio_path(out, st->id));
  CHECK(a.sample_rate == 44100);
  CHECK(a.channels == 1);
  CHECK(std::abs(static_cast<double>(a.frames()) - 132300.0) <= 1.0);

  CHECK(res.entries[0].id != res.entries[1].id);
  CHECK(entry_id("a/take.wav") != entry_id("b/take.wav"));
  CHECK(entry_id("a/take.wav").rfind("take-", 0) == 0);

  auto manifest = slurp(out / "manifest.jsonl");
  auto again = ingest(in, out, IngestConfig{});
  CHECK(slurp(out / "manifest.jsonl") == manifest);
  auto read = read_manifest(out / "manifest.jsonl");
  REQUIRE(read.size() == 3);
  CHECK(read[0].id == res.entries[0].id);
  CHECK(read[0].duration_s == res.entries[0].duration_s);
  CHECK(manifest.find("{\"id\":") == 0);

  auto empty = scratch("ingest_empty");
  CHECK_THROWS_WITH_AS(ingest(empty, out / "x"), doctest::Contains("no audio found"), DataError);
}

TEST_CASE("splits are deterministic and disjoint") {
  int test = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto id = "clip" + std::to_string(i);
    const auto s = assign_split(id, 0.2, 5);
    CHECK(s == assign_split(id, 0.2, 5));
    test += s == "test";
  }
  CHECK(test > 320);
  CHECK(test < 480);
  std::vector<ManifestEntry> es{{"a", "a.wav", 1.0, 44100, "train"}, {"b", "b.wav", 1.0, 44100, "test"}};
  CHECK(select_split(es, "train").size() == 1);
  CHECK(select_split(es, "test")[0].id == "b");
}

TEST_CASE("manifest validation") {
  auto dir = scratch("manifest");
  write_manifest(dir / "dup.jsonl", {{"a", "a.wav", 1.0, 44100, "train"}, {"a", "b.wav", 1.0, 44100, "test"}});
  CHECK_THROWS_AS(read_manifest(dir / "dup.jsonl"), DataError);
  write_manifest(dir / "zero.jsonl", {{"a", "a.wav", 0.0, 44100, "train"}});
  CHECK_THROWS_AS(read_manifest(dir / "zero.jsonl"), DataError);
  {
    std::ofstream os(dir / "junk.jsonl");
    os << "{\"id\": 3}\n";
  }
  CHECK_THROWS_AS(read_manifest(dir / "junk.jsonl"), DataError);
}

TEST_CASE("normalization statistics") {
  auto in = scratch("stats_in");
  auto out = scratch("stats_out");
  write_toy_corpus(in, {3, 1.0, 44100, 1});
  IngestConfig ic;
  ic.test_ratio = 0.0;
  auto entries = ingest(in, out, ic).entries;
  spectral::SpectralConfig cfg;
  auto stats = compute_norm_stats(out, entries, cfg);
  REQUIRE(stats.linear_mean.size() == 1);
  CHECK(std::isfinite(stats.linear_mean[0]));
  CHECK(stats.linear_std[0] > 0.1);

  cfg.norm = stats;
  spectral::FeatureExtractor fx(cfg);
  double sum = 0.0, sq = 0.0, n = 0.0;
  for (const auto& e : entries) {
    auto v = spectral::normalize(fx.log_linear(load_clip(out, e).samples),
                                 spectral::FeatureKind::linear, cfg)
                 .to(torch::kDouble);
    sum += v.sum().item<double>();
    sq += v.pow(2).sum().item<double>();
    n += static_cast<double>(v.numel());
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.05);
  CHECK(sd > 0.9);
  CHECK(sd < 1.1);

  // Three copies of one clip give the stats of that clip.
  std::vector<ManifestEntry> copies(3, entries[0]);
  for (int i = 0; i < 3; ++i) copies[static_cast<std::size_t>(i)].id = entries[0].id;
  auto one = compute_norm_stats(out, {entries[0]}, spectral::SpectralConfig{});
  auto three = compute_norm_stats(out, copies, spectral::SpectralConfig{});
  CHECK(three.linear_mean[0] == doctest::Approx(one.linear_mean[0]).epsilon(1e-9));
  CHECK(three.linear_std[0] == doctest::Approx(one.linear_std[0]).epsilon(1e-9));
  CHECK(three.mel_std[0] == doctest::Approx(one.mel_std[0]).epsilon(1e-9));

  spectral::SpectralConfig pb;
  pb.per_bin_norm = true;
  auto per_bin = compute_norm_stats(out, entries, pb);
  CHECK(per_bin.linear_mean.size() == 592);
  CHECK(per_bin.mel_std.size() == 80);
  for (double s : per_bin.linear_std) CHECK(s >= 1e-3);

  write_norm_stats(out / "stats.json", stats);
  auto back = read_norm_stats(out / "stats.json");
  CHECK(back.linear_mean == stats.linear_mean);
  CHECK(back.mel_std == stats.mel_std);

  std::vector<ManifestEntry> test_only{entries[0]};
  test_only[0].split = "test";
  CHECK_THROWS_AS(compute_norm_stats(out, test_only, cfg), DataError);
}

TEST_CASE("silent corpus is degenerate") {
  auto in = scratch("silent_in");
  auto out = scratch("silent_out");
  wav::write(in / "quiet.wav", std::vector<float>(44100, 0.0f), 44100);
  IngestConfig ic;
  ic.test_ratio = 0.0;
  auto entries = ingest(in, out, ic).entries;
  CHECK_THROWS_WITH_AS(compute_norm_stats(out, entries, spectral::SpectralConfig{}),
                       doctest::Contains("degenerate"), DataError);
}

TEST_CASE("feature cache") {
  auto in = scratch("cache_in");
  auto out = scratch("cache_out");
  write_toy_corpus(in, {2, 1.3, 44100, 2});
  auto entries = ingest(in, out).entries;
  spectral::SpectralConfig cfg;
  auto rep = cache_features(out, entries, cfg, out / "cache");
  CHECK(rep.written == 4);
  CHECK(rep.skipped == 0);

  spectral::FeatureExtractor fx(cfg);
  for (const auto& e : entries) {
    auto fresh = fx.log_mel(load_clip(out, e).samples);
    auto cached = load_feature(out / "cache", e.id, spectral::FeatureKind::mel, cfg);
    CHECK(torch::equal(fresh, cached));
    auto lin = load_feature(out / "cache", e.id, spectral::FeatureKind::linear, cfg);
    CHECK(lin.size(0) == 592);
    CHECK(lin.size(1) == static_cast<std::int64_t>(std::ceil(e.duration_s * 50 - 1e-9)));
    auto rec = read_feature(cache_path(out / "cache", e.id, spectral::FeatureKind::linear));
    CHECK(rec.fingerprint == cfg.fingerprint());
    CHECK(rec.values.sizes() == lin.sizes());
  }

  const auto p = cache_path(out / "cache", entries[0].id, spectral::FeatureKind::mel);
  const auto before = fs::last_write_time(p);
  const auto bytes = slurp(p);
  auto again = cache_features(out, entries, cfg, out / "cache");
  CHECK(again.written == 0);
  CHECK(again.skipped == 4);
  CHECK(fs::last_write_time(p) == before);
  CHECK(slurp(p) == bytes);
  CHECK(bytes.substr(0, 8) == "LSEFEAT1");
  CHECK(bytes.size() == 8 + 4 + 4 + 16 + 80 * 4 * static_cast<std::size_t>(std::ceil(entries[0].duration_s * 50 - 1e-9)));

  auto changed = cfg;
  changed.fft_size = 4096;
  changed.window_size = 4096;
  CHECK_THROWS_AS(cache_features(out, entries, changed, out / "cache"), StaleCacheError);
  CHECK_THROWS_AS(load_feature(out / "cache", entries[0].id, spectral::FeatureKind::mel, changed),
                  StaleCacheError);
  auto forced = cache_features(out, entries, changed, out / "cache", true);
  CHECK(forced.written == 4);

  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.write("LSEFEAT2", 8);
  }
  CHECK_THROWS_AS(read_feature(p), DataError);
  CHECK_THROWS_AS(load_feature(out / "cache", "missing", spectral::FeatureKind::mel, cfg), DataError);
}

TEST_CASE("toy corpus is deterministic") {
  auto a = scratch("toy_a");
  auto b = scratch("toy_b");
  auto pa = write_toy_corpus(a, {2, 0.5, 44100, 9});
  auto pb = write_toy_corpus(b, {2, 0.5, 44100, 9});
  REQUIRE(pa.size() == 2);
  CHECK(slurp(pa[1]) == slurp(pb[1]));
  auto w = harmonic_sweep(1.0, 200.0, 12000.0, 4, 44100);
  CHECK(w.size() == 44100);
  float peak = 0.0f;
  for (float v : w) peak = std::max(peak, std::abs(v));
  CHECK(peak <= 0.5f);
  CHECK(peak > 0.1f);
}
