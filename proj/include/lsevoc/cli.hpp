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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsevoc/config.hpp"
#include "lsevoc/data.hpp"
#include "lsevoc/evalkit.hpp"
#include "lsevoc/spectral.hpp"

namespace lsevoc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kDivergence = 3 };

// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

struct ExtractSummary {
  int clips = 0;
  int train = 0;
  int test = 0;
  data::CacheReport cache;
  std::vector<std::string> warnings;
};
ExtractSummary extract(const GlobalConfig& cfg, const std::filesystem::path& in_dir,
                       const std::filesystem::path& dataset_dir, bool overwrite_cache = false);

// Stage names: lse, vocos2d, vocos-baseline.
struct TrainRequest {
  std::string stage;
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> runs;  // default paths.runs
  std::optional<std::int64_t> steps;
  bool resume = false;
  bool force = false;
};
// Returns the run directory, <runs>/<stage>.
std::filesystem::path train(const GlobalConfig& cfg, const TrainRequest& req);

struct SynthRequest {
  std::string input;                     // WAV path, or manifest id with source "cache"
  std::string source = "wav";            // wav | cache
  std::filesystem::path dataset;         // required for source "cache"
  std::filesystem::path out;
  std::optional<std::filesystem::path> runs;
  bool use_lse = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<std::filesystem::path> dump_linear;
};
spectral::WaveformClip synth(const GlobalConfig& cfg, const SynthRequest& req);

eval::ScoreTable evaluate(const GlobalConfig& cfg, const std::filesystem::path& methods_root,
                          const std::filesystem::path& out_dir);
int render(const GlobalConfig& cfg, const std::filesystem::path& wav_dir,
           const std::filesystem::path& png_dir);
std::vector<std::filesystem::path> toy_corpus(const GlobalConfig& cfg, const std::filesystem::path& out);

// Full command line without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lsevoc::cli
