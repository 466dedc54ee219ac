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

// Sectioned configuration shared by every command: a fixed key registry with
// defaults and provenance, JSON files, and `section.key=value` overrides.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsevoc/data.hpp"
#include "lsevoc/evalkit.hpp"
#include "lsevoc/lse_net.hpp"
#include "lsevoc/spectral.hpp"
#include "lsevoc/training.hpp"
#include "lsevoc/vocos.hpp"

namespace lsevoc::cli {

enum class ValueType { integer, real, boolean, string, int_list, real_list, string_list };

enum class Provenance {
  reference_setup,  // value of the reference experimental setup
  design_choice,    // chosen here; the reference setup leaves it open
  plumbing,         // paths, seeds and runtime knobs
};
const char* to_string(Provenance p);

struct KeySpec {
  std::string section;
  std::string key;
  ValueType type;
  nlohmann::json default_value;
  Provenance provenance;
  std::string doc;

  std::string path() const { return section + "." + key; }
};

const std::vector<KeySpec>& key_registry();
const KeySpec* find_key(const std::string& path);

// Registry listing for --help: one line per key with default and provenance.
std::string keys_help();

class GlobalConfig {
 public:
  GlobalConfig();

  // Merge a document of {section: {key: value}}; unknown sections or keys and
  // type mismatches throw ConfigError naming `origin`.
  void merge(const nlohmann::json& doc, const std::string& origin);
  void merge_file(const std::filesystem::path& path);
  // "section.key=value"; value is JSON or a bare string, lists may be written
  // comma-separated.
  void set(const std::string& assignment);
  void set(const std::string& path, const nlohmann::json& value, const std::string& origin);

  const nlohmann::json& get(const std::string& path) const;
  std::int64_t integer(const std::string& path) const;
  double real(const std::string& path) const;
  bool boolean(const std::string& path) const;
  std::string string(const std::string& path) const;

  const nlohmann::json& tree() const { return tree_; }
  nlohmann::json section(const std::string& name) const;

  spectral::SpectralConfig spectral() const;
  data::IngestConfig ingest() const;
  data::ToyCorpusConfig toy() const;
  lse::LseConfig lse() const;
  diffusion::SamplerPlan sampler(const diffusion::NoiseSchedule& schedule) const;
  vocos::Vocos2DConfig vocos2d() const;
  vocos::BaselineVocosConfig baseline() const;
  training::LseTrainConfig lse_train() const;
  training::VocoderTrainConfig vocoder_train() const;
  eval::ClassifierConfig classifier() const;
  eval::ClassifierTrainConfig classifier_train() const;
  eval::RegimeRunConfig regime_run() const;

 private:
  nlohmann::json tree_;
};

// Leaf-level differences between two config documents, "path: a -> b".
std::vector<std::string> config_diff(const nlohmann::json& expected, const nlohmann::json& actual,
                                     const std::vector<std::string>& ignore = {});

}  // namespace lsevoc::cli
