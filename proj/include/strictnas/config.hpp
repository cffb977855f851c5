// Copyright 2026 The strictnas Authors.
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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "strictnas/dataset.hpp"
#include "strictnas/evolution.hpp"
#include "strictnas/search_space.hpp"
#include "strictnas/supernet.hpp"

namespace strictnas {

struct AnalysisConfig {
  int samples = 200;  ///< architectures drawn for histograms and the ranking pool
  int bins = 20;
  int probe_layer = 0;
  int probe_size = 64;
  int select_k = 13;
  int standalone_repeats = 1;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<std::string> methods{"strict_fair", "spos", "ef_krepeat"};
  int krepeat_k = 6;
};

struct ExperimentConfig {
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "strictnas-out";
  int threads = 1;
  std::optional<SearchSpace> space;
  DatasetSpec dataset;
  TrainConfig train;
  SearchConfig search;
  AnalysisConfig analysis;

  /// Throws ConfigError unless the seed and the space are present.
  std::uint64_t require_seed() const;
  const SearchSpace& require_space() const;
};

/// Parses the YAML text. Unknown keys and ill-typed values raise ConfigError
/// naming the offending key.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical YAML of the resolved configuration.
std::string to_yaml(const ExperimentConfig& config);
/// Hash of the canonical YAML.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Copies the shared fields (seed, threads) into the nested blocks.
TrainConfig resolved_train(const ExperimentConfig& config);
SearchConfig resolved_search(const ExperimentConfig& config);

}  // namespace strictnas
