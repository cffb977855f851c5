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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "strictnas/config.hpp"
#include "strictnas/experiments.hpp"

namespace strictnas {

/// Environment variable naming the root for relative output directories.
inline constexpr const char* kOutputRootEnv = "STRICTNAS_OUT";

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::filesystem::path> out;
};

/// Loads the config (if any) and applies the command-line overrides.
ExperimentConfig resolve_config(const CommonOptions& common);
/// --out, else the config's output_dir; relative paths resolve against
/// $STRICTNAS_OUT when it is set.
std::filesystem::path resolve_output_dir(const CommonOptions& common, const ExperimentConfig& config);

/// Shortest text of the value rounded to 9 significant digits ("C" locale).
/// Ranking experiment as the `rank` command runs it.
RankingExperimentConfig ranking_experiment_config(const ExperimentConfig& config);

std::string format_number(double value);
/// The value rounded to 9 significant digits.
double round9(double value);

struct TrainSupernetOptions {
  std::optional<std::string> mode;
  std::optional<int> epochs;
  std::optional<int> k;
  std::optional<bool> scale_lr_by_k;
  std::string checkpoint = "supernet";
};

struct TrainStandaloneOptions {
  std::string arch;
  std::string checkpoint = "standalone";
};

struct SearchOptions {
  std::filesystem::path checkpoint;
  std::optional<int> population;
  std::optional<int> generations;
};

struct RankOptions {
  std::optional<std::filesystem::path> pairs;
  std::string method = "pairs";
};

struct SimilarityOptions {
  std::filesystem::path checkpoint;
  std::optional<int> layer;
  bool standalone = false;
};

struct LemmaCurveOptions {
  std::vector<int> m{2};
  std::int64_t n_max = 100;
};

struct FairnessSimOptions {
  std::string mode = "strict";
  int k = 6;
  std::int64_t backprops = 100000;
  int runs = 10;
  std::optional<int> layers;
  std::optional<int> choices;
};

struct ProfileOptions {
  std::vector<std::string> archs;
  int random = 0;
};

struct ExportDatasetOptions {
  std::string file = "dataset.bin";
};

// Each command writes its artifacts plus manifest-<command>.json into the
// output directory, prints a short summary to `out` and returns the process
// exit status. Errors propagate as exceptions.
int cmd_train_supernet(const CommonOptions& common, const TrainSupernetOptions& options, std::ostream& out);
int cmd_train_standalone(const CommonOptions& common, const TrainStandaloneOptions& options, std::ostream& out);
int cmd_search(const CommonOptions& common, const SearchOptions& options, std::ostream& out);
int cmd_rank(const CommonOptions& common, const RankOptions& options, std::ostream& out);
int cmd_similarity(const CommonOptions& common, const SimilarityOptions& options, std::ostream& out);
int cmd_lemma_curve(const CommonOptions& common, const LemmaCurveOptions& options, std::ostream& out);
int cmd_fairness_sim(const CommonOptions& common, const FairnessSimOptions& options, std::ostream& out);
int cmd_profile(const CommonOptions& common, const ProfileOptions& options, std::ostream& out);
int cmd_export_dataset(const CommonOptions& common, const ExportDatasetOptions& options, std::ostream& out);

}  // namespace strictnas
