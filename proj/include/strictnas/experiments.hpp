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
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "strictnas/analysis.hpp"
#include "strictnas/dataset.hpp"
#include "strictnas/evolution.hpp"
#include "strictnas/search_space.hpp"
#include "strictnas/supernet.hpp"

namespace strictnas {

struct RankingMethod {
  std::string name;
  TrainConfig train;
};

/// Paired comparison of supernet training modes. For every seed, all methods
/// share the dataset, the initial weights, the batch order and the sampled
/// architectures; only the training mode differs. Each method picks its own
/// evenly spaced architectures from its one-shot accuracies; an architecture
/// picked by several methods is trained stand-alone once.
struct RankingExperimentConfig {
  explicit RankingExperimentConfig(SearchSpace s) : space(std::move(s)) {}

  SearchSpace space;
  DatasetSpec dataset;
  std::vector<RankingMethod> methods;
  /// Hyperparameters of the stand-alone runs (mode is forced to a fixed path).
  TrainConfig standalone;
  int samples = 200;   ///< architectures evaluated with inherited weights
  int select_k = 13;   ///< architectures trained stand-alone
  /// Stand-alone runs per selected architecture (differently seeded); the
  /// ground truth is their mean test accuracy.
  int standalone_repeats = 1;
  int bins = 20;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int threads = 1;
};

/// Strict fair, single-path uniform and k-repeat (k = 6, full rate) methods
/// over the same epochs and batches.
std::vector<RankingMethod> default_ranking_methods(const TrainConfig& base);

struct MethodOutcome {
  std::string name;
  double tau = 0.0;
  std::vector<std::size_t> selected;  ///< indices into the sampled list
  RankingPair pairs;            ///< the selected architectures
  AccuracyGap gap;              ///< over the selected architectures
  double oneshot_range = 0.0;   ///< max - min one-shot accuracy over all samples
  Histogram histogram;          ///< of all sampled one-shot accuracies
  std::vector<double> oneshot;  ///< per sampled architecture
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<Architecture> sampled;
  /// Mean stand-alone test accuracy per sampled architecture; NaN for those
  /// no method selected.
  std::vector<double> standalone;
  std::vector<MethodOutcome> methods;
  std::vector<Supernet> supernets;    ///< one per method, in method order
  Dataset data;
};

struct RankingSummary {
  std::string name;
  std::vector<double> taus;
  std::vector<double> oneshot_ranges;
  double median_tau = 0.0;
  double median_oneshot_range = 0.0;
};

struct RankingExperimentResult {
  std::vector<SeedOutcome> seeds;
  std::vector<RankingSummary> summary;  ///< one per method

  const RankingSummary& method(const std::string& name) const;
};

double median(std::vector<double> values);

using ProgressFn = std::function<void(const std::string&)>;

RankingExperimentResult run_ranking_experiment(const RankingExperimentConfig& config,
                                               const ProgressFn& progress = {});

/// Search front versus an equal-budget random search, both evaluated by the
/// same supernet on the validation split.
struct SearchComparison {
  SearchResult search;
  std::vector<Individual> random_front;
  Objectives reference;
  double search_hypervolume = 0.0;
  double random_hypervolume = 0.0;
  bool front_non_dominating = false;
};

/// Reference point: accuracy 0 and 1.1 times the largest cost seen by either run.
SearchComparison compare_search_with_random(const Supernet& net, const Dataset& data, const SearchConfig& config);

}  // namespace strictnas
