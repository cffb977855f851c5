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

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "strictnas/dataset.hpp"
#include "strictnas/engine.hpp"
#include "strictnas/rng.hpp"
#include "strictnas/search_space.hpp"

namespace strictnas {

class Supernet;

struct RankedArch {
  Architecture arch;
  double oneshot = 0.0;
  double standalone = 0.0;
};

/// One-shot (supernet) versus stand-alone accuracies of the same architectures.
struct RankingPair {
  std::vector<RankedArch> items;
};

/// Kendall tau-a: (concordant - discordant) / (n (n - 1) / 2). A pair tied in
/// either ranking counts as neither. Throws std::invalid_argument for n < 2.
double kendall_tau(std::span<const double> x, std::span<const double> y);
double kendall_tau(const RankingPair& pair);

struct AccuracyGap {
  double oneshot_range = 0.0;     ///< max - min of one-shot accuracies
  double standalone_range = 0.0;  ///< max - min of stand-alone accuracies
  double gap = 0.0;               ///< |oneshot_range - standalone_range|
};

AccuracyGap accuracy_gap(std::span<const double> oneshot, std::span<const double> standalone);

struct Histogram {
  std::vector<double> edges;  ///< bins + 1 edges over [min, max]
  std::vector<int> counts;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  ///< population standard deviation
};

Histogram make_histogram(std::span<const double> values, int bins);

struct OneShotSample {
  std::vector<Architecture> archs;
  std::vector<double> accuracies;
  Histogram histogram;
};

/// Evaluates `n_samples` uniformly drawn architectures with inherited weights.
OneShotSample oneshot_histogram(const Supernet& net, const Dataset& data, Split split, int n_samples, int bins,
                                Rng& rng);

/// dot(u, v) / (|u| |v|). Throws std::invalid_argument if either vector is zero.
template <typename DU, typename DV>
double cosine_similarity(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v) {
  const double nu = u.template cast<double>().norm();
  const double nv = v.template cast<double>().norm();
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine similarity of a zero vector is undefined");
  return u.template cast<double>().dot(v.template cast<double>()) / (nu * nv);
}

/// Cosine similarities between the outputs of m blocks at one layer.
struct SimilarityReport {
  int layer = 0;
  /// One m x m matrix per output coordinate, over per-example activations.
  std::vector<Eigen::MatrixXd> per_channel;
  Eigen::MatrixXd averaged;

  double mean_off_diagonal() const;
};

/// Output of block `layer` on the path `arch` for a d x B batch.
Mat<float> block_output(const ParamSet<float>& params, const Architecture& arch, int layer, const Mat<float>& batch);

/// Feeds the probe through the shared stem and the choices of `prefix` for
/// earlier layers (all zeros when empty), then through each of the layer's m
/// blocks. A channel whose activation vector is zero for one block gives 0
/// similarity with the other blocks; diagonals are exactly 1.
SimilarityReport cross_block_similarity(const Supernet& net, int layer, const Mat<float>& probe,
                                        const Architecture& prefix = {});

/// Same report across separately trained models: model j contributes the
/// output of block `layer` on its own path `paths[j]`.
SimilarityReport cross_model_similarity(std::span<const ParamSet<float>* const> models,
                                        std::span<const Architecture> paths, int layer, const Mat<float>& probe);

/// Positions round(i (n - 1) / (k - 1)), i = 0..k-1, in a sorted list of n
/// (deduplicated; all n when k >= n).
std::vector<std::size_t> evenly_spaced_positions(std::size_t n, std::size_t k);

/// Indices of `values` at evenly spaced positions of their ascending order
/// (ties broken by index).
std::vector<std::size_t> select_evenly_spaced(std::span<const double> values, std::size_t k);

}  // namespace strictnas
