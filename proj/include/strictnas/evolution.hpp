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

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "strictnas/dataset.hpp"
#include "strictnas/rng.hpp"
#include "strictnas/search_space.hpp"

namespace strictnas {

class Supernet;

/// accuracy is maximized; mult_adds and params are minimized.
struct Objectives {
  double accuracy = 0.0;
  std::int64_t mult_adds = 0;
  std::int64_t params = 0;

  /// All-minimization view: (-accuracy, mult_adds, params).
  std::vector<double> minimized() const;
  friend bool operator==(const Objectives&, const Objectives&) = default;
};

/// Pareto dominance: no worse in every objective, strictly better in one.
bool dominates(const Objectives& a, const Objectives& b);
/// Same relation over all-minimization vectors of equal length.
bool dominates_min(std::span<const double> a, std::span<const double> b);

struct Individual {
  Architecture arch;
  Objectives obj;
  int rank = 0;  ///< 1 = first front; 0 until sorted
  double crowding = 0.0;
};

/// Fast non-dominated sort over all-minimization points. Returns fronts of
/// point indices, first front first; each front is in ascending index order.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const std::vector<double>> points);
/// Sorts `pop` by Objectives and writes each individual's 1-based rank.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop);

/// NSGA-II crowding distance within one front: per objective, boundary points
/// get +inf and interior points add (next - previous) / (max - min); an
/// objective with zero range adds nothing.
std::vector<double> crowding_distance(std::span<const std::vector<double>> front);
/// Writes crowding distances for the members `front` of `pop`.
void assign_crowding(std::vector<Individual>& pop, std::span<const std::size_t> front);

/// Binary tournament: lower rank wins, then larger crowding, then a fair coin.
std::size_t tournament_select(std::span<const Individual> pop, Rng& rng);

/// Uniform crossover: every layer copied from either parent with probability 1/2.
Architecture crossover(const Architecture& a, const Architecture& b, Rng& rng);

/// Factorized per-layer categorical over the m choices, plus a reward baseline.
class MutatorPolicy {
 public:
  MutatorPolicy() = default;
  MutatorPolicy(int layers, int choices);

  int layers() const { return static_cast<int>(logits_.cols()); }
  int choices() const { return static_cast<int>(logits_.rows()); }
  /// m x L; column l holds layer l's logits.
  Eigen::MatrixXd& logits() { return logits_; }
  const Eigen::MatrixXd& logits() const { return logits_; }
  Eigen::VectorXd probabilities(int layer) const;
  int sample(int layer, Rng& rng) const;

  double baseline = 0.0;
  bool baseline_initialized = false;

 private:
  Eigen::MatrixXd logits_;
};

struct PolicySettings {
  double learning_rate = 0.5;
  double clip = 0.2;           ///< PPO epsilon
  double baseline_decay = 0.9;  ///< EMA factor for the reward baseline
  int epochs = 1;               ///< gradient-ascent passes over one minibatch
};

/// Clipped-ratio policy gradient on the factorized categoricals. Advantages
/// are reward - baseline (the baseline is first set to the batch mean if it
/// was never initialized). Each ascent pass follows the gradient of the
/// clipped surrogate; a pass is shortened by halving until every sampled
/// action with positive advantage has ratio <= 1 + clip and every one with
/// negative advantage has ratio >= 1 - clip. The baseline then moves toward
/// the batch mean reward by exponential averaging.
void policy_update(MutatorPolicy& policy, std::span<const std::pair<Architecture, double>> batch,
                   const PolicySettings& settings = {});

/// Per-(layer, choice) mean reward of every evaluated architecture.
class RewardHistory {
 public:
  RewardHistory() = default;
  RewardHistory(int layers, int choices);
  void record(const Architecture& arch, double reward);
  /// Mean reward of architectures using (layer, choice); the global mean when unseen.
  double mean(int layer, int choice) const;

 private:
  int choices_ = 0;
  std::vector<double> sums_;
  std::vector<std::int64_t> counts_;
  double total_ = 0.0;
  std::int64_t seen_ = 0;
};

struct SearchConfig {
  int population = 64;
  int generations = 200;
  /// Fraction of offspring produced by mutation; the rest come from crossover.
  double mutation_ratio = 0.8;
  double p_rm = 0.2;   ///< random mutation
  double p_re = 0.65;  ///< reinforced mutation
  double p_pr = 0.15;  ///< prior regulator
  double p_m = 0.7;    ///< within reinforced: policy controller
  double p_km = 0.3;   ///< within reinforced: roulette wheel over historical rewards
  int select_k = 13;
  std::uint64_t seed = 0;
  int threads = 1;
  PolicySettings policy;

  /// Throws ConfigError when a probability group does not sum to one.
  void check() const;
};

enum class MutationBranch { random, policy, roulette, prior };

/// Mutates exactly one uniformly chosen layer. The branch is drawn from
/// (p_rm, p_re, p_pr), reinforced mutation further splits into (p_m, p_km):
///  - random: any other choice, uniformly
///  - policy: a draw from the layer's MutatorPolicy categorical
///  - roulette: choice weighted by its historical mean reward
///  - prior: choice weighted by 1 / (block parameter count), favouring cheap blocks
Architecture mutate_hierarchical(const Architecture& arch, const SearchSpace& space, const MutatorPolicy& policy,
                                 const RewardHistory& history, Rng& rng, const SearchConfig& config,
                                 MutationBranch* branch = nullptr);

using Evaluator = std::function<double(const Architecture&)>;

struct Evaluation {
  int generation = 0;
  Individual individual;
};

struct GenerationRecord {
  int generation = 0;             ///< 1-based
  std::int64_t evaluated = 0;     ///< cumulative evaluations
  double best_accuracy = 0.0;     ///< best in the population after selection
  std::vector<Individual> front;  ///< first front of the population after selection
};

struct SearchResult {
  std::vector<Individual> population;  ///< P_{G+1}
  std::vector<Individual> front;       ///< its first front
  std::vector<Individual> selected;    ///< K members evenly spaced by accuracy
  std::vector<Evaluation> evaluations;  ///< every evaluation, in order
  std::vector<GenerationRecord> generations;
};

/// Elitist NSGA-II loop. Generation g evaluates its N offspring (the initial
/// offspring are uniform random), merges them with the parents, keeps N by
/// rank then crowding, updates the reward history and the mutator policy,
/// and breeds N new offspring that were never evaluated before. G
/// generations therefore cost exactly G * N evaluations unless the space runs
/// out of unseen architectures. Evaluations may run on `config.threads`
/// workers; results are merged in architecture order.
SearchResult run_search(const SearchSpace& space, const Evaluator& evaluate, const SearchConfig& config,
                        const std::function<void(const GenerationRecord&)>& on_generation = {});

/// Supernet-backed evaluation on `split`.
SearchResult run_search(const Supernet& net, const Dataset& data, Split split, const SearchConfig& config,
                        const std::function<void(const GenerationRecord&)>& on_generation = {});

/// Uniformly random distinct architectures evaluated with the same budget.
std::vector<Individual> random_search(const SearchSpace& space, const Evaluator& evaluate, std::size_t budget,
                                      std::uint64_t seed, int threads = 1);

/// Volume dominated by `points` inside the box bounded by `reference`
/// (accuracy above reference.accuracy, costs below the reference costs).
double hypervolume(std::span<const Objectives> points, const Objectives& reference);

/// First front of an arbitrary set.
std::vector<Individual> pareto_front(std::vector<Individual> pop);

}  // namespace strictnas
