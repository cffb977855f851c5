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

#include "strictnas/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "strictnas/analysis.hpp"
#include "strictnas/error.hpp"
#include "strictnas/fairness.hpp"
#include "strictnas/parallel.hpp"
#include "strictnas/supernet.hpp"

namespace strictnas {

std::vector<double> Objectives::minimized() const {
  return {-accuracy, static_cast<double>(mult_adds), static_cast<double>(params)};
}

bool dominates(const Objectives& a, const Objectives& b) {
  const bool no_worse = a.accuracy >= b.accuracy && a.mult_adds <= b.mult_adds && a.params <= b.params;
  const bool better = a.accuracy > b.accuracy || a.mult_adds < b.mult_adds || a.params < b.params;
  return no_worse && better;
}

bool dominates_min(std::span<const double> a, std::span<const double> b) {
  bool better = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    if (a[k] < b[k]) better = true;
  }
  return better;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const std::vector<double>> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> dominators(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates_min(points[p], points[q])) {
        dominated[p].push_back(q);
      } else if (dominates_min(points[q], points[p])) {
        ++dominators[p];
      }
    }
    if (dominators[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (const auto p : current) {
      for (const auto q : dominated[p]) {
        if (--dominators[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

namespace {

std::vector<std::vector<double>> minimized_points(std::span<const Individual> pop) {
  std::vector<std::vector<double>> points;
  points.reserve(pop.size());
  for (const auto& ind : pop) points.push_back(ind.obj.minimized());
  return points;
}

}  // namespace

std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop) {
  const auto points = minimized_points(pop);
  auto fronts = non_dominated_sort(std::span<const std::vector<double>>(points));
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    for (const auto i : fronts[f]) pop[i].rank = static_cast<int>(f) + 1;
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const std::vector<double>> front) {
  const std::size_t n = front.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }
  const std::size_t objectives = front.front().size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < objectives; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return front[a][k] < front[b][k]; });
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    const double range = front[order.back()][k] - front[order.front()][k];
    if (!(range > 0.0)) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      dist[order[i]] += (front[order[i + 1]][k] - front[order[i - 1]][k]) / range;
    }
  }
  return dist;
}

void assign_crowding(std::vector<Individual>& pop, std::span<const std::size_t> front) {
  std::vector<std::vector<double>> points;
  points.reserve(front.size());
  for (const auto i : front) points.push_back(pop[i].obj.minimized());
  const auto dist = crowding_distance(points);
  for (std::size_t j = 0; j < front.size(); ++j) pop[front[j]].crowding = dist[j];
}

std::size_t tournament_select(std::span<const Individual> pop, Rng& rng) {
  if (pop.empty()) throw ConfigError("tournament selection on an empty population");
  if (pop.size() == 1) return 0;
  const auto a = static_cast<std::size_t>(rng.below(pop.size()));
  auto b = static_cast<std::size_t>(rng.below(pop.size() - 1));
  if (b >= a) ++b;
  if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank ? a : b;
  if (pop[a].crowding != pop[b].crowding) return pop[a].crowding > pop[b].crowding ? a : b;
  return rng.coin() ? a : b;
}

Architecture crossover(const Architecture& a, const Architecture& b, Rng& rng) {
  if (a.size() != b.size()) throw ConfigError("crossover: parents have different lengths");
  Architecture child = a;
  for (std::size_t l = 0; l < child.size(); ++l) {
    if (rng.coin()) child[l] = b[l];
  }
  return child;
}

MutatorPolicy::MutatorPolicy(int layers, int choices) : logits_(Eigen::MatrixXd::Zero(choices, layers)) {}

Eigen::VectorXd MutatorPolicy::probabilities(int layer) const {
  const Eigen::VectorXd z = logits_.col(layer);
  Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp();
  return p / p.sum();
}

int MutatorPolicy::sample(int layer, Rng& rng) const {
  const Eigen::VectorXd p = probabilities(layer);
  return static_cast<int>(rng.categorical(std::span<const double>(p.data(), static_cast<std::size_t>(p.size()))));
}

void policy_update(MutatorPolicy& policy, std::span<const std::pair<Architecture, double>> batch,
                   const PolicySettings& settings) {
  if (batch.empty()) return;
  double mean_reward = 0.0;
  for (const auto& [arch, reward] : batch) {
    if (!std::isfinite(reward)) throw ConfigError("policy update: non-finite reward");
    if (static_cast<int>(arch.size()) != policy.layers()) throw ConfigError("policy update: architecture length mismatch");
    mean_reward += reward;
  }
  mean_reward /= static_cast<double>(batch.size());
  if (!policy.baseline_initialized) {
    policy.baseline = mean_reward;
    policy.baseline_initialized = true;
  }
  const int layers = policy.layers();
  const int m = policy.choices();
  std::vector<double> advantage;
  advantage.reserve(batch.size());
  for (const auto& entry : batch) advantage.push_back(entry.second - policy.baseline);

  Eigen::MatrixXd old_probs(m, layers);
  for (int l = 0; l < layers; ++l) old_probs.col(l) = policy.probabilities(l);
  auto probs_of = [&](const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p(m, layers);
    for (int l = 0; l < layers; ++l) {
      Eigen::VectorXd e = (logits.col(l).array() - logits.col(l).maxCoeff()).exp();
      p.col(l) = e / e.sum();
    }
    return p;
  };
  auto within_clip = [&](const Eigen::MatrixXd& p) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (advantage[i] == 0.0) continue;
      for (int l = 0; l < layers; ++l) {
        const int a = batch[i].first[l];
        const double ratio = p(a, l) / old_probs(a, l);
        if (advantage[i] > 0.0 && ratio > 1.0 + settings.clip) return false;
        if (advantage[i] < 0.0 && ratio < 1.0 - settings.clip) return false;
      }
    }
    return true;
  };

  Eigen::MatrixXd logits = policy.logits();
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    const Eigen::MatrixXd p = probs_of(logits);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(m, layers);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double adv = advantage[i];
      if (adv == 0.0) continue;
      for (int l = 0; l < layers; ++l) {
        const int a = batch[i].first[l];
        const double ratio = p(a, l) / old_probs(a, l);
        // The clipped branch of min(r A, clip(r) A) is flat.
        if ((adv > 0.0 && ratio >= 1.0 + settings.clip) || (adv < 0.0 && ratio <= 1.0 - settings.clip)) continue;
        Eigen::VectorXd g = -p.col(l);
        g(a) += 1.0;
        grad.col(l) += adv * ratio * g;
      }
    }
    grad /= static_cast<double>(batch.size());
    if (grad.squaredNorm() == 0.0) break;
    double step = settings.learning_rate;
    bool accepted = false;
    for (int halvings = 0; halvings < 40; ++halvings, step *= 0.5) {
      const Eigen::MatrixXd trial = logits + step * grad;
      if (within_clip(probs_of(trial))) {
        logits = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  policy.logits() = logits;
  policy.baseline = settings.baseline_decay * policy.baseline + (1.0 - settings.baseline_decay) * mean_reward;
}

RewardHistory::RewardHistory(int layers, int choices)
    : choices_(choices),
      sums_(static_cast<std::size_t>(layers * choices), 0.0),
      counts_(static_cast<std::size_t>(layers * choices), 0) {}

void RewardHistory::record(const Architecture& arch, double reward) {
  for (std::size_t l = 0; l < arch.size(); ++l) {
    const auto i = l * static_cast<std::size_t>(choices_) + static_cast<std::size_t>(arch[l]);
    sums_[i] += reward;
    ++counts_[i];
  }
  total_ += reward;
  ++seen_;
}

double RewardHistory::mean(int layer, int choice) const {
  const auto i = static_cast<std::size_t>(layer * choices_ + choice);
  if (counts_[i] > 0) return sums_[i] / static_cast<double>(counts_[i]);
  return seen_ > 0 ? total_ / static_cast<double>(seen_) : 1.0;
}

void SearchConfig::check() const {
  constexpr double tol = 1e-9;
  if (population < 2) throw ConfigError("search.population must be >= 2");
  if (generations < 1) throw ConfigError("search.generations must be >= 1");
  if (mutation_ratio < 0.0 || mutation_ratio > 1.0) throw ConfigError("search.mutation_ratio must lie in [0, 1]");
  for (const double p : {p_rm, p_re, p_pr, p_m, p_km}) {
    if (p < 0.0 || p > 1.0) throw ConfigError("search: mutation probabilities must lie in [0, 1]");
  }
  if (std::abs(p_rm + p_re + p_pr - 1.0) > tol) throw ConfigError("search: p_rm + p_re + p_pr must equal 1");
  if (std::abs(p_m + p_km - 1.0) > tol) throw ConfigError("search: p_m + p_km must equal 1");
  if (select_k < 1) throw ConfigError("search.select_k must be >= 1");
}

Architecture mutate_hierarchical(const Architecture& arch, const SearchSpace& space, const MutatorPolicy& policy,
                                 const RewardHistory& history, Rng& rng, const SearchConfig& config,
                                 MutationBranch* branch) {
  config.check();
  require_valid(space, arch);
  Architecture child = arch;
  const int m = space.choices_per_layer();
  if (space.num_layers() == 0) return child;
  const double branch_weights[] = {config.p_rm, config.p_re, config.p_pr};
  const auto top = rng.categorical(branch_weights);
  MutationBranch chosen = MutationBranch::random;
  if (top == 1) {
    chosen = rng.uniform() < config.p_m ? MutationBranch::policy : MutationBranch::roulette;
  } else if (top == 2) {
    chosen = MutationBranch::prior;
  }
  if (branch) *branch = chosen;
  const int layer = static_cast<int>(rng.below(static_cast<std::uint64_t>(space.num_layers())));
  std::vector<double> weights(static_cast<std::size_t>(m));
  switch (chosen) {
    case MutationBranch::random:
      if (m > 1) {
        const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(m - 1)));
        child[layer] = c >= arch[layer] ? c + 1 : c;
      }
      break;
    case MutationBranch::policy:
      child[layer] = policy.sample(layer, rng);
      break;
    case MutationBranch::roulette:
      for (int j = 0; j < m; ++j) weights[j] = std::max(history.mean(layer, j), 1e-12);
      child[layer] = static_cast<int>(rng.categorical(weights));
      break;
    case MutationBranch::prior:
      for (int j = 0; j < m; ++j) weights[j] = 1.0 / static_cast<double>(block_params(space, layer, j));
      child[layer] = static_cast<int>(rng.categorical(weights));
      break;
  }
  return child;
}

namespace {

std::vector<Individual> evaluate_all(const SearchSpace& space, const Evaluator& evaluate,
                                     std::vector<Architecture> archs, int threads) {
  std::sort(archs.begin(), archs.end());
  std::vector<double> acc(archs.size());
  parallel_for(archs.size(), threads, [&](std::size_t i) { acc[i] = evaluate(archs[i]); });
  std::vector<Individual> out;
  out.reserve(archs.size());
  for (std::size_t i = 0; i < archs.size(); ++i) {
    const auto cost = profile(space, archs[i]);
    if (!std::isfinite(acc[i])) throw ConfigError("evaluator returned a non-finite accuracy for " + archs[i].str());
    out.push_back({archs[i], Objectives{acc[i], cost.mult_adds, cost.params}, 0, 0.0});
  }
  return out;
}

/// Number of architectures in the space, saturated to size_t.
std::size_t space_size(const SearchSpace& space) {
  const mpz_class count = count_architectures(space);
  if (count.fits_ulong_p()) return static_cast<std::size_t>(count.get_ui());
  return std::numeric_limits<std::size_t>::max();
}

std::vector<Architecture> unique_random(const SearchSpace& space, std::size_t n, std::set<Architecture>& archive,
                                        Rng& rng) {
  const std::size_t capacity = space_size(space);
  std::vector<Architecture> out;
  while (out.size() < n && archive.size() < capacity) {
    auto arch = sample_uniform(space, rng);
    if (archive.insert(arch).second) out.push_back(std::move(arch));
  }
  return out;
}

}  // namespace

SearchResult run_search(const SearchSpace& space, const Evaluator& evaluate, const SearchConfig& config,
                        const std::function<void(const GenerationRecord&)>& on_generation) {
  config.check();
  auto rng = Rng::derive(config.seed, "search");
  const auto n = static_cast<std::size_t>(config.population);
  const std::size_t capacity = space_size(space);
  MutatorPolicy policy(space.num_layers(), space.choices_per_layer());
  RewardHistory history(space.num_layers(), space.choices_per_layer());
  std::set<Architecture> archive;
  SearchResult result;
  std::vector<Individual> parents;
  std::vector<Architecture> offspring = unique_random(space, n, archive, rng);
  std::int64_t evaluated = 0;

  for (int g = 1; g <= config.generations; ++g) {
    auto children = evaluate_all(space, evaluate, std::move(offspring), config.threads);
    evaluated += static_cast<std::int64_t>(children.size());
    std::vector<std::pair<Architecture, double>> rewards;
    for (const auto& child : children) {
      result.evaluations.push_back({g, child});
      history.record(child.arch, child.obj.accuracy);
      rewards.emplace_back(child.arch, std::clamp(child.obj.accuracy, 0.0, 1.0));
    }
    policy_update(policy, rewards, config.policy);

    std::vector<Individual> merged = std::move(parents);
    merged.insert(merged.end(), children.begin(), children.end());
    const auto fronts = non_dominated_sort(merged);
    for (const auto& front : fronts) assign_crowding(merged, front);
    parents.clear();
    for (const auto& front : fronts) {
      if (parents.size() >= n) break;
      std::vector<std::size_t> members = front;
      if (parents.size() + members.size() > n) {
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
          if (merged[a].crowding != merged[b].crowding) return merged[a].crowding > merged[b].crowding;
          return merged[a].arch < merged[b].arch;
        });
        members.resize(n - parents.size());
      }
      for (const auto i : members) parents.push_back(merged[i]);
    }

    GenerationRecord record;
    record.generation = g;
    record.evaluated = evaluated;
    for (const auto& ind : parents) {
      record.best_accuracy = std::max(record.best_accuracy, ind.obj.accuracy);
      if (ind.rank == 1) record.front.push_back(ind);
    }
    result.generations.push_back(record);
    if (on_generation) on_generation(record);
    if (g == config.generations) break;

    offspring.clear();
    std::set<Architecture> fresh;
    while (offspring.size() < n && archive.size() < capacity) {
      Architecture child;
      bool found = false;
      for (int attempt = 0; attempt < 100 && !found; ++attempt) {
        if (rng.uniform() < config.mutation_ratio) {
          const auto& parent = parents[tournament_select(parents, rng)].arch;
          child = mutate_hierarchical(parent, space, policy, history, rng, config);
        } else {
          const auto& a = parents[tournament_select(parents, rng)].arch;
          const auto& b = parents[tournament_select(parents, rng)].arch;
          child = crossover(a, b, rng);
        }
        found = !archive.contains(child);
      }
      if (!found) {
        auto fallback = unique_random(space, 1, archive, rng);
        if (fallback.empty()) break;
        offspring.push_back(std::move(fallback.front()));
        continue;
      }
      archive.insert(child);
      offspring.push_back(std::move(child));
    }
    if (offspring.empty()) break;
  }

  result.population = parents;
  for (const auto& ind : parents) {
    if (ind.rank == 1) result.front.push_back(ind);
  }
  std::vector<double> acc;
  for (const auto& ind : parents) acc.push_back(ind.obj.accuracy);
  for (const auto i : select_evenly_spaced(acc, static_cast<std::size_t>(config.select_k))) {
    result.selected.push_back(parents[i]);
  }
  return result;
}

SearchResult run_search(const Supernet& net, const Dataset& data, Split split, const SearchConfig& config,
                        const std::function<void(const GenerationRecord&)>& on_generation) {
  const Batch batch = split_batch(data, split);
  const Evaluator evaluate = [&](const Architecture& arch) { return evaluate_path(net.params(), arch, batch); };
  return run_search(net.space(), evaluate, config, on_generation);
}

std::vector<Individual> random_search(const SearchSpace& space, const Evaluator& evaluate, std::size_t budget,
                                      std::uint64_t seed, int threads) {
  auto rng = Rng::derive(seed, "random-search");
  std::set<Architecture> archive;
  return evaluate_all(space, evaluate, unique_random(space, budget, archive, rng), threads);
}

double hypervolume(std::span<const Objectives> points, const Objectives& reference) {
  struct P {
    double acc;
    double x;
    double y;
  };
  std::vector<P> pts;
  for (const auto& p : points) {
    if (p.accuracy > reference.accuracy && p.mult_adds < reference.mult_adds && p.params < reference.params) {
      pts.push_back({p.accuracy, static_cast<double>(p.mult_adds), static_cast<double>(p.params)});
    }
  }
  if (pts.empty()) return 0.0;
  const double rx = static_cast<double>(reference.mult_adds);
  const double ry = static_cast<double>(reference.params);
  // 2-D dominated area (minimize x, y) of a point set against (rx, ry).
  auto area = [&](std::vector<P> set) {
    std::sort(set.begin(), set.end(), [](const P& a, const P& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    double total = 0.0;
    double best_y = ry;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i].y >= best_y) continue;
      // Next staircase x: the first later point with a lower y, else the reference.
      double next_x = rx;
      for (std::size_t j = i + 1; j < set.size(); ++j) {
        if (set[j].y < set[i].y) {
          next_x = set[j].x;
          break;
        }
      }
      total += (next_x - set[i].x) * (ry - set[i].y);
      best_y = set[i].y;
    }
    return total;
  };
  std::sort(pts.begin(), pts.end(), [](const P& a, const P& b) { return a.acc > b.acc; });
  double volume = 0.0;
  std::size_t i = 0;
  while (i < pts.size()) {
    const double level = pts[i].acc;
    while (i < pts.size() && pts[i].acc == level) ++i;
    const double lower = i < pts.size() ? pts[i].acc : reference.accuracy;
    volume += area(std::vector<P>(pts.begin(), pts.begin() + static_cast<long>(i))) * (level - lower);
  }
  return volume;
}

std::vector<Individual> pareto_front(std::vector<Individual> pop) {
  const auto fronts = non_dominated_sort(pop);
  std::vector<Individual> out;
  if (fronts.empty()) return out;
  for (const auto i : fronts.front()) out.push_back(pop[i]);
  return out;
}

}  // namespace strictnas
