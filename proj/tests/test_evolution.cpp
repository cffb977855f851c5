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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "strictnas/evolution.hpp"
#include "test_util.hpp"

namespace strictnas {
namespace {

using testing::make_space;

std::vector<std::vector<double>> random_points(std::size_t n, int dims, int levels, Rng& rng) {
  std::vector<std::vector<double>> pts(n);
  for (auto& p : pts)
    for (int k = 0; k < dims; ++k) p.push_back(static_cast<double>(rng.below(static_cast<std::uint64_t>(levels))));
  return pts;
}

// Peel non-dominated layers one at a time.
std::vector<int> peel_ranks(const std::vector<std::vector<double>>& pts) {
  std::vector<int> rank(pts.size(), 0);
  int current = 0;
  std::size_t assigned = 0;
  while (assigned < pts.size()) {
    ++current;
    std::vector<std::size_t> layer;
    for (std::size_t p = 0; p < pts.size(); ++p) {
      if (rank[p]) continue;
      bool dominated = false;
      for (std::size_t q = 0; q < pts.size() && !dominated; ++q)
        dominated = q != p && !rank[q] && dominates_min(pts[q], pts[p]);
      if (!dominated) layer.push_back(p);
    }
    for (auto p : layer) rank[p] = current;
    assigned += layer.size();
  }
  return rank;
}

TEST(Dominance, OrderProperties) {
  Rng rng(1);
  const auto pts = random_points(40, 3, 4, rng);
  for (const auto& a : pts) {
    EXPECT_FALSE(dominates_min(a, a));
    for (const auto& b : pts) {
      if (dominates_min(a, b)) {
        EXPECT_FALSE(dominates_min(b, a));
      }
      for (const auto& c : pts) {
        if (dominates_min(a, b) && dominates_min(b, c)) {
          EXPECT_TRUE(dominates_min(a, c));
        }
      }
    }
  }
}

TEST(Dominance, AccuracyIsMaximized) {
  const Objectives a{0.9, 10, 10}, b{0.8, 10, 10}, c{0.9, 11, 10}, d{0.95, 20, 5};
  EXPECT_TRUE(dominates(a, b));
  EXPECT_FALSE(dominates(b, a));
  EXPECT_TRUE(dominates(a, c));
  EXPECT_FALSE(dominates(a, d));
  EXPECT_FALSE(dominates(d, a));
  EXPECT_FALSE(dominates(a, a));
  EXPECT_EQ(dominates(a, b), dominates_min(a.minimized(), b.minimized()));
}

TEST(NonDominatedSort, MatchesPeelingOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = random_points(1 + rng.below(30), 3, 5, rng);
    const auto fronts = non_dominated_sort(std::span<const std::vector<double>>(pts));
    const auto oracle = peel_ranks(pts);
    std::vector<int> rank(pts.size(), 0);
    std::size_t covered = 0;
    for (std::size_t f = 0; f < fronts.size(); ++f) {
      EXPECT_TRUE(std::is_sorted(fronts[f].begin(), fronts[f].end()));
      for (auto i : fronts[f]) rank[i] = static_cast<int>(f) + 1;
      covered += fronts[f].size();
    }
    EXPECT_EQ(covered, pts.size());
    EXPECT_EQ(rank, oracle);
  }
}

TEST(NonDominatedSort, DuplicatesShareAFront) {
  const std::vector<std::vector<double>> pts{{1, 1}, {1, 1}, {2, 2}};
  const auto fronts = non_dominated_sort(std::span<const std::vector<double>>(pts));
  ASSERT_EQ(fronts.size(), 2u);
  EXPECT_EQ(fronts[0], (std::vector<std::size_t>{0, 1}));
}

TEST(Crowding, HandExample) {
  const std::vector<std::vector<double>> front{{0, 2}, {1, 1}, {2, 0}};
  const auto d = crowding_distance(front);
  EXPECT_TRUE(std::isinf(d[0]));
  EXPECT_TRUE(std::isinf(d[2]));
  EXPECT_DOUBLE_EQ(d[1], 2.0);
  const std::vector<std::vector<double>> four{{0, 4}, {1, 2}, {3, 1}, {4, 0}};
  const auto d4 = crowding_distance(four);
  EXPECT_DOUBLE_EQ(d4[1], 3.0 / 4 + 3.0 / 4);
  EXPECT_DOUBLE_EQ(d4[2], 3.0 / 4 + 2.0 / 4);
}

TEST(Crowding, SmallFrontsAreInfinite) {
  const std::vector<std::vector<double>> two{{0, 1}, {1, 0}};
  for (double v : crowding_distance(two)) EXPECT_TRUE(std::isinf(v));
  const std::vector<std::vector<double>> flat{{1, 1}, {1, 1}, {1, 1}};
  const auto d = crowding_distance(flat);
  EXPECT_EQ(std::count_if(d.begin(), d.end(), [](double v) { return std::isinf(v); }), 2);
}

TEST(Tournament, LowerRankWinsWhenPicked) {
  std::vector<Individual> pop(3);
  for (int i = 0; i < 3; ++i) pop[static_cast<std::size_t>(i)].rank = i + 1;
  Rng rng(3);
  std::vector<int> wins(3, 0);
  const int n = 30000;
  for (int t = 0; t < n; ++t) ++wins[tournament_select(pop, rng)];
  EXPECT_NEAR(wins[0] / double(n), 2.0 / 3, 0.015);
  EXPECT_NEAR(wins[1] / double(n), 1.0 / 3, 0.015);
  EXPECT_EQ(wins[2], 0);
}

TEST(Tournament, CrowdingBreaksRankTies) {
  std::vector<Individual> pop(2);
  pop[0].rank = pop[1].rank = 1;
  pop[0].crowding = 0.5;
  pop[1].crowding = std::numeric_limits<double>::infinity();
  Rng rng(4);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(tournament_select(pop, rng), 1u);
}

TEST(Crossover, UniformPerLayer) {
  Rng rng(5);
  const Architecture a{std::vector<int>(20, 0)}, b{std::vector<int>(20, 1)};
  int from_b = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    const auto c = crossover(a, b, rng);
    for (int v : c.choices) from_b += v;
  }
  EXPECT_NEAR(from_b / (20.0 * trials), 0.5, 0.01);
  EXPECT_THROW(crossover(a, Architecture::parse("0"), rng), ConfigError);
}

TEST(Mutation, BranchFrequencies) {
  const auto space = make_space(8, 4);
  MutatorPolicy policy(8, 4);
  RewardHistory history(8, 4);
  SearchConfig cfg;
  Rng rng(6);
  std::map<MutationBranch, int> freq;
  const int n = 40000;
  const auto parent = Architecture::parse("0,1,2,3,0,1,2,3");
  for (int i = 0; i < n; ++i) {
    MutationBranch b;
    const auto child = mutate_hierarchical(parent, space, policy, history, rng, cfg, &b);
    ++freq[b];
    int changed = 0;
    for (std::size_t l = 0; l < 8; ++l) changed += child[l] != parent[l];
    EXPECT_LE(changed, 1);
    if (b == MutationBranch::random) {
      EXPECT_EQ(changed, 1);
    }
  }
  const auto tol = [&](double p) { return 4 * std::sqrt(p * (1 - p) / n); };
  EXPECT_NEAR(freq[MutationBranch::random] / double(n), 0.2, tol(0.2));
  EXPECT_NEAR((freq[MutationBranch::policy] + freq[MutationBranch::roulette]) / double(n), 0.65, tol(0.65));
  EXPECT_NEAR(freq[MutationBranch::prior] / double(n), 0.15, tol(0.15));
  EXPECT_NEAR(freq[MutationBranch::policy] / double(n), 0.65 * 0.7, tol(0.455));
  EXPECT_NEAR(freq[MutationBranch::roulette] / double(n), 0.65 * 0.3, tol(0.195));
}

TEST(Mutation, PriorFavoursSmallBlocks) {
  const auto space = make_space(1, 3, 8);
  SearchConfig cfg;
  cfg.p_rm = 0;
  cfg.p_re = 0;
  cfg.p_pr = 1;
  MutatorPolicy policy(1, 3);
  RewardHistory history(1, 3);
  Rng rng(7);
  std::vector<int> counts(3, 0);
  const int n = 30000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(mutate_hierarchical(Architecture::parse("0"), space, policy, history, rng, cfg)[0])];
  double z = 0;
  for (int j = 0; j < 3; ++j) z += 1.0 / block_params(space, 0, j);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(counts[static_cast<std::size_t>(j)] / double(n), 1.0 / block_params(space, 0, j) / z, 0.015);
}

TEST(Mutation, ConfigMustSumToOne) {
  SearchConfig cfg;
  cfg.p_rm = 0.3;
  EXPECT_THROW(cfg.check(), ConfigError);
  cfg = {};
  cfg.p_km = 0.5;
  EXPECT_THROW(cfg.check(), ConfigError);
  EXPECT_NO_THROW(SearchConfig{}.check());
}

TEST(Policy, RaisesProbabilityOfRewardedChoices) {
  MutatorPolicy policy(2, 3);
  const std::vector<std::pair<Architecture, double>> batch{{Architecture::parse("0,1"), 0.9},
                                                           {Architecture::parse("2,2"), 0.1}};
  const PolicySettings settings;
  const auto before0 = policy.probabilities(0);
  policy_update(policy, batch, settings);
  const auto after0 = policy.probabilities(0);
  EXPECT_GT(after0(0), before0(0));
  EXPECT_LT(after0(2), before0(2));
  EXPECT_GT(policy.probabilities(1)(1), before0(1));
  for (int j = 0; j < 3; ++j) {
    const double ratio = after0(j) / before0(j);
    EXPECT_LE(ratio, 1 + settings.clip + 1e-12);
    EXPECT_GE(ratio, 1 - settings.clip - 1e-12);
  }
  EXPECT_NEAR(policy.probabilities(0).sum(), 1.0, 1e-12);
}

TEST(Policy, EqualRewardsLeaveLogitsUnchanged) {
  MutatorPolicy policy(2, 3);
  const std::vector<std::pair<Architecture, double>> batch{{Architecture::parse("0,1"), 0.5},
                                                           {Architecture::parse("2,2"), 0.5}};
  policy_update(policy, batch);
  EXPECT_TRUE(policy.logits().isZero());
  EXPECT_DOUBLE_EQ(policy.baseline, 0.5);
}

TEST(Policy, ClipBoundsTheRatioEvenWithLargeSteps) {
  MutatorPolicy policy(1, 4);
  PolicySettings s;
  s.learning_rate = 1e6;
  const std::vector<std::pair<Architecture, double>> batch{{Architecture::parse("3"), 1.0},
                                                           {Architecture::parse("1"), 0.0}};
  const auto before = policy.probabilities(0);
  policy_update(policy, batch, s);
  const auto after = policy.probabilities(0);
  EXPECT_GT(after(3), before(3));
  EXPECT_LE(after(3) / before(3), 1 + s.clip + 1e-12);
  EXPECT_GE(after(1) / before(1), 1 - s.clip - 1e-12);
}

// Inclusion-exclusion over all subsets of boxes.
double hv_oracle(const std::vector<Objectives>& pts, const Objectives& ref) {
  const std::size_t n = pts.size();
  double total = 0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    double acc = std::numeric_limits<double>::infinity();
    double x = -std::numeric_limits<double>::infinity(), y = x;
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      ++bits;
      acc = std::min(acc, pts[i].accuracy);
      x = std::max(x, static_cast<double>(pts[i].mult_adds));
      y = std::max(y, static_cast<double>(pts[i].params));
    }
    const double vol = std::max(0.0, acc - ref.accuracy) * std::max(0.0, static_cast<double>(ref.mult_adds) - x) *
                       std::max(0.0, static_cast<double>(ref.params) - y);
    total += (bits % 2 ? 1 : -1) * vol;
  }
  return total;
}

TEST(Hypervolume, SingleBox) {
  const std::vector<Objectives> p{{0.5, 2, 3}};
  EXPECT_DOUBLE_EQ(hypervolume(p, Objectives{0.0, 10, 10}), 0.5 * 8 * 7);
  EXPECT_DOUBLE_EQ(hypervolume(p, Objectives{0.6, 10, 10}), 0.0);
  EXPECT_DOUBLE_EQ(hypervolume(std::vector<Objectives>{}, Objectives{0.0, 10, 10}), 0.0);
}

TEST(Hypervolume, MatchesInclusionExclusion) {
  Rng rng(8);
  const Objectives ref{0.0, 20, 20};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Objectives> pts;
    const auto n = 1 + rng.below(9);
    for (std::uint64_t i = 0; i < n; ++i)
      pts.push_back({static_cast<double>(rng.below(10)) / 10, static_cast<std::int64_t>(rng.below(22)),
                     static_cast<std::int64_t>(rng.below(22))});
    EXPECT_NEAR(hypervolume(pts, ref), hv_oracle(pts, ref), 1e-9) << trial;
  }
}

TEST(Hypervolume, DominatedPointsAddNothingAndSetsAreMonotone) {
  Rng rng(9);
  const Objectives ref{0.0, 30, 30};
  std::vector<Objectives> pts;
  for (int i = 0; i < 8; ++i)
    pts.push_back({rng.uniform(), static_cast<std::int64_t>(rng.below(29)), static_cast<std::int64_t>(rng.below(29))});
  const double base = hypervolume(pts, ref);
  auto more = pts;
  more.push_back({pts[0].accuracy / 2, pts[0].mult_adds + 1, pts[0].params});
  EXPECT_NEAR(hypervolume(more, ref), base, 1e-12);
  more.push_back({0.99, 1, 1});
  EXPECT_GE(hypervolume(more, ref), base);
}

double synthetic_accuracy(const Architecture& a) {
  // Bigger choices score higher with diminishing returns and a layer-dependent twist.
  double s = 0;
  for (std::size_t l = 0; l < a.size(); ++l) s += std::sqrt(a[l] + 1.0) * (1 + 0.1 * static_cast<double>(l % 3));
  return s / (a.size() * 3.0);
}

TEST(Search, FullBudgetWithUniqueArchitectures) {
  const auto space = make_space(10, 6, 8, 2, 3);
  SearchConfig cfg;
  cfg.population = 64;
  cfg.generations = 200;
  cfg.seed = 1;
  double last_best = 0;
  bool elitist = true;
  const auto result = run_search(space, synthetic_accuracy, cfg, [&](const GenerationRecord& r) {
    elitist = elitist && r.best_accuracy >= last_best;
    last_best = r.best_accuracy;
  });
  EXPECT_TRUE(elitist);
  EXPECT_EQ(result.evaluations.size(), 12800u);
  EXPECT_EQ(result.generations.size(), 200u);
  EXPECT_EQ(result.generations.back().evaluated, 12800);
  std::set<Architecture> seen;
  for (const auto& e : result.evaluations) seen.insert(e.individual.arch);
  EXPECT_EQ(seen.size(), 12800u);
  EXPECT_EQ(result.population.size(), 64u);
  EXPECT_EQ(result.selected.size(), 13u);
  for (const auto& a : result.front)
    for (const auto& b : result.front) EXPECT_FALSE(dominates(a.obj, b.obj));
  for (const auto& a : result.front)
    for (const auto& p : result.population) EXPECT_FALSE(dominates(p.obj, a.obj));
}

TEST(Search, BeatsRandomOnSyntheticProblem) {
  const auto space = make_space(10, 6, 8, 2, 3);
  SearchConfig cfg;
  cfg.population = 32;
  cfg.generations = 30;
  cfg.seed = 2;
  const auto result = run_search(space, synthetic_accuracy, cfg);
  const auto random = random_search(space, synthetic_accuracy, 32 * 30, 2);
  EXPECT_EQ(random.size(), 960u);
  std::vector<Objectives> a, b;
  std::int64_t max_ma = 0, max_p = 0;
  for (const auto& e : result.evaluations) {
    max_ma = std::max(max_ma, e.individual.obj.mult_adds);
    max_p = std::max(max_p, e.individual.obj.params);
  }
  for (const auto& r : random) {
    max_ma = std::max(max_ma, r.obj.mult_adds);
    max_p = std::max(max_p, r.obj.params);
  }
  for (const auto& i : result.front) a.push_back(i.obj);
  for (const auto& i : pareto_front(random)) b.push_back(i.obj);
  const Objectives ref{0.0, max_ma + max_ma / 10 + 1, max_p + max_p / 10 + 1};
  EXPECT_GT(hypervolume(a, ref), hypervolume(b, ref));
}

TEST(Search, DeterministicAcrossThreadCounts) {
  const auto space = make_space(6, 4, 8, 2, 3);
  SearchConfig cfg;
  cfg.population = 16;
  cfg.generations = 10;
  cfg.seed = 3;
  const auto a = run_search(space, synthetic_accuracy, cfg);
  cfg.threads = 3;
  const auto b = run_search(space, synthetic_accuracy, cfg);
  ASSERT_EQ(a.evaluations.size(), b.evaluations.size());
  for (std::size_t i = 0; i < a.evaluations.size(); ++i)
    EXPECT_EQ(a.evaluations[i].individual.arch, b.evaluations[i].individual.arch);
}

TEST(Search, StopsWhenTheSpaceIsExhausted) {
  const auto space = make_space(3, 2);
  SearchConfig cfg;
  cfg.population = 4;
  cfg.generations = 10;
  const auto result = run_search(space, synthetic_accuracy, cfg);
  EXPECT_EQ(result.evaluations.size(), 8u);
  std::set<Architecture> seen;
  for (const auto& e : result.evaluations) seen.insert(e.individual.arch);
  EXPECT_EQ(seen.size(), 8u);
}

TEST(Search, RejectsNonFiniteAccuracy) {
  const auto space = make_space(3, 2);
  SearchConfig cfg;
  cfg.population = 2;
  cfg.generations = 1;
  EXPECT_THROW(run_search(space, [](const Architecture&) { return std::nan(""); }, cfg), ConfigError);
}

TEST(RewardHistory, MeansPerChoiceWithGlobalFallback) {
  RewardHistory h(2, 3);
  h.record(Architecture::parse("0,1"), 0.4);
  h.record(Architecture::parse("0,2"), 0.8);
  EXPECT_DOUBLE_EQ(h.mean(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(h.mean(1, 2), 0.8);
  EXPECT_DOUBLE_EQ(h.mean(0, 2), 0.6);
}

}  // namespace
}  // namespace strictnas
