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

#include "strictnas/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "strictnas/fairness.hpp"
#include "strictnas/parallel.hpp"

namespace strictnas {

std::vector<RankingMethod> default_ranking_methods(const TrainConfig& base) {
  RankingMethod sf{"strict_fair", base};
  sf.train.mode = TrainMode::strict_fair;
  sf.train.k = 1;
  RankingMethod spos{"spos", base};
  spos.train.mode = TrainMode::spos;
  spos.train.k = 1;
  RankingMethod krepeat{"ef_krepeat", base};
  krepeat.train.mode = TrainMode::ef_krepeat;
  krepeat.train.k = 6;
  krepeat.train.scale_lr_by_k = false;
  return {sf, spos, krepeat};
}

const RankingSummary& RankingExperimentResult::method(const std::string& name) const {
  for (const auto& s : summary) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no method named '" + name + "'");
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of no values");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

SeedOutcome run_seed(const RankingExperimentConfig& config, std::uint64_t seed, const ProgressFn& progress) {
  SeedOutcome out;
  out.seed = seed;
  out.data = make_dataset(config.dataset, mix_seed(seed, fnv1a("data")));
  const auto init_seed = mix_seed(seed, fnv1a("init"));
  const auto train_seed = mix_seed(seed, fnv1a("train"));

  Rng arch_rng = Rng::derive(seed, "architectures");
  for (int i = 0; i < config.samples; ++i) out.sampled.push_back(sample_uniform(config.space, arch_rng));

  const Batch val = split_batch(out.data, Split::val);
  for (const auto& method : config.methods) {
    if (progress) progress("seed " + std::to_string(seed) + ": training supernet " + method.name);
    Supernet net(config.space, init_seed);
    TrainConfig train = method.train;
    train.seed = train_seed;
    train.threads = config.threads;
    train_supernet(net, out.data, train);
    MethodOutcome m;
    m.name = method.name;
    m.oneshot.resize(out.sampled.size());
    parallel_for(out.sampled.size(), config.threads,
                 [&](std::size_t i) { m.oneshot[i] = evaluate_path(net.params(), out.sampled[i], val); });
    m.histogram = make_histogram(m.oneshot, config.bins);
    m.oneshot_range = m.histogram.max - m.histogram.min;
    out.methods.push_back(std::move(m));
    out.supernets.push_back(std::move(net));
  }

  std::vector<bool> wanted(out.sampled.size(), false);
  for (auto& m : out.methods) {
    m.selected = select_evenly_spaced(m.oneshot, static_cast<std::size_t>(config.select_k));
    for (const auto i : m.selected) wanted[i] = true;
  }
  std::vector<std::size_t> to_train;
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    if (wanted[i]) to_train.push_back(i);
  }

  // Stand-alone seeds depend on the architecture only, so the ground truth
  // does not depend on which method selected it.
  const auto repeats = static_cast<std::size_t>(config.standalone_repeats);
  const auto n_runs = to_train.size() * repeats;
  if (progress) {
    progress("seed " + std::to_string(seed) + ": training " + std::to_string(n_runs) + " stand-alone models");
  }
  std::vector<double> runs(n_runs);
  const auto sa_seed = mix_seed(seed, fnv1a("standalone"));
  parallel_for(n_runs, config.threads, [&](std::size_t i) {
    const auto& arch = out.sampled[to_train[i / repeats]];
    TrainConfig sa = config.standalone;
    sa.seed = mix_seed(mix_seed(sa_seed, fnv1a(arch.str())), i % repeats);
    sa.threads = 1;
    runs[i] = train_standalone(config.space, arch, out.data, sa).test_accuracy;
  });
  out.standalone.assign(out.sampled.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = 0; t < to_train.size(); ++t) {
    double sum = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) sum += runs[t * repeats + r];
    out.standalone[to_train[t]] = sum / static_cast<double>(repeats);
  }

  for (auto& m : out.methods) {
    std::vector<double> oneshot;
    std::vector<double> standalone;
    for (const auto idx : m.selected) {
      m.pairs.items.push_back({out.sampled[idx], m.oneshot[idx], out.standalone[idx]});
      oneshot.push_back(m.oneshot[idx]);
      standalone.push_back(out.standalone[idx]);
    }
    m.tau = kendall_tau(m.pairs);
    m.gap = accuracy_gap(oneshot, standalone);
  }
  return out;
}

}  // namespace

RankingExperimentResult run_ranking_experiment(const RankingExperimentConfig& config, const ProgressFn& progress) {
  if (config.methods.empty()) throw ConfigError("ranking: no methods");
  if (config.seeds.empty()) throw ConfigError("ranking: no seeds");
  if (config.samples < 2) throw ConfigError("ranking.samples: need at least 2");
  if (config.standalone_repeats < 1) throw ConfigError("ranking.standalone_repeats: must be at least 1");
  if (config.select_k < 2 || config.select_k > config.samples) {
    throw ConfigError("ranking.select_k: must lie in [2, samples]");
  }
  for (const auto& m : config.methods) m.train.check();
  config.standalone.check();

  RankingExperimentResult result;
  for (const auto seed : config.seeds) result.seeds.push_back(run_seed(config, seed, progress));
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    RankingSummary s;
    s.name = config.methods[k].name;
    for (const auto& so : result.seeds) {
      s.taus.push_back(so.methods[k].tau);
      s.oneshot_ranges.push_back(so.methods[k].oneshot_range);
    }
    s.median_tau = median(s.taus);
    s.median_oneshot_range = median(s.oneshot_ranges);
    result.summary.push_back(std::move(s));
  }
  return result;
}

SearchComparison compare_search_with_random(const Supernet& net, const Dataset& data, const SearchConfig& config) {
  SearchComparison out;
  out.search = run_search(net, data, Split::val, config);
  const Batch val = split_batch(data, Split::val);
  const Evaluator evaluate = [&](const Architecture& a) { return evaluate_path(net.params(), a, val); };
  const auto budget = static_cast<std::size_t>(config.population) * static_cast<std::size_t>(config.generations);
  out.random_front = pareto_front(random_search(net.space(), evaluate, budget, mix_seed(config.seed, fnv1a("random")),
                                                config.threads));

  std::int64_t max_ma = 0;
  std::int64_t max_params = 0;
  for (const auto& e : out.search.evaluations) {
    max_ma = std::max(max_ma, e.individual.obj.mult_adds);
    max_params = std::max(max_params, e.individual.obj.params);
  }
  for (const auto& ind : out.random_front) {
    max_ma = std::max(max_ma, ind.obj.mult_adds);
    max_params = std::max(max_params, ind.obj.params);
  }
  out.reference = {0.0, static_cast<std::int64_t>(std::ceil(1.1 * static_cast<double>(max_ma))),
                   static_cast<std::int64_t>(std::ceil(1.1 * static_cast<double>(max_params)))};

  std::vector<Objectives> sp;
  for (const auto& ind : out.search.front) sp.push_back(ind.obj);
  std::vector<Objectives> rp;
  for (const auto& ind : out.random_front) rp.push_back(ind.obj);
  out.search_hypervolume = hypervolume(sp, out.reference);
  out.random_hypervolume = hypervolume(rp, out.reference);

  out.front_non_dominating = true;
  for (const auto& a : out.search.front) {
    for (const auto& b : out.search.front) {
      if (dominates(a.obj, b.obj)) out.front_non_dominating = false;
    }
  }
  return out;
}

}  // namespace strictnas
