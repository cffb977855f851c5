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

#include "strictnas/supernet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strictnas/parallel.hpp"

namespace strictnas {

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::strict_fair:
      return "strict_fair";
    case TrainMode::ef_uniform:
      return "ef_uniform";
    case TrainMode::ef_krepeat:
      return "ef_krepeat";
    case TrainMode::spos:
      return "spos";
  }
  return "?";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "strict_fair" || name == "strict") return TrainMode::strict_fair;
  if (name == "ef_uniform" || name == "uniform") return TrainMode::ef_uniform;
  if (name == "ef_krepeat" || name == "krepeat") return TrainMode::ef_krepeat;
  if (name == "spos") return TrainMode::spos;
  throw ConfigError("train.mode: unknown mode '" + std::string(name) +
                    "' (expected strict_fair, ef_uniform, ef_krepeat or spos)");
}

void TrainConfig::check() const {
  if (mode == TrainMode::ef_krepeat && k < 1) throw ConfigError("train.k must be >= 1 for ef_krepeat");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(lr0 > 0.0)) throw ConfigError("train.lr must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("train.momentum must lie in [0, 1)");
  if (weight_decay < 0.0) throw ConfigError("train.weight_decay must be non-negative");
}

Supernet::Supernet(SearchSpace space, std::uint64_t init_seed, const InitOptions& init, SgdSettings sgd)
    : params_(std::make_shared<const NetworkLayout>(std::move(space))),
      optimizer_(sgd),
      counters_(params_.space().num_layers(), params_.space().choices_per_layer()),
      init_seed_(init_seed) {
  initialize(params_, init_seed, init);
}

Supernet::Supernet(ParamSet<float> params, FairnessCounters counters, std::int64_t step, std::uint64_t init_seed,
                   SgdSettings sgd)
    : params_(std::move(params)), optimizer_(sgd), counters_(std::move(counters)), step_(step), init_seed_(init_seed) {}

namespace {

struct PathResult {
  GradBuffer<float> grads;
  ForwardCache<float> cache;
  double loss = 0.0;
};

PathResult run_path(const ParamSet<float>& params, const Architecture& arch, const Batch& batch) {
  PathResult r;
  r.cache = forward(params, arch, batch.x, Mode::train);
  r.loss = cross_entropy(r.cache.logits, batch.y);
  if (!std::isfinite(r.loss)) throw DivergenceError("non-finite loss on path " + arch.str());
  r.grads = backward(params, r.cache, batch.y);
  // Only batch statistics are needed after this point.
  for (auto& bc : r.cache.blocks) {
    Vec<float> mean = std::move(bc.batch_mean);
    Vec<float> var = std::move(bc.batch_var);
    bc = {};
    bc.batch_mean = std::move(mean);
    bc.batch_var = std::move(var);
  }
  r.cache.stem_input.resize(0, 0);
  r.cache.stem_pre.resize(0, 0);
  r.cache.head_input.resize(0, 0);
  r.cache.logits.resize(0, 0);
  return r;
}

}  // namespace

StepStats train_step_strict(Supernet& net, const Batch& batch, Rng& rng, double lr, int threads) {
  return train_step_strict(net, batch, sample_strict_step(net.space(), rng), lr, threads);
}

StepStats train_step_strict(Supernet& net, const Batch& batch, const StepSample& sample, double lr, int threads) {
  const auto& space = net.space();
  if (!covers_every_choice(space, sample)) throw ConfigError("strict step: sample does not cover every choice once");
  const auto m = sample.models.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sample.models[a] < sample.models[b]; });

  std::vector<PathResult> results(m);
  const auto& params = net.params();
  parallel_for(m, threads, [&](std::size_t i) { results[i] = run_path(params, sample.models[order[i]], batch); });

  GradBuffer<float> total(params.size());
  double loss = 0.0;
  for (const auto& r : results) {
    total.accumulate(r.grads);
    loss += r.loss;
  }
  total.scale(1.0f / static_cast<float>(m));
  net.optimizer().step(net.params(), total, lr);
  for (const auto& r : results) update_running_stats(net.params(), r.cache);
  for (std::size_t i = 0; i < m; ++i) net.counters().record(sample.models[order[i]]);
  net.advance_step();
  return {loss / static_cast<double>(m), static_cast<int>(m)};
}

StepStats train_step_single(Supernet& net, const Batch& batch, const Architecture& arch, double lr) {
  auto r = run_path(net.params(), arch, batch);
  net.optimizer().step(net.params(), r.grads, lr);
  update_running_stats(net.params(), r.cache);
  net.counters().record(arch);
  net.advance_step();
  return {r.loss, 1};
}

PathSampler::PathSampler(const SearchSpace& space, TrainMode mode, int k, Rng rng)
    : space_(&space),
      mode_(mode),
      krepeat_(space, mode == TrainMode::ef_krepeat ? k : 1, Rng::derive(rng.next_u64(), "krepeat")),
      rng_(rng) {
  if (mode == TrainMode::strict_fair) throw ConfigError("PathSampler serves single-path modes only");
}

Architecture PathSampler::next() {
  if (mode_ == TrainMode::ef_krepeat) return krepeat_.next();
  return sample_uniform(*space_, rng_);
}

StepStats train_step_ef(Supernet& net, const Batch& batch, PathSampler& sampler, double lr) {
  return train_step_single(net, batch, sampler.next(), lr);
}

std::int64_t steps_per_epoch(const Dataset& data, const TrainConfig& config) {
  const auto n = static_cast<std::int64_t>(data.train.size());
  return (n + config.batch_size - 1) / config.batch_size;
}

namespace {

/// Shared driver: `step_fn(batch, lr)` performs one supernet step.
template <typename StepFn>
std::vector<EpochLog> run_epochs(Supernet& net, const Dataset& data, const TrainConfig& config, double lr0,
                                 const EpochCallback& on_epoch, StepFn&& step_fn) {
  config.check();
  if (data.train.empty()) throw ConfigError("training split is empty");
  net.optimizer().set_settings({config.momentum, config.weight_decay});
  const std::int64_t per_epoch = steps_per_epoch(data, config);
  const std::int64_t total = per_epoch * config.epochs;
  std::vector<EpochLog> logs;
  std::vector<int> order = data.train;
  std::int64_t t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto shuffle_rng = Rng::derive(config.seed, mix_seed(fnv1a("epoch"), static_cast<std::uint64_t>(epoch)));
    order = data.train;
    shuffle_rng.shuffle(std::span<int>(order));
    double loss_sum = 0.0;
    std::int64_t bps = 0;
    double lr = 0.0;
    for (std::int64_t b = 0; b < per_epoch; ++b, ++t) {
      const auto begin = static_cast<std::size_t>(b * config.batch_size);
      const auto end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      const Batch batch = make_batch(data, std::span<const int>(order).subspan(begin, end - begin));
      lr = cosine_lr(t, total, lr0);
      const StepStats stats = step_fn(batch, lr);
      loss_sum += stats.loss * stats.backprops;
      bps += stats.backprops;
    }
    EpochLog log;
    log.epoch = epoch;
    log.step = net.step();
    log.lr = lr;
    log.train_loss = bps > 0 ? loss_sum / static_cast<double>(bps) : 0.0;
    log.counter_variance = counter_report(net.counters()).max_variance();
    logs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return logs;
}

}  // namespace

std::vector<EpochLog> train_supernet(Supernet& net, const Dataset& data, const TrainConfig& config,
                                     const EpochCallback& on_epoch) {
  auto rng = Rng::derive(config.seed, "sampler");
  if (config.mode == TrainMode::strict_fair) {
    return run_epochs(net, data, config, config.lr0, on_epoch, [&](const Batch& batch, double lr) {
      return train_step_strict(net, batch, rng, lr, config.threads);
    });
  }
  double lr0 = config.lr0;
  if (config.mode == TrainMode::ef_krepeat && config.scale_lr_by_k) lr0 /= config.k;
  PathSampler sampler(net.space(), config.mode, config.k, rng);
  return run_epochs(net, data, config, lr0, on_epoch,
                    [&](const Batch& batch, double lr) { return train_step_ef(net, batch, sampler, lr); });
}

double evaluate_path(const ParamSet<float>& params, const Architecture& arch, const Batch& batch) {
  if (batch.size() == 0) throw ConfigError("evaluation batch is empty");
  constexpr Eigen::Index kChunk = 4096;
  std::int64_t correct = 0;
  for (Eigen::Index start = 0; start < batch.x.cols(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, batch.x.cols() - start);
    const Mat<float> chunk = batch.x.middleCols(start, len);
    const Mat<float> z = logits(params, arch, chunk, Mode::eval);
    for (Eigen::Index b = 0; b < len; ++b) {
      Eigen::Index best = 0;
      z.col(b).maxCoeff(&best);
      if (best == batch.y[static_cast<std::size_t>(start + b)]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

double evaluate_submodel(const Supernet& net, const Architecture& arch, const Dataset& data, Split split) {
  require_valid(net.space(), arch);
  return evaluate_path(net.params(), arch, split_batch(data, split));
}

StandaloneResult train_standalone(const SearchSpace& space, const Architecture& arch, const Dataset& data,
                                  const TrainConfig& config) {
  require_valid(space, arch);
  Supernet model(space, config.seed, {}, SgdSettings{config.momentum, config.weight_decay});
  run_epochs(model, data, config, config.lr0, {},
             [&](const Batch& batch, double lr) { return train_step_single(model, batch, arch, lr); });
  StandaloneResult result{std::move(model)};
  result.train_accuracy = evaluate_submodel(result.model, arch, data, Split::train);
  if (!data.val.empty()) result.val_accuracy = evaluate_submodel(result.model, arch, data, Split::val);
  if (!data.test.empty()) result.test_accuracy = evaluate_submodel(result.model, arch, data, Split::test);
  return result;
}

}  // namespace strictnas
