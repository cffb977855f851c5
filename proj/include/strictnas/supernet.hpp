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
#include <memory>
#include <string_view>
#include <vector>

#include "strictnas/dataset.hpp"
#include "strictnas/engine.hpp"
#include "strictnas/fairness.hpp"
#include "strictnas/search_space.hpp"

namespace strictnas {

/// strict_fair: m paths per step sampled without replacement, one deferred update.
/// ef_uniform / spos: one uniformly sampled path per step, immediate update
///   (the two names select the same rule).
/// ef_krepeat: each uniformly sampled path kept for k consecutive steps.
enum class TrainMode { strict_fair, ef_uniform, ef_krepeat, spos };

std::string_view to_string(TrainMode mode);
/// Throws ConfigError quoting the unknown value.
TrainMode parse_train_mode(std::string_view name);

struct TrainConfig {
  TrainMode mode = TrainMode::strict_fair;
  int k = 1;
  /// Divide lr0 by k in ef_krepeat mode.
  bool scale_lr_by_k = false;
  int epochs = 30;
  int batch_size = 64;
  double lr0 = 0.045;
  double momentum = 0.9;
  double weight_decay = 4e-5;
  std::uint64_t seed = 0;
  int threads = 1;

  void check() const;
};

/// Shared-weight supernet: stem, L x m disjoint choice blocks, head, plus the
/// optimizer state and per-block update counters.
class Supernet {
 public:
  Supernet(SearchSpace space, std::uint64_t init_seed, const InitOptions& init = {}, SgdSettings sgd = {});
  /// Wraps existing parameters (checkpoint load); optimizer state starts empty.
  Supernet(ParamSet<float> params, FairnessCounters counters, std::int64_t step, std::uint64_t init_seed,
           SgdSettings sgd = {});

  const SearchSpace& space() const { return params_.space(); }
  const NetworkLayout& layout() const { return params_.layout(); }
  ParamSet<float>& params() { return params_; }
  const ParamSet<float>& params() const { return params_; }
  SgdMomentum<float>& optimizer() { return optimizer_; }
  FairnessCounters& counters() { return counters_; }
  const FairnessCounters& counters() const { return counters_; }
  /// Number of parameter updates applied so far.
  std::int64_t step() const { return step_; }
  std::uint64_t init_seed() const { return init_seed_; }

  void advance_step() { ++step_; }

 private:
  ParamSet<float> params_;
  SgdMomentum<float> optimizer_;
  FairnessCounters counters_;
  std::int64_t step_ = 0;
  std::uint64_t init_seed_ = 0;
};

struct StepStats {
  double loss = 0.0;  ///< mean loss over the step's back-propagations
  int backprops = 0;
};

/// One strict-fairness step: draws a StepSample and trains on it.
StepStats train_step_strict(Supernet& net, const Batch& batch, Rng& rng, double lr, int threads = 1);

/// One strict-fairness step on a given sample. All m forward/backward passes
/// see the pre-step parameters and the same batch; their gradients are summed
/// in lexicographic architecture order (independent of the order of
/// `sample.models`), divided by m, and applied in a single update. Every
/// (layer, choice) counter increases by exactly one.
StepStats train_step_strict(Supernet& net, const Batch& batch, const StepSample& sample, double lr, int threads = 1);

/// One back-propagation through `arch` followed immediately by an update.
StepStats train_step_single(Supernet& net, const Batch& batch, const Architecture& arch, double lr);

/// Source of paths for the single-path modes.
class PathSampler {
 public:
  PathSampler(const SearchSpace& space, TrainMode mode, int k, Rng rng);
  Architecture next();

 private:
  const SearchSpace* space_;
  TrainMode mode_;
  KRepeatSampler krepeat_;
  Rng rng_;
};

/// One step of a single-path mode: the next path from `sampler`, one BP, one update.
StepStats train_step_ef(Supernet& net, const Batch& batch, PathSampler& sampler, double lr);

struct EpochLog {
  int epoch = 0;
  std::int64_t step = 0;  ///< updates completed at the end of the epoch
  double lr = 0.0;        ///< rate of the epoch's last update
  double train_loss = 0.0;
  double counter_variance = 0.0;  ///< largest across-choice variance over layers
};

using EpochCallback = std::function<void(const EpochLog&)>;

std::int64_t steps_per_epoch(const Dataset& data, const TrainConfig& config);

/// Full supernet training under `config.mode` with cosine decay over all
/// steps. Each epoch reshuffles the training split; each mini-batch is one
/// supernet step.
std::vector<EpochLog> train_supernet(Supernet& net, const Dataset& data, const TrainConfig& config,
                                     const EpochCallback& on_epoch = {});

/// Accuracy of `arch` with inherited weights (batch-norm in eval mode).
double evaluate_path(const ParamSet<float>& params, const Architecture& arch, const Batch& batch);
double evaluate_submodel(const Supernet& net, const Architecture& arch, const Dataset& data, Split split);

struct StandaloneResult {
  Supernet model;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Trains `arch` alone from fresh parameters with the supernet's optimizer
/// settings and schedule; only the path's blocks are ever updated.
StandaloneResult train_standalone(const SearchSpace& space, const Architecture& arch, const Dataset& data,
                                  const TrainConfig& config);

}  // namespace strictnas
