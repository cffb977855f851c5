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

#include <gmpxx.h>

#include <cstdint>
#include <vector>

#include "strictnas/rng.hpp"
#include "strictnas/search_space.hpp"

namespace strictnas {

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

/// Each layer's choice drawn independently and uniformly from [0, m).
Architecture sample_uniform(const SearchSpace& space, Rng& rng);

/// The m single-path models trained in one strict-fairness step.
struct StepSample {
  std::vector<Architecture> models;
};

/// One independent uniform permutation of [0, m) per layer; model k takes
/// entry k of every layer's permutation, so each choice of each layer appears
/// in exactly one model. Layer permutations come from child streams keyed by
/// layer index, seeded from a single draw of `rng`.
StepSample sample_strict_step(const SearchSpace& space, Rng& rng);

/// True iff every layer's column of choices is a permutation of [0, m).
bool covers_every_choice(const SearchSpace& space, const StepSample& sample);

/// Yields each uniformly sampled architecture `k` consecutive times.
class KRepeatSampler {
 public:
  KRepeatSampler(const SearchSpace& space, int k, Rng rng);
  Architecture next();
  int k() const { return k_; }

 private:
  const SearchSpace* space_;
  int k_;
  int remaining_ = 0;
  Architecture current_;
  Rng rng_;
};

/// The first `count` entries of a k-repeat schedule.
std::vector<Architecture> sample_krepeat(const SearchSpace& space, Rng& rng, int k, std::size_t count);

// ---------------------------------------------------------------------------
// Update-count bookkeeping
// ---------------------------------------------------------------------------

/// L x m update counts plus the number of back-propagations. Every BP touches
/// exactly one choice per layer, so each layer's counts sum to total_bp().
class FairnessCounters {
 public:
  FairnessCounters() = default;
  FairnessCounters(int layers, int choices);

  /// One BP through `arch`.
  void record(const Architecture& arch);
  /// Element-wise sum; associative and commutative.
  void merge(const FairnessCounters& other);

  int layers() const { return layers_; }
  int choices() const { return choices_; }
  std::int64_t count(int layer, int choice) const { return counts_[static_cast<std::size_t>(layer * choices_ + choice)]; }
  std::int64_t total_bp() const { return total_bp_; }
  const std::vector<std::int64_t>& raw() const { return counts_; }

  /// All L x m counts integer-equal.
  bool all_equal() const;

  /// Rebuild from stored values (checkpoint load); checks the row-sum invariant.
  static FairnessCounters from_raw(int layers, int choices, std::vector<std::int64_t> counts, std::int64_t total_bp);

  friend bool operator==(const FairnessCounters&, const FairnessCounters&) = default;

 private:
  int layers_ = 0;
  int choices_ = 0;
  std::vector<std::int64_t> counts_;
  std::int64_t total_bp_ = 0;
};

struct LayerCounterStats {
  std::vector<std::int64_t> counts;
  double mean = 0.0;
  /// Population variance of the m counts around their mean.
  double variance = 0.0;
};

struct CounterReport {
  std::vector<LayerCounterStats> layers;
  std::int64_t total_bp = 0;
  /// n/m, the expectation under any expectation-fair sampler.
  double expected_count = 0.0;
  /// n(m-1)/m^2, the per-choice variance under uniform sampling.
  double uniform_variance = 0.0;

  double max_variance() const;
  double mean_variance() const;
};

CounterReport counter_report(const FairnessCounters& counters);

// ---------------------------------------------------------------------------
// Probability that uniform sampling leaves all m counts equal after n draws
// ---------------------------------------------------------------------------

struct ExactProbability {
  mpq_class exact;  ///< canonical rational n! / ((n/m)!^m m^n)
  double value;     ///< round-to-nearest double rendering of `exact`
};

/// Requires m >= 2, n >= m, n divisible by m; throws std::invalid_argument otherwise.
ExactProbability equal_count_probability_exact(int m, std::int64_t n);

/// Stirling asymptote sqrt(m) / (2 pi n / m)^((m-1)/2); same preconditions.
double equal_count_probability_stirling(int m, std::int64_t n);

/// Nearest double to a rational (MPFR, round-to-nearest-even).
double to_double_nearest(const mpq_class& q);

}  // namespace strictnas
