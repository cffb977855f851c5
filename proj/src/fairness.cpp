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

#include "strictnas/fairness.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "strictnas/error.hpp"

namespace strictnas {

Architecture sample_uniform(const SearchSpace& space, Rng& rng) {
  Architecture arch;
  arch.choices.resize(static_cast<std::size_t>(space.num_layers()));
  const auto m = static_cast<std::uint64_t>(space.choices_per_layer());
  for (auto& c : arch.choices) c = static_cast<int>(rng.below(m));
  return arch;
}

StepSample sample_strict_step(const SearchSpace& space, Rng& rng) {
  const int m = space.choices_per_layer();
  const int layers = space.num_layers();
  StepSample sample;
  sample.models.assign(static_cast<std::size_t>(m), Architecture{std::vector<int>(static_cast<std::size_t>(layers))});
  const std::uint64_t step_seed = rng.next_u64();
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (int l = 0; l < layers; ++l) {
    std::iota(perm.begin(), perm.end(), 0);
    auto layer_rng = Rng::derive(step_seed, static_cast<std::uint64_t>(l));
    layer_rng.shuffle(std::span<int>(perm));
    for (int k = 0; k < m; ++k) sample.models[k][l] = perm[k];
  }
  return sample;
}

bool covers_every_choice(const SearchSpace& space, const StepSample& sample) {
  const int m = space.choices_per_layer();
  if (static_cast<int>(sample.models.size()) != m) return false;
  for (const auto& model : sample.models) {
    if (!validate(space, model)) return false;
  }
  std::vector<char> seen(static_cast<std::size_t>(m));
  for (int l = 0; l < space.num_layers(); ++l) {
    std::fill(seen.begin(), seen.end(), 0);
    for (const auto& model : sample.models) {
      if (seen[model[l]]++) return false;
    }
  }
  return true;
}

KRepeatSampler::KRepeatSampler(const SearchSpace& space, int k, Rng rng) : space_(&space), k_(k), rng_(rng) {
  if (k < 1) throw std::invalid_argument("k-repeat sampling needs k >= 1, got " + std::to_string(k));
}

Architecture KRepeatSampler::next() {
  if (remaining_ == 0) {
    current_ = sample_uniform(*space_, rng_);
    remaining_ = k_;
  }
  --remaining_;
  return current_;
}

std::vector<Architecture> sample_krepeat(const SearchSpace& space, Rng& rng, int k, std::size_t count) {
  KRepeatSampler sampler(space, k, Rng(rng.next_u64()));
  std::vector<Architecture> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.next());
  return out;
}

FairnessCounters::FairnessCounters(int layers, int choices)
    : layers_(layers), choices_(choices), counts_(static_cast<std::size_t>(layers * choices), 0) {}

void FairnessCounters::record(const Architecture& arch) {
  if (static_cast<int>(arch.size()) != layers_) throw ConfigError("counter record: architecture length mismatch");
  for (int l = 0; l < layers_; ++l) {
    const int c = arch[l];
    if (c < 0 || c >= choices_) throw ConfigError("counter record: choice out of range");
    ++counts_[static_cast<std::size_t>(l * choices_ + c)];
  }
  ++total_bp_;
}

void FairnessCounters::merge(const FairnessCounters& other) {
  if (other.layers_ != layers_ || other.choices_ != choices_) throw ConfigError("counter merge: shape mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_bp_ += other.total_bp_;
}

bool FairnessCounters::all_equal() const {
  return std::adjacent_find(counts_.begin(), counts_.end(), std::not_equal_to<>()) == counts_.end();
}

FairnessCounters FairnessCounters::from_raw(int layers, int choices, std::vector<std::int64_t> counts,
                                            std::int64_t total_bp) {
  if (static_cast<int>(counts.size()) != layers * choices) throw IoError("counters: wrong number of entries");
  FairnessCounters out(layers, choices);
  for (int l = 0; l < layers; ++l) {
    const auto row = counts.begin() + l * choices;
    if (std::accumulate(row, row + choices, std::int64_t{0}) != total_bp) {
      throw IoError("counters: layer " + std::to_string(l) + " does not sum to total_bp");
    }
  }
  out.counts_ = std::move(counts);
  out.total_bp_ = total_bp;
  return out;
}

double CounterReport::max_variance() const {
  double v = 0.0;
  for (const auto& layer : layers) v = std::max(v, layer.variance);
  return v;
}

double CounterReport::mean_variance() const {
  if (layers.empty()) return 0.0;
  double v = 0.0;
  for (const auto& layer : layers) v += layer.variance;
  return v / static_cast<double>(layers.size());
}

CounterReport counter_report(const FairnessCounters& counters) {
  CounterReport report;
  const int m = counters.choices();
  report.total_bp = counters.total_bp();
  const auto n = static_cast<double>(counters.total_bp());
  if (m > 0) {
    report.expected_count = n / m;
    report.uniform_variance = n * (m - 1) / (static_cast<double>(m) * m);
  }
  for (int l = 0; l < counters.layers(); ++l) {
    LayerCounterStats stats;
    for (int j = 0; j < m; ++j) stats.counts.push_back(counters.count(l, j));
    // Integer sums keep the strict-fairness case exactly zero.
    const std::int64_t sum = std::accumulate(stats.counts.begin(), stats.counts.end(), std::int64_t{0});
    stats.mean = static_cast<double>(sum) / m;
    long double ss = 0.0L;
    for (const auto c : stats.counts) {
      const long double d = static_cast<long double>(c) * m - sum;
      ss += d * d;
    }
    stats.variance = static_cast<double>(ss / (static_cast<long double>(m) * m * m));
    report.layers.push_back(std::move(stats));
  }
  return report;
}

}  // namespace strictnas
