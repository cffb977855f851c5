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
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace strictnas {

/// SplitMix64 finalizer over the pair (a, b). Used to derive independent
/// child seeds, e.g. one stream per layer index.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// FNV-1a over a string; stable across platforms (std::hash is not).
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Seeded 64-bit generator. Bounded integers and normals are produced by
/// fixed algorithms here rather than std distributions, whose output is
/// implementation-defined, so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Child generator keyed by `key`; does not advance this generator.
  static Rng derive(std::uint64_t seed, std::uint64_t key) { return Rng(mix_seed(seed, key)); }
  static Rng derive(std::uint64_t seed, std::string_view key) { return Rng(mix_seed(seed, fnv1a(key))); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Standard normal via Box-Muller (one value per call, the pair's sine half is dropped).
  double normal();

  /// Index drawn from unnormalized non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  /// Fisher-Yates, back to front.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace strictnas
