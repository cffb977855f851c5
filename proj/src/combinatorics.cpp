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

#include <mpfr.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "strictnas/fairness.hpp"

namespace strictnas {

namespace {

void check_equal_count_args(int m, std::int64_t n) {
  if (m < 2) throw std::invalid_argument("equal-count probability needs m >= 2, got " + std::to_string(m));
  if (n < m) throw std::invalid_argument("equal-count probability needs n >= m");
  if (n % m != 0) {
    throw std::invalid_argument("n=" + std::to_string(n) + " is not divisible by m=" + std::to_string(m));
  }
}

}  // namespace

double to_double_nearest(const mpq_class& q) {
  mpfr_t x;
  mpfr_init2(x, 53);
  mpfr_set_q(x, q.get_mpq_t(), MPFR_RNDN);
  const double out = mpfr_get_d(x, MPFR_RNDN);
  mpfr_clear(x);
  return out;
}

ExactProbability equal_count_probability_exact(int m, std::int64_t n) {
  check_equal_count_args(m, n);
  const auto q = static_cast<unsigned long>(n / m);
  // Multinomial n! / (q!)^m as a product of binomials C(n - i q, q).
  mpz_class multinomial = 1;
  mpz_class binom;
  for (int i = 0; i < m - 1; ++i) {
    mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(n) - static_cast<unsigned long>(i) * q, q);
    multinomial *= binom;
  }
  mpz_class denom;
  mpz_ui_pow_ui(denom.get_mpz_t(), static_cast<unsigned long>(m), static_cast<unsigned long>(n));
  mpq_class p(multinomial, denom);
  p.canonicalize();
  const double value = to_double_nearest(p);
  return {std::move(p), value};
}

double equal_count_probability_stirling(int m, std::int64_t n) {
  check_equal_count_args(m, n);
  const double base = 2.0 * std::numbers::pi * static_cast<double>(n) / m;
  return std::sqrt(static_cast<double>(m)) / std::pow(base, 0.5 * (m - 1));
}

}  // namespace strictnas
