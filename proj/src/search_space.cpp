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

#include "strictnas/search_space.hpp"

#include <charconv>
#include <numeric>
#include <sstream>

#include "strictnas/error.hpp"
#include "strictnas/rng.hpp"

namespace strictnas {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity" || name == "linear") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

namespace {

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Ratio Ratio::parse(std::string_view text) {
  text = trim(text);
  Ratio r;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    r.num = parse_int(trim(text.substr(0, slash)), "ratio numerator");
    r.den = parse_int(trim(text.substr(slash + 1)), "ratio denominator");
  } else if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto frac = text.substr(dot + 1);
    if (frac.size() > 9) throw ConfigError("ratio '" + std::string(text) + "' has too many decimals");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const auto whole = text.substr(0, dot);
    r.num = (whole.empty() ? 0 : parse_int(whole, "ratio")) * scale + (frac.empty() ? 0 : parse_int(frac, "ratio"));
    r.den = scale;
  } else {
    r.num = parse_int(text, "ratio");
  }
  if (r.num <= 0 || r.den <= 0) throw ConfigError("ratio '" + std::string(text) + "' must be positive");
  const auto g = std::gcd(r.num, r.den);
  r.num /= g;
  r.den /= g;
  return r;
}

std::string Ratio::str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

std::string Architecture::str() const {
  std::string out;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(choices[i]);
  }
  return out;
}

Architecture Architecture::parse(std::string_view text) {
  Architecture arch;
  text = trim(text);
  if (text.empty()) return arch;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto token = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    arch.choices.push_back(static_cast<int>(parse_int(token, "architecture index")));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return arch;
}

SearchSpace::SearchSpace(std::vector<int> widths, int choices_per_layer, std::vector<std::vector<OpDescriptor>> ops,
                         int input_dim, int num_classes)
    : widths_(std::move(widths)),
      choices_(choices_per_layer),
      ops_(std::move(ops)),
      input_dim_(input_dim),
      num_classes_(num_classes) {
  if (widths_.empty()) throw ConfigError("search space: widths must hold L+1 entries");
  for (const int w : widths_) {
    if (w <= 0) throw ConfigError("search space: widths must be positive");
  }
  if (choices_ <= 0) throw ConfigError("search space: choices must be positive");
  if (input_dim_ < 0 || num_classes_ < 0) throw ConfigError("search space: negative stem/head size");
  if (static_cast<int>(ops_.size()) != num_layers()) {
    throw ConfigError("search space: ops has " + std::to_string(ops_.size()) + " rows, expected " +
                      std::to_string(num_layers()));
  }
  for (std::size_t l = 0; l < ops_.size(); ++l) {
    if (static_cast<int>(ops_[l].size()) != choices_) {
      throw ConfigError("search space: ops[" + std::to_string(l) + "] has " + std::to_string(ops_[l].size()) +
                        " entries, expected " + std::to_string(choices_));
    }
    for (std::size_t j = 0; j < ops_[l].size(); ++j) {
      const auto& op = ops_[l][j];
      if (op.hidden_multiplier.num <= 0 || op.hidden_multiplier.den <= 0) {
        throw ConfigError("search space: ops[" + std::to_string(l) + "][" + std::to_string(j) + "].mult must be > 0");
      }
      for (std::size_t k = 0; k < j; ++k) {
        if (ops_[l][k].id == op.id) {
          throw ConfigError("search space: duplicate op id " + std::to_string(op.id) + " in layer " + std::to_string(l));
        }
      }
    }
  }
}

SearchSpace SearchSpace::uniform(std::vector<int> widths, std::vector<OpDescriptor> row, int input_dim,
                                 int num_classes) {
  const auto layers = widths.empty() ? 0 : widths.size() - 1;
  const int m = static_cast<int>(row.size());
  for (int j = 0; j < m; ++j) row[j].id = j;
  return SearchSpace(std::move(widths), m, std::vector<std::vector<OpDescriptor>>(layers, row), input_dim,
                     num_classes);
}

int SearchSpace::hidden_width(int layer, int choice) const {
  return static_cast<int>(op(layer, choice).hidden_multiplier.ceil_times(widths_[layer + 1]));
}

std::string SearchSpace::describe() const {
  std::ostringstream out;
  out << "input_dim=" << input_dim_ << ";classes=" << num_classes_ << ";choices=" << choices_ << ";widths=";
  for (const int w : widths_) out << w << ',';
  for (std::size_t l = 0; l < ops_.size(); ++l) {
    out << ";L" << l << '=';
    for (const auto& op : ops_[l]) {
      out << '{' << op.id << ',' << op.hidden_multiplier.str() << ',' << to_string(op.activation) << ','
          << op.uses_batchnorm << '}';
    }
  }
  if (residual_) out << ";residual";
  return out.str();
}

SearchSpace SearchSpace::with_residual(bool on) const {
  SearchSpace out = *this;
  out.residual_ = on;
  return out;
}

std::uint64_t SearchSpace::fingerprint() const { return fnv1a(describe()); }

mpz_class count_architectures(const SearchSpace& space) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(space.choices_per_layer()),
                static_cast<unsigned long>(space.num_layers()));
  return out;
}

mpz_class count_step_configurations(int choices, int layers) {
  if (choices <= 0 || layers < 0) throw ConfigError("count_step_configurations: invalid space");
  if (layers == 0) return 1;
  mpz_class factorial;
  mpz_fac_ui(factorial.get_mpz_t(), static_cast<unsigned long>(choices));
  mpz_class out;
  mpz_pow_ui(out.get_mpz_t(), factorial.get_mpz_t(), static_cast<unsigned long>(layers - 1));
  return out;
}

mpz_class count_step_configurations(const SearchSpace& space) {
  return count_step_configurations(space.choices_per_layer(), space.num_layers());
}

bool validate(const SearchSpace& space, const Architecture& arch) {
  if (static_cast<int>(arch.size()) != space.num_layers()) return false;
  for (const int c : arch.choices) {
    if (c < 0 || c >= space.choices_per_layer()) return false;
  }
  return true;
}

void require_valid(const SearchSpace& space, const Architecture& arch) {
  if (static_cast<int>(arch.size()) != space.num_layers()) {
    throw ConfigError("architecture '" + arch.str() + "' has length " + std::to_string(arch.size()) + ", expected " +
                      std::to_string(space.num_layers()));
  }
  for (std::size_t l = 0; l < arch.size(); ++l) {
    if (arch[l] < 0 || arch[l] >= space.choices_per_layer()) {
      throw ConfigError("architecture '" + arch.str() + "': index " + std::to_string(arch[l]) + " at layer " +
                        std::to_string(l) + " outside [0, " + std::to_string(space.choices_per_layer()) + ")");
    }
  }
}

std::int64_t block_params(const SearchSpace& space, int layer, int choice) {
  const std::int64_t d_in = space.widths()[layer];
  const std::int64_t d_out = space.widths()[layer + 1];
  const std::int64_t h = space.hidden_width(layer, choice);
  std::int64_t p = d_in * h + h + h * d_out + d_out;
  if (space.op(layer, choice).uses_batchnorm) p += 2 * h;
  return p;
}

CostProfile profile(const SearchSpace& space, const Architecture& arch) {
  require_valid(space, arch);
  CostProfile cost;
  if (space.has_stem()) {
    const std::int64_t in = space.input_dim();
    const std::int64_t out = space.widths().front();
    cost.params += in * out + out;
    cost.mult_adds += in * out;
  }
  for (int l = 0; l < space.num_layers(); ++l) {
    const std::int64_t d_in = space.widths()[l];
    const std::int64_t d_out = space.widths()[l + 1];
    const std::int64_t h = space.hidden_width(l, arch[l]);
    cost.params += block_params(space, l, arch[l]);
    cost.mult_adds += d_in * h + h * d_out;
  }
  if (space.has_head()) {
    const std::int64_t in = space.widths().back();
    const std::int64_t out = space.num_classes();
    cost.params += in * out + out;
    cost.mult_adds += in * out;
  }
  return cost;
}

}  // namespace strictnas
