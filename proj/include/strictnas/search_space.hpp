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

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace strictnas {

enum class Activation { relu, tanh, identity };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

/// Exact positive rational. Hidden widths are ceil(ratio * d_out) computed in
/// integers so cost objectives are bit-reproducible.
struct Ratio {
  std::int64_t num = 1;
  std::int64_t den = 1;

  /// Accepts "3", "0.25", "1/3".
  static Ratio parse(std::string_view text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::int64_t ceil_times(std::int64_t x) const { return (num * x + den - 1) / den; }
  std::string str() const;
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// One candidate operation: a two-sublayer dense block d_in -> h -> d_out with
/// h = ceil(hidden_multiplier * d_out), optional batch-norm on the hidden
/// units, and `activation` between the sublayers.
struct OpDescriptor {
  int id = 0;
  Ratio hidden_multiplier{};
  Activation activation = Activation::relu;
  bool uses_batchnorm = false;
  friend bool operator==(const OpDescriptor&, const OpDescriptor&) = default;
};

/// A length-L vector of choice indices.
struct Architecture {
  std::vector<int> choices;

  std::size_t size() const { return choices.size(); }
  int operator[](std::size_t l) const { return choices[l]; }
  int& operator[](std::size_t l) { return choices[l]; }

  /// "0,1,0,2"
  std::string str() const;
  static Architecture parse(std::string_view text);

  friend auto operator<=>(const Architecture&, const Architecture&) = default;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// L layers, each with the same m candidate blocks, plus an optional shared
/// stem (input_dim -> widths[0], ReLU) and head (widths[L] -> num_classes).
/// A zero input_dim / num_classes means the stem / head is absent. With
/// residual enabled, a block whose input and output widths match adds its
/// input to its output.
class SearchSpace {
 public:
  SearchSpace(std::vector<int> widths, int choices_per_layer, std::vector<std::vector<OpDescriptor>> ops,
              int input_dim = 0, int num_classes = 0);

  /// Every layer gets the same row of candidate ops.
  static SearchSpace uniform(std::vector<int> widths, std::vector<OpDescriptor> row, int input_dim = 0,
                             int num_classes = 0);

  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
  int choices_per_layer() const { return choices_; }
  const std::vector<int>& widths() const { return widths_; }
  const OpDescriptor& op(int layer, int choice) const { return ops_[layer][choice]; }
  int hidden_width(int layer, int choice) const;

  bool has_stem() const { return input_dim_ > 0; }
  bool has_head() const { return num_classes_ > 0; }
  int input_dim() const { return input_dim_; }
  int num_classes() const { return num_classes_; }
  /// Feature dimension the network consumes.
  int feature_dim() const { return has_stem() ? input_dim_ : widths_.front(); }
  /// Logit dimension the network produces.
  int output_dim() const { return has_head() ? num_classes_ : widths_.back(); }

  SearchSpace with_residual(bool on) const;
  bool residual() const { return residual_; }
  /// True when block `layer` carries an identity shortcut.
  bool skips(int layer) const { return residual_ && widths_[layer] == widths_[layer + 1]; }

  /// Stable 64-bit hash of the full space definition (checkpoint compatibility).
  std::uint64_t fingerprint() const;
  std::string describe() const;

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;

 private:
  std::vector<int> widths_;
  int choices_;
  std::vector<std::vector<OpDescriptor>> ops_;
  int input_dim_;
  int num_classes_;
  bool residual_ = false;
};

/// m^L.
mpz_class count_architectures(const SearchSpace& space);

/// (m!)^(L-1): unordered groups of m architectures that cover every choice of
/// every layer exactly once, i.e. the distinct outcomes of one strict step.
mpz_class count_step_configurations(const SearchSpace& space);
mpz_class count_step_configurations(int choices, int layers);

bool validate(const SearchSpace& space, const Architecture& arch);

/// Throws ConfigError naming the offending entry.
void require_valid(const SearchSpace& space, const Architecture& arch);

struct CostProfile {
  std::int64_t params = 0;
  std::int64_t mult_adds = 0;
  friend bool operator==(const CostProfile&, const CostProfile&) = default;
};

/// Analytic parameter and per-example multiply counts of one path. Activation
/// and batch-norm arithmetic are not counted as multiply-adds; batch-norm adds
/// 2h trainable parameters.
CostProfile profile(const SearchSpace& space, const Architecture& arch);

/// Parameter count of one choice block (used by cost-biased mutation).
std::int64_t block_params(const SearchSpace& space, int layer, int choice);

}  // namespace strictnas
