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

#include <filesystem>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "strictnas/engine.hpp"
#include "strictnas/rng.hpp"

namespace strictnas {

enum class Split { train, val, test };

std::string_view to_string(Split split);

/// Labeled examples stored one per column (d x N). A column-major d x N
/// matrix has the same bytes as the row-major N x d file layout.
struct Dataset {
  Mat<float> features;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;

  int dim() const { return static_cast<int>(features.rows()); }
  int size() const { return static_cast<int>(features.cols()); }
  const std::vector<int>& indices(Split split) const;
};

struct Batch {
  Mat<float> x;
  std::vector<int> y;
  int size() const { return static_cast<int>(x.cols()); }
};

Batch make_batch(const Dataset& data, std::span<const int> indices);
Batch split_batch(const Dataset& data, Split split);

/// Shuffles all indices and cuts them into train / val / test by fraction;
/// the three index sets never overlap.
void assign_splits(Dataset& data, double train_fraction, double val_fraction, Rng& rng);

/// Isotropic Gaussian clusters, one per class, centers uniform in [-spread, spread]^dim.
Dataset make_blobs(int n, int classes, int dim, double spread, double noise, Rng& rng);

/// Interleaved spiral arms in the first two coordinates; remaining
/// coordinates (dim > 2) carry pure noise.
Dataset make_spirals(int n, int classes, int dim, double turns, double noise, Rng& rng);

/// Checkerboard over a grid x grid partition of [-1, 1]^2; cell (i, j) has
/// label (i + j) mod classes. Each label is flipped to a random class with
/// probability `label_noise`.
Dataset make_xor_grid(int n, int classes, int grid, double label_noise, Rng& rng);

/// Binary file: "SNDS" magic, u32 N, u32 d, u32 C, N*d f32 row-major, N u32
/// labels; all little-endian. Splits are not stored.
void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path);

/// A generator name with its parameters, or a dataset file.
struct DatasetSpec {
  std::string generator = "spirals";  ///< blobs | spirals | xor | file
  std::filesystem::path path;         ///< used when generator == "file"
  int samples = 3000;
  int classes = 3;
  int dim = 2;
  double spread = 3.0;  ///< blobs: centre coordinates drawn from [-spread, spread]
  double noise = 0.1;
  double turns = 1.0;   ///< spirals
  int grid = 4;         ///< xor
  double label_noise = 0.0;
  double train_fraction = 0.6;
  double val_fraction = 0.2;

  void check() const;
};

/// Generates (or loads) the data and assigns the splits, all from `seed`.
Dataset make_dataset(const DatasetSpec& spec, std::uint64_t seed);

}  // namespace strictnas
