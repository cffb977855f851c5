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

#include "strictnas/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "strictnas/binary_io.hpp"

namespace strictnas {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "?";
}

const std::vector<int>& Dataset::indices(Split split) const {
  switch (split) {
    case Split::train:
      return train;
    case Split::val:
      return val;
    case Split::test:
      break;
  }
  return test;
}

Batch make_batch(const Dataset& data, std::span<const int> indices) {
  Batch batch;
  batch.x.resize(data.dim(), static_cast<Eigen::Index>(indices.size()));
  batch.y.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    batch.x.col(static_cast<Eigen::Index>(i)) = data.features.col(indices[i]);
    batch.y[i] = data.labels[static_cast<std::size_t>(indices[i])];
  }
  return batch;
}

Batch split_batch(const Dataset& data, Split split) { return make_batch(data, data.indices(split)); }

void assign_splits(Dataset& data, double train_fraction, double val_fraction, Rng& rng) {
  if (train_fraction <= 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0) {
    throw ConfigError("dataset split fractions must satisfy 0 < train, 0 <= val, train + val <= 1");
  }
  std::vector<int> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  const auto n = order.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n))));
  data.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  data.val.assign(order.begin() + static_cast<long>(n_train), order.begin() + static_cast<long>(n_train + n_val));
  data.test.assign(order.begin() + static_cast<long>(n_train + n_val), order.end());
}

namespace {

void check_generator_args(int n, int classes, int dim) {
  if (n <= 0) throw ConfigError("dataset: sample count must be positive");
  if (classes < 2) throw ConfigError("dataset: need at least 2 classes");
  if (dim < 1) throw ConfigError("dataset: dimension must be positive");
}

}  // namespace

Dataset make_blobs(int n, int classes, int dim, double spread, double noise, Rng& rng) {
  check_generator_args(n, classes, dim);
  Dataset data;
  data.num_classes = classes;
  Eigen::MatrixXd centers(dim, classes);
  for (int c = 0; c < classes; ++c) {
    for (int d = 0; d < dim; ++d) centers(d, c) = rng.uniform(-spread, spread);
  }
  data.features.resize(dim, n);
  data.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = i % classes;
    data.labels[static_cast<std::size_t>(i)] = c;
    for (int d = 0; d < dim; ++d) data.features(d, i) = static_cast<float>(centers(d, c) + noise * rng.normal());
  }
  return data;
}

Dataset make_spirals(int n, int classes, int dim, double turns, double noise, Rng& rng) {
  check_generator_args(n, classes, dim);
  if (dim < 2) throw ConfigError("spirals: dimension must be at least 2");
  Dataset data;
  data.num_classes = classes;
  data.features.resize(dim, n);
  data.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = i % classes;
    const double t = std::sqrt(rng.uniform());
    const double angle = 2.0 * std::numbers::pi * (turns * t + static_cast<double>(c) / classes);
    data.labels[static_cast<std::size_t>(i)] = c;
    data.features(0, i) = static_cast<float>(t * std::cos(angle) + noise * rng.normal());
    data.features(1, i) = static_cast<float>(t * std::sin(angle) + noise * rng.normal());
    for (int d = 2; d < dim; ++d) data.features(d, i) = static_cast<float>(noise * rng.normal());
  }
  return data;
}

Dataset make_xor_grid(int n, int classes, int grid, double label_noise, Rng& rng) {
  check_generator_args(n, classes, 2);
  if (grid < 1) throw ConfigError("xor grid: grid must be positive");
  Dataset data;
  data.num_classes = classes;
  data.features.resize(2, n);
  data.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    const int gx = std::min(grid - 1, static_cast<int>((x + 1.0) * 0.5 * grid));
    const int gy = std::min(grid - 1, static_cast<int>((y + 1.0) * 0.5 * grid));
    int label = (gx + gy) % classes;
    if (rng.uniform() < label_noise) label = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    data.features(0, i) = static_cast<float>(x);
    data.features(1, i) = static_cast<float>(y);
    data.labels[static_cast<std::size_t>(i)] = label;
  }
  return data;
}

namespace {
constexpr char kDatasetMagic[4] = {'S', 'N', 'D', 'S'};
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset " + path.string());
  out.write(kDatasetMagic, 4);
  io::write_le(out, static_cast<std::uint32_t>(data.size()));
  io::write_le(out, static_cast<std::uint32_t>(data.dim()));
  io::write_le(out, static_cast<std::uint32_t>(data.num_classes));
  for (Eigen::Index i = 0; i < data.features.size(); ++i) io::write_le(out, data.features.data()[i]);
  for (const int y : data.labels) io::write_le(out, static_cast<std::uint32_t>(y));
  if (!out) throw IoError("short write to " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kDatasetMagic, 4) != 0) throw IoError(path.string() + ": not a dataset file");
  const auto n = io::read_le<std::uint32_t>(in);
  const auto d = io::read_le<std::uint32_t>(in);
  const auto c = io::read_le<std::uint32_t>(in);
  if (d == 0 || c < 2) throw IoError(path.string() + ": invalid header");
  Dataset data;
  data.num_classes = static_cast<int>(c);
  data.features.resize(d, n);
  for (Eigen::Index i = 0; i < data.features.size(); ++i) data.features.data()[i] = io::read_le<float>(in);
  data.labels.resize(n);
  for (auto& y : data.labels) {
    const auto label = io::read_le<std::uint32_t>(in);
    if (label >= c) throw IoError(path.string() + ": label out of range");
    y = static_cast<int>(label);
  }
  return data;
}

void DatasetSpec::check() const {
  if (generator != "blobs" && generator != "spirals" && generator != "xor" && generator != "file") {
    throw ConfigError("dataset.generator: unknown generator '" + generator + "'");
  }
  if (generator == "file" && path.empty()) throw ConfigError("dataset.path: required for generator 'file'");
  if (generator != "file") {
    if (samples <= 0) throw ConfigError("dataset.samples: must be positive");
    if (classes < 2) throw ConfigError("dataset.classes: need at least 2");
    if (dim < 1) throw ConfigError("dataset.dim: must be positive");
  }
  if (train_fraction <= 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0) {
    throw ConfigError("dataset.train_fraction/val_fraction: need 0 < train, 0 <= val, train + val <= 1");
  }
}

Dataset make_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  spec.check();
  Rng gen = Rng::derive(seed, "dataset");
  Dataset data;
  if (spec.generator == "blobs") {
    data = make_blobs(spec.samples, spec.classes, spec.dim, spec.spread, spec.noise, gen);
  } else if (spec.generator == "spirals") {
    data = make_spirals(spec.samples, spec.classes, spec.dim, spec.turns, spec.noise, gen);
  } else if (spec.generator == "xor") {
    data = make_xor_grid(spec.samples, spec.classes, spec.grid, spec.label_noise, gen);
  } else {
    data = read_dataset(spec.path);
  }
  Rng split = Rng::derive(seed, "splits");
  assign_splits(data, spec.train_fraction, spec.val_fraction, split);
  return data;
}

}  // namespace strictnas
