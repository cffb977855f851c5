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

#include "strictnas/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "strictnas/fairness.hpp"
#include "strictnas/supernet.hpp"

namespace strictnas {

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall tau: rankings differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("kendall tau needs at least 2 items");
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = (x[i] - x[j]) * (y[i] - y[j]);
      if (s > 0) {
        ++concordant;
      } else if (s < 0) {
        ++discordant;
      }
    }
  }
  const auto pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(concordant - discordant) / pairs;
}

double kendall_tau(const RankingPair& pair) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& item : pair.items) {
    x.push_back(item.oneshot);
    y.push_back(item.standalone);
  }
  return kendall_tau(x, y);
}

AccuracyGap accuracy_gap(std::span<const double> oneshot, std::span<const double> standalone) {
  if (oneshot.empty() || standalone.empty()) throw std::invalid_argument("accuracy gap needs non-empty lists");
  const auto [omin, omax] = std::minmax_element(oneshot.begin(), oneshot.end());
  const auto [smin, smax] = std::minmax_element(standalone.begin(), standalone.end());
  AccuracyGap g;
  g.oneshot_range = *omax - *omin;
  g.standalone_range = *smax - *smin;
  g.gap = std::abs(g.oneshot_range - g.standalone_range);
  return g;
}

Histogram make_histogram(std::span<const double> values, int bins) {
  if (values.empty()) throw std::invalid_argument("histogram of no values");
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  Histogram h;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.min = *lo;
  h.max = *hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (h.max - h.min) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(h.min + width * b);
  double sum = 0.0;
  for (const double v : values) {
    int b = width > 0.0 ? static_cast<int>((v - h.min) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
    sum += v;
  }
  h.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - h.mean) * (v - h.mean);
  h.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return h;
}

OneShotSample oneshot_histogram(const Supernet& net, const Dataset& data, Split split, int n_samples, int bins,
                                Rng& rng) {
  if (n_samples <= 0) throw std::invalid_argument("one-shot histogram needs n_samples > 0");
  const Batch batch = split_batch(data, split);
  OneShotSample out;
  for (int i = 0; i < n_samples; ++i) {
    out.archs.push_back(sample_uniform(net.space(), rng));
    out.accuracies.push_back(evaluate_path(net.params(), out.archs.back(), batch));
  }
  out.histogram = make_histogram(out.accuracies, bins);
  return out;
}

double SimilarityReport::mean_off_diagonal() const {
  const auto m = averaged.rows();
  if (m < 2) return 1.0;
  return (averaged.sum() - averaged.trace()) / static_cast<double>(m * (m - 1));
}

Mat<float> block_output(const ParamSet<float>& params, const Architecture& arch, int layer, const Mat<float>& batch) {
  const auto& space = params.space();
  if (layer < 0 || layer >= space.num_layers()) {
    throw std::out_of_range("layer " + std::to_string(layer) + " outside [0, " + std::to_string(space.num_layers()) + ")");
  }
  auto cache = forward(params, arch, batch, Mode::eval);
  if (layer + 1 < space.num_layers()) return std::move(cache.blocks[static_cast<std::size_t>(layer + 1)].input);
  return space.has_head() ? std::move(cache.head_input) : std::move(cache.logits);
}

namespace {

SimilarityReport similarity_from_outputs(int layer, const std::vector<Mat<float>>& outputs) {
  const auto m = static_cast<Eigen::Index>(outputs.size());
  const Eigen::Index channels = outputs.front().rows();
  SimilarityReport report;
  report.layer = layer;
  report.averaged = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index c = 0; c < channels; ++c) {
    Eigen::MatrixXd sim = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = a + 1; b < m; ++b) {
        const auto u = outputs[static_cast<std::size_t>(a)].row(c).transpose();
        const auto v = outputs[static_cast<std::size_t>(b)].row(c).transpose();
        double s = 0.0;
        if (u.squaredNorm() > 0.0f && v.squaredNorm() > 0.0f) s = cosine_similarity(u, v);
        sim(a, b) = s;
        sim(b, a) = s;
      }
    }
    report.averaged += sim;
    report.per_channel.push_back(std::move(sim));
  }
  if (channels > 0) report.averaged /= static_cast<double>(channels);
  report.averaged.diagonal().setOnes();
  return report;
}

}  // namespace

SimilarityReport cross_block_similarity(const Supernet& net, int layer, const Mat<float>& probe,
                                        const Architecture& prefix) {
  const auto& space = net.space();
  if (layer < 0 || layer >= space.num_layers()) {
    throw std::out_of_range("layer " + std::to_string(layer) + " outside [0, " + std::to_string(space.num_layers()) + ")");
  }
  Architecture path{std::vector<int>(static_cast<std::size_t>(space.num_layers()), 0)};
  for (std::size_t l = 0; l < prefix.size() && l < path.size(); ++l) path[l] = prefix[l];
  std::vector<Mat<float>> outputs;
  for (int j = 0; j < space.choices_per_layer(); ++j) {
    path[layer] = j;
    outputs.push_back(block_output(net.params(), path, layer, probe));
  }
  return similarity_from_outputs(layer, outputs);
}

SimilarityReport cross_model_similarity(std::span<const ParamSet<float>* const> models,
                                        std::span<const Architecture> paths, int layer, const Mat<float>& probe) {
  if (models.size() != paths.size() || models.empty()) throw std::invalid_argument("one path per model required");
  std::vector<Mat<float>> outputs;
  for (std::size_t j = 0; j < models.size(); ++j) outputs.push_back(block_output(*models[j], paths[j], layer, probe));
  for (const auto& o : outputs) {
    if (o.rows() != outputs.front().rows()) throw std::invalid_argument("models disagree on the layer's output width");
  }
  return similarity_from_outputs(layer, outputs);
}

std::vector<std::size_t> evenly_spaced_positions(std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  if (n == 0 || k == 0) return out;
  if (k >= n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  if (k == 1) return {(n - 1) / 2};
  for (std::size_t i = 0; i < k; ++i) {
    const auto pos = static_cast<std::size_t>(std::llround(static_cast<double>(i) * static_cast<double>(n - 1) /
                                                           static_cast<double>(k - 1)));
    if (out.empty() || out.back() != pos) out.push_back(pos);
  }
  return out;
}

std::vector<std::size_t> select_evenly_spaced(std::span<const double> values, std::size_t k) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::size_t> out;
  for (const auto pos : evenly_spaced_positions(values.size(), k)) out.push_back(order[pos]);
  return out;
}

}  // namespace strictnas
