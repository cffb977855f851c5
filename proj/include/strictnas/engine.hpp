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

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "strictnas/error.hpp"
#include "strictnas/rng.hpp"
#include "strictnas/search_space.hpp"

namespace strictnas {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

enum class ParamRole : std::uint8_t { weight, bias, bn_scale, bn_shift, bn_running_mean, bn_running_var };

inline bool is_trainable(ParamRole role) {
  return role != ParamRole::bn_running_mean && role != ParamRole::bn_running_var;
}

struct TensorSpec {
  std::string name;
  ParamRole role;
  int rows;
  int cols;
};

struct DenseSlots {
  int weight = -1;
  int bias = -1;
};

struct BlockSlots {
  DenseSlots fc1;
  DenseSlots fc2;
  int bn_scale = -1;
  int bn_shift = -1;
  int bn_mean = -1;
  int bn_var = -1;
  bool has_bn() const { return bn_scale >= 0; }
};

/// Tensor inventory of a supernet: shared stem, L x m choice blocks, shared
/// head. Tensor order is the checkpoint order.
class NetworkLayout {
 public:
  explicit NetworkLayout(SearchSpace space);

  const SearchSpace& space() const { return space_; }
  const std::vector<TensorSpec>& tensors() const { return tensors_; }
  const DenseSlots& stem() const { return stem_; }
  const DenseSlots& head() const { return head_; }
  const BlockSlots& block(int layer, int choice) const {
    return blocks_[static_cast<std::size_t>(layer * space_.choices_per_layer() + choice)];
  }
  /// Tensor indices owned by one choice block.
  std::vector<int> block_tensors(int layer, int choice) const;

 private:
  int add(std::string name, ParamRole role, int rows, int cols);

  SearchSpace space_;
  std::vector<TensorSpec> tensors_;
  DenseSlots stem_;
  DenseSlots head_;
  std::vector<BlockSlots> blocks_;
};

/// Named flat tensors for one layout. Biases and batch-norm vectors are n x 1.
template <typename Scalar>
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::shared_ptr<const NetworkLayout> layout) : layout_(std::move(layout)) {
    values_.reserve(layout_->tensors().size());
    for (const auto& spec : layout_->tensors()) {
      values_.push_back(Mat<Scalar>::Zero(spec.rows, spec.cols));
      if (spec.role == ParamRole::bn_scale || spec.role == ParamRole::bn_running_var) values_.back().setOnes();
    }
  }

  const NetworkLayout& layout() const { return *layout_; }
  std::shared_ptr<const NetworkLayout> layout_ptr() const { return layout_; }
  const SearchSpace& space() const { return layout_->space(); }
  std::size_t size() const { return values_.size(); }
  const TensorSpec& spec(std::size_t i) const { return layout_->tensors()[i]; }

  Mat<Scalar>& operator[](std::size_t i) { return values_[i]; }
  const Mat<Scalar>& operator[](std::size_t i) const { return values_[i]; }

  template <typename Other>
  ParamSet<Other> cast() const {
    ParamSet<Other> out(layout_);
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i].template cast<Other>();
    return out;
  }

  bool bitwise_equal(const ParamSet& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (values_[i].size() != other[i].size()) return false;
      if (std::memcmp(values_[i].data(), other[i].data(), sizeof(Scalar) * static_cast<std::size_t>(values_[i].size())) != 0) return false;
    }
    return true;
  }

 private:
  std::shared_ptr<const NetworkLayout> layout_;
  std::vector<Mat<Scalar>> values_;
};

/// Gradient accumulator with the shape of a ParamSet. Tensors never touched
/// by a backward pass stay empty, so optimizers can skip them entirely.
template <typename Scalar>
struct GradBuffer {
  std::vector<Mat<Scalar>> grads;
  int count = 0;

  GradBuffer() = default;
  explicit GradBuffer(std::size_t n) : grads(n) {}

  bool touched(std::size_t i) const { return grads[i].size() > 0; }

  template <typename Derived>
  void add(std::size_t i, const Eigen::MatrixBase<Derived>& g) {
    if (touched(i)) {
      grads[i] += g;
    } else {
      grads[i] = g;
    }
  }

  /// Adds `other` tensor by tensor; callers fix the order of calls.
  void accumulate(const GradBuffer& other) {
    for (std::size_t i = 0; i < grads.size(); ++i) {
      if (other.touched(i)) add(i, other.grads[i]);
    }
    count += other.count;
  }

  void scale(Scalar s) {
    for (auto& g : grads) g *= s;
  }

  void clear() {
    for (auto& g : grads) g.resize(0, 0);
    count = 0;
  }
};

// ---------------------------------------------------------------------------
// Element-wise pieces
// ---------------------------------------------------------------------------

template <typename Derived>
Mat<typename Derived::Scalar> activate(Activation act, const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  switch (act) {
    case Activation::relu:
      return x.cwiseMax(S(0));
    case Activation::tanh:
      return x.array().tanh().matrix();
    case Activation::identity:
      break;
  }
  return x;
}

/// dL/dx from dL/dy, given the pre-activation x and output y.
template <typename DG, typename DX, typename DY>
Mat<typename DG::Scalar> activation_backward(Activation act, const Eigen::MatrixBase<DG>& grad_out,
                                             const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
  using S = typename DG::Scalar;
  switch (act) {
    case Activation::relu:
      return (x.array() > S(0)).select(grad_out, S(0));
    case Activation::tanh:
      return (grad_out.array() * (S(1) - y.array().square())).matrix();
    case Activation::identity:
      break;
  }
  return grad_out;
}

/// Row sums accumulated in double.
template <typename Derived>
Vec<typename Derived::Scalar> row_sums(const Eigen::MatrixBase<Derived>& x) {
  return x.template cast<double>().rowwise().sum().template cast<typename Derived::Scalar>();
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

enum class Mode { train, eval };

template <typename Scalar>
struct BlockCache {
  Mat<Scalar> input;       // d_in x B
  Mat<Scalar> pre;         // W1 x + b1
  Mat<Scalar> normalized;  // batch-norm xhat (empty without bn)
  Vec<Scalar> inv_std;     // per hidden unit
  Vec<Scalar> batch_mean;  // train-mode statistics, empty in eval mode
  Vec<Scalar> batch_var;
  Mat<Scalar> act_in;      // input of the activation (pre or bn output)
  Mat<Scalar> act_out;
};

template <typename Scalar>
struct ForwardCache {
  Architecture path;
  Mode mode = Mode::eval;
  Mat<Scalar> stem_input;
  Mat<Scalar> stem_pre;
  std::vector<BlockCache<Scalar>> blocks;
  Mat<Scalar> head_input;
  Mat<Scalar> logits;  // C x B
};

namespace detail {

template <typename Scalar>
Mat<Scalar> dense(const ParamSet<Scalar>& p, const DenseSlots& s, const Mat<Scalar>& x) {
  Mat<Scalar> y = p[s.weight] * x;
  y.colwise() += p[s.bias].col(0);
  return y;
}

template <typename Scalar>
void dense_backward(const ParamSet<Scalar>& p, const DenseSlots& s, const Mat<Scalar>& x, const Mat<Scalar>& grad_y,
                    GradBuffer<Scalar>& grads, Mat<Scalar>* grad_x) {
  grads.add(s.weight, grad_y * x.transpose());
  grads.add(s.bias, row_sums(grad_y));
  if (grad_x) *grad_x = p[s.weight].transpose() * grad_y;
}

}  // namespace detail

/// Runs the single path `arch` on a d x B batch (one example per column).
/// Train mode normalizes with batch statistics and records them in the cache;
/// running statistics are not touched (see update_running_stats).
template <typename Scalar>
ForwardCache<Scalar> forward(const ParamSet<Scalar>& params, const Architecture& arch, const Mat<Scalar>& batch,
                             Mode mode) {
  const auto& layout = params.layout();
  const auto& space = layout.space();
  require_valid(space, arch);
  if (batch.rows() != space.feature_dim()) {
    throw ConfigError("forward: batch has " + std::to_string(batch.rows()) + " features, expected " +
                      std::to_string(space.feature_dim()));
  }
  ForwardCache<Scalar> cache;
  cache.path = arch;
  cache.mode = mode;
  Mat<Scalar> h;
  if (space.has_stem()) {
    cache.stem_input = batch;
    cache.stem_pre = detail::dense(params, layout.stem(), batch);
    h = cache.stem_pre.cwiseMax(Scalar(0));
  } else {
    h = batch;
  }
  cache.blocks.resize(arch.size());
  for (int l = 0; l < space.num_layers(); ++l) {
    const auto& slots = layout.block(l, arch[l]);
    const auto& op = space.op(l, arch[l]);
    auto& bc = cache.blocks[l];
    bc.input = std::move(h);
    bc.pre = detail::dense(params, slots.fc1, bc.input);
    if (slots.has_bn()) {
      Vec<Scalar> mean;
      Vec<Scalar> var;
      if (mode == Mode::train) {
        const Mat<double> pre = bc.pre.template cast<double>();
        const Eigen::VectorXd mu = pre.rowwise().mean();
        const Eigen::VectorXd sigma2 = (pre.colwise() - mu).array().square().rowwise().mean();
        mean = mu.cast<Scalar>();
        var = sigma2.cast<Scalar>();
        bc.batch_mean = mean;
        bc.batch_var = var;
      } else {
        mean = params[slots.bn_mean].col(0);
        var = params[slots.bn_var].col(0);
      }
      bc.inv_std = (var.array() + Scalar(kBatchNormEps)).rsqrt().matrix();
      bc.normalized = ((bc.pre.colwise() - mean).array().colwise() * bc.inv_std.array()).matrix();
      bc.act_in = (bc.normalized.array().colwise() * params[slots.bn_scale].col(0).array()).matrix();
      bc.act_in.colwise() += params[slots.bn_shift].col(0);
    } else {
      bc.act_in = bc.pre;
    }
    bc.act_out = activate(op.activation, bc.act_in);
    h = detail::dense(params, slots.fc2, bc.act_out);
    if (space.skips(l)) h += bc.input;
  }
  if (space.has_head()) {
    cache.head_input = std::move(h);
    cache.logits = detail::dense(params, layout.head(), cache.head_input);
  } else {
    cache.logits = std::move(h);
  }
  return cache;
}

template <typename Scalar>
Mat<Scalar> logits(const ParamSet<Scalar>& params, const Architecture& arch, const Mat<Scalar>& batch,
                   Mode mode = Mode::eval) {
  return forward(params, arch, batch, mode).logits;
}

inline void check_labels(std::span<const int> labels, Eigen::Index classes, Eigen::Index batch) {
  if (static_cast<Eigen::Index>(labels.size()) != batch) throw ConfigError("label count does not match batch size");
  for (const int y : labels) {
    if (y < 0 || y >= classes) {
      throw ConfigError("label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

/// Mean softmax cross-entropy, accumulated in double.
template <typename Scalar>
double cross_entropy(const Mat<Scalar>& logits, std::span<const int> labels) {
  check_labels(labels, logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const Eigen::VectorXd z = logits.col(b).template cast<double>();
    const double zmax = z.maxCoeff();
    const double lse = zmax + std::log((z.array() - zmax).exp().sum());
    total += lse - z(labels[b]);
  }
  return total / static_cast<double>(logits.cols());
}

/// softmax(logits) - onehot(labels), divided by the batch size.
template <typename Scalar>
Mat<Scalar> cross_entropy_grad(const Mat<Scalar>& logits, std::span<const int> labels) {
  check_labels(labels, logits.rows(), logits.cols());
  Mat<Scalar> g(logits.rows(), logits.cols());
  const double inv_b = 1.0 / static_cast<double>(logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const Eigen::VectorXd z = logits.col(b).template cast<double>();
    Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp();
    p /= p.sum();
    p(labels[b]) -= 1.0;
    g.col(b) = (p * inv_b).cast<Scalar>();
  }
  return g;
}

/// Exact gradients of the mean cross-entropy for the path in `cache`.
/// Only the stem, head and the path's blocks are touched.
template <typename Scalar>
GradBuffer<Scalar> backward(const ParamSet<Scalar>& params, const ForwardCache<Scalar>& cache,
                            std::span<const int> labels) {
  const auto& layout = params.layout();
  const auto& space = layout.space();
  GradBuffer<Scalar> grads(params.size());
  grads.count = 1;
  Mat<Scalar> g = cross_entropy_grad(cache.logits, labels);
  if (space.has_head()) {
    Mat<Scalar> gx;
    detail::dense_backward(params, layout.head(), cache.head_input, g, grads, &gx);
    g = std::move(gx);
  }
  for (int l = space.num_layers() - 1; l >= 0; --l) {
    const int choice = cache.path[l];
    const auto& slots = layout.block(l, choice);
    const auto& bc = cache.blocks[l];
    Mat<Scalar> g_act;
    detail::dense_backward(params, slots.fc2, bc.act_out, g, grads, &g_act);
    Mat<Scalar> g_u = activation_backward(space.op(l, choice).activation, g_act, bc.act_in, bc.act_out);
    Mat<Scalar> g_pre;
    if (slots.has_bn()) {
      const auto& gamma = params[slots.bn_scale];
      grads.add(slots.bn_scale, row_sums((g_u.array() * bc.normalized.array()).matrix()));
      grads.add(slots.bn_shift, row_sums(g_u));
      const Mat<Scalar> g_hat = (g_u.array().colwise() * gamma.col(0).array()).matrix();
      if (cache.mode == Mode::train) {
        const auto batch = static_cast<Scalar>(g_hat.cols());
        const Vec<Scalar> sum_g = row_sums(g_hat);
        const Vec<Scalar> sum_gx = row_sums((g_hat.array() * bc.normalized.array()).matrix());
        Mat<Scalar> t = g_hat * batch;
        t.colwise() -= sum_g;
        t -= (bc.normalized.array().colwise() * sum_gx.array()).matrix();
        g_pre = ((t.array().colwise() * bc.inv_std.array()) / batch).matrix();
      } else {
        g_pre = (g_hat.array().colwise() * bc.inv_std.array()).matrix();
      }
    } else {
      g_pre = std::move(g_u);
    }
    Mat<Scalar> gx;
    const bool need_input_grad = l > 0 || space.has_stem();
    detail::dense_backward(params, slots.fc1, bc.input, g_pre, grads, need_input_grad ? &gx : static_cast<Mat<Scalar>*>(nullptr));
    if (need_input_grad && space.skips(l)) gx += g;
    g = std::move(gx);
  }
  if (space.has_stem()) {
    const Mat<Scalar> g_pre = (cache.stem_pre.array() > Scalar(0)).select(g, Scalar(0));
    detail::dense_backward<Scalar>(params, layout.stem(), cache.stem_input, g_pre, grads, nullptr);
  }
  return grads;
}

/// Folds the cached batch statistics of the path's batch-norm layers into
/// their running estimates.
template <typename Scalar>
void update_running_stats(ParamSet<Scalar>& params, const ForwardCache<Scalar>& cache,
                          double momentum = kBatchNormMomentum) {
  if (cache.mode != Mode::train) return;
  const auto& layout = params.layout();
  for (std::size_t l = 0; l < cache.blocks.size(); ++l) {
    const auto& slots = layout.block(static_cast<int>(l), cache.path[l]);
    if (!slots.has_bn()) continue;
    const auto mu = static_cast<Scalar>(momentum);
    params[slots.bn_mean].col(0) = (Scalar(1) - mu) * params[slots.bn_mean].col(0) + mu * cache.blocks[l].batch_mean;
    params[slots.bn_var].col(0) = (Scalar(1) - mu) * params[slots.bn_var].col(0) + mu * cache.blocks[l].batch_var;
  }
}

/// Replaces the running statistics of the path's batch-norm layers with the
/// population statistics of the pooled calibration batches. Layers are
/// normalized with those pooled statistics as the data flows forward, so the
/// result depends only on the data and the trainable parameters (idempotent).
/// Returns the number of recalibrated layers.
template <typename Scalar>
int batchnorm_recalibrate(ParamSet<Scalar>& params, const Architecture& arch,
                          std::span<const Mat<Scalar>> calib_batches) {
  if (calib_batches.empty()) throw ConfigError("batch-norm recalibration needs at least one calibration batch");
  Eigen::Index total = 0;
  for (const auto& b : calib_batches) total += b.cols();
  if (total == 0) throw ConfigError("batch-norm recalibration needs at least one calibration example");
  Mat<Scalar> pooled(calib_batches.front().rows(), total);
  Eigen::Index col = 0;
  for (const auto& b : calib_batches) {
    pooled.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  const auto cache = forward(params, arch, pooled, Mode::train);
  int recalibrated = 0;
  const auto& layout = params.layout();
  for (std::size_t l = 0; l < cache.blocks.size(); ++l) {
    const auto& slots = layout.block(static_cast<int>(l), arch[l]);
    if (!slots.has_bn()) continue;
    params[slots.bn_mean].col(0) = cache.blocks[l].batch_mean;
    params[slots.bn_var].col(0) = cache.blocks[l].batch_var;
    ++recalibrated;
  }
  return recalibrated;
}

// ---------------------------------------------------------------------------
// Initialization and optimization
// ---------------------------------------------------------------------------

struct InitOptions {
  /// Test-only: every choice block of a layer gets the same draw, so all
  /// blocks of a layer compute the same function. Needs equal block shapes.
  bool identical_choice_init = false;
};

/// Kaiming-uniform gain of the nonlinearity applied to a sublayer's output.
inline double init_gain(Activation act) {
  switch (act) {
    case Activation::relu:
      return std::sqrt(2.0);
    case Activation::tanh:
      return 5.0 / 3.0;
    case Activation::identity:
      break;
  }
  return 1.0;
}

/// Kaiming-uniform weights (bound gain * sqrt(3 / fan_in)), zero biases, unit
/// batch-norm scale. fc1 uses the gain of its block's activation, the stem the
/// ReLU gain, the head gain 1 and fc2 gain 1, shrunk by 1 / sqrt(L) in blocks
/// with a shortcut so the residual sum keeps its scale. Every stem / head / (layer, choice)
/// tensor group draws from its own child stream of `seed`.
template <typename Scalar>
void initialize(ParamSet<Scalar>& params, std::uint64_t seed, const InitOptions& options = {}) {
  const auto& layout = params.layout();
  const auto& space = layout.space();
  auto fill = [&](const DenseSlots& s, double gain, Rng& rng) {
    auto& w = params[s.weight];
    const double bound = gain * std::sqrt(3.0 / static_cast<double>(w.cols()));
    // Column-major fill order; fixed regardless of Scalar.
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
    params[s.bias].setZero();
  };
  if (space.has_stem()) {
    auto rng = Rng::derive(seed, "stem");
    fill(layout.stem(), init_gain(Activation::relu), rng);
  }
  for (int l = 0; l < space.num_layers(); ++l) {
    for (int j = 0; j < space.choices_per_layer(); ++j) {
      if (options.identical_choice_init && space.hidden_width(l, j) != space.hidden_width(l, 0)) {
        throw ConfigError("identical choice init needs equal block shapes within a layer");
      }
      const auto key = mix_seed(static_cast<std::uint64_t>(l), options.identical_choice_init ? 0u : static_cast<std::uint64_t>(j));
      auto rng = Rng::derive(seed, key);
      const auto& slots = layout.block(l, j);
      fill(slots.fc1, init_gain(space.op(l, j).activation), rng);
      fill(slots.fc2, space.skips(l) ? 1.0 / std::sqrt(static_cast<double>(space.num_layers())) : 1.0, rng);
      if (slots.has_bn()) {
        params[slots.bn_scale].setOnes();
        params[slots.bn_shift].setZero();
        params[slots.bn_mean].setZero();
        params[slots.bn_var].setOnes();
      }
    }
  }
  if (space.has_head()) {
    auto rng = Rng::derive(seed, "head");
    fill(layout.head(), 1.0, rng);
  }
}

struct SgdSettings {
  double momentum = 0.9;
  double weight_decay = 4e-5;
};

/// v <- momentum v + g + weight_decay p ; p <- p - lr v, for trainable tensors
/// present in the gradient buffer. Untouched tensors keep both their values
/// and their velocity.
template <typename Scalar>
class SgdMomentum {
 public:
  SgdMomentum() = default;
  explicit SgdMomentum(SgdSettings settings) : settings_(settings) {}

  const SgdSettings& settings() const { return settings_; }
  void set_settings(SgdSettings settings) { settings_ = settings; }

  void step(ParamSet<Scalar>& params, const GradBuffer<Scalar>& grads, double lr) {
    if (grads.grads.size() != params.size()) throw ConfigError("sgd: gradient buffer shape mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!grads.touched(i)) continue;
      if (grads.grads[i].rows() != params[i].rows() || grads.grads[i].cols() != params[i].cols()) {
        throw ConfigError("sgd: gradient shape mismatch for " + params.spec(i).name);
      }
      if (!grads.grads[i].allFinite()) throw DivergenceError("non-finite gradient for " + params.spec(i).name);
    }
    if (velocity_.size() != params.size()) velocity_.resize(params.size());
    const auto mu = static_cast<Scalar>(settings_.momentum);
    const auto wd = static_cast<Scalar>(settings_.weight_decay);
    const auto rate = static_cast<Scalar>(lr);
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!grads.touched(i) || !is_trainable(params.spec(i).role)) continue;
      auto& v = velocity_[i];
      if (v.size() == 0) v = Mat<Scalar>::Zero(params[i].rows(), params[i].cols());
      v = mu * v + grads.grads[i] + wd * params[i];
      params[i] -= rate * v;
    }
  }

  const std::vector<Mat<Scalar>>& velocity() const { return velocity_; }

 private:
  SgdSettings settings_;
  std::vector<Mat<Scalar>> velocity_;
};

/// lr0 * (1 + cos(pi * step / total_steps)) / 2; throws when step > total_steps.
double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0);

}  // namespace strictnas
