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

#include "strictnas/engine.hpp"

#include <numbers>

namespace strictnas {

NetworkLayout::NetworkLayout(SearchSpace space) : space_(std::move(space)) {
  if (space_.has_stem()) {
    stem_.weight = add("stem.weight", ParamRole::weight, space_.widths().front(), space_.input_dim());
    stem_.bias = add("stem.bias", ParamRole::bias, space_.widths().front(), 1);
  }
  for (int l = 0; l < space_.num_layers(); ++l) {
    const int d_in = space_.widths()[l];
    const int d_out = space_.widths()[l + 1];
    for (int j = 0; j < space_.choices_per_layer(); ++j) {
      const int h = space_.hidden_width(l, j);
      const std::string prefix = "layer" + std::to_string(l) + ".choice" + std::to_string(j) + ".";
      BlockSlots slots;
      slots.fc1.weight = add(prefix + "fc1.weight", ParamRole::weight, h, d_in);
      slots.fc1.bias = add(prefix + "fc1.bias", ParamRole::bias, h, 1);
      if (space_.op(l, j).uses_batchnorm) {
        slots.bn_scale = add(prefix + "bn.scale", ParamRole::bn_scale, h, 1);
        slots.bn_shift = add(prefix + "bn.shift", ParamRole::bn_shift, h, 1);
        slots.bn_mean = add(prefix + "bn.running_mean", ParamRole::bn_running_mean, h, 1);
        slots.bn_var = add(prefix + "bn.running_var", ParamRole::bn_running_var, h, 1);
      }
      slots.fc2.weight = add(prefix + "fc2.weight", ParamRole::weight, d_out, h);
      slots.fc2.bias = add(prefix + "fc2.bias", ParamRole::bias, d_out, 1);
      blocks_.push_back(slots);
    }
  }
  if (space_.has_head()) {
    head_.weight = add("head.weight", ParamRole::weight, space_.num_classes(), space_.widths().back());
    head_.bias = add("head.bias", ParamRole::bias, space_.num_classes(), 1);
  }
}

int NetworkLayout::add(std::string name, ParamRole role, int rows, int cols) {
  tensors_.push_back({std::move(name), role, rows, cols});
  return static_cast<int>(tensors_.size()) - 1;
}

std::vector<int> NetworkLayout::block_tensors(int layer, int choice) const {
  const auto& s = block(layer, choice);
  std::vector<int> out{s.fc1.weight, s.fc1.bias, s.fc2.weight, s.fc2.bias};
  if (s.has_bn()) out.insert(out.end(), {s.bn_scale, s.bn_shift, s.bn_mean, s.bn_var});
  return out;
}

double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0) {
  if (total_steps <= 0 || step < 0 || step > total_steps) {
    throw std::out_of_range("cosine_lr: step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) +
                            "]");
  }
  if (step == total_steps) return 0.0;
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps)));
}

}  // namespace strictnas
