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

#include "strictnas/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "strictnas/error.hpp"
#include "strictnas/rng.hpp"

namespace strictnas {

namespace {

using Keys = std::set<std::string>;

void check_keys(const YAML::Node& node, const std::string& where, const Keys& allowed) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigError(where.empty() ? key + ": unknown key" : where + "." + key + ": unknown key");
  }
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

template <typename T>
void read(const YAML::Node& node, const std::string& where, const std::string& key, T& out) {
  const auto v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(join(where, key) + ": invalid value '" + YAML::Dump(v) + "'");
  }
}

OpDescriptor parse_op(const YAML::Node& node, const std::string& where, int id) {
  check_keys(node, where, {"mult", "act", "bn"});
  OpDescriptor op;
  op.id = id;
  std::string mult = "1";
  std::string act = "relu";
  read(node, where, "mult", mult);
  read(node, where, "act", act);
  read(node, where, "bn", op.uses_batchnorm);
  try {
    op.hidden_multiplier = Ratio::parse(mult);
  } catch (const std::exception& e) {
    throw ConfigError(where + ".mult: " + e.what());
  }
  try {
    op.activation = parse_activation(act);
  } catch (const std::exception& e) {
    throw ConfigError(where + ".act: " + e.what());
  }
  return op;
}

std::vector<OpDescriptor> parse_row(const YAML::Node& row, const std::string& where) {
  if (!row.IsSequence()) throw ConfigError(where + ": expected a list of ops");
  std::vector<OpDescriptor> out;
  for (std::size_t j = 0; j < row.size(); ++j) {
    out.push_back(parse_op(row[j], where + "[" + std::to_string(j) + "]", static_cast<int>(j)));
  }
  return out;
}

SearchSpace parse_space(const YAML::Node& node) {
  const std::string where = "space";
  check_keys(node, where, {"layers", "choices", "widths", "width", "input_dim", "num_classes", "residual", "ops"});
  int layers = 0;
  int choices = 0;
  std::vector<int> widths;
  int width = 0;
  int input_dim = 0;
  int num_classes = 0;
  bool residual = false;
  read(node, where, "layers", layers);
  read(node, where, "choices", choices);
  read(node, where, "widths", widths);
  read(node, where, "width", width);
  read(node, where, "input_dim", input_dim);
  read(node, where, "num_classes", num_classes);
  read(node, where, "residual", residual);
  if (widths.empty()) {
    if (width <= 0 || layers <= 0) throw ConfigError("space.widths: give widths, or width with layers");
    widths.assign(static_cast<std::size_t>(layers) + 1, width);
  } else if (node["width"]) {
    throw ConfigError("space.width: conflicts with space.widths");
  }
  if (layers == 0) layers = static_cast<int>(widths.size()) - 1;
  if (static_cast<int>(widths.size()) != layers + 1) {
    throw ConfigError("space.widths: expected " + std::to_string(layers + 1) + " entries, got " +
                      std::to_string(widths.size()));
  }
  const auto ops_node = node["ops"];
  if (!ops_node || !ops_node.IsSequence() || ops_node.size() == 0) throw ConfigError("space.ops: required list");
  std::vector<std::vector<OpDescriptor>> ops;
  if (ops_node[0].IsMap()) {
    // A single row shared by every layer.
    const auto row = parse_row(ops_node, "space.ops");
    ops.assign(static_cast<std::size_t>(layers), row);
  } else {
    for (std::size_t l = 0; l < ops_node.size(); ++l) {
      ops.push_back(parse_row(ops_node[l], "space.ops[" + std::to_string(l) + "]"));
    }
  }
  if (choices == 0 && !ops.empty()) choices = static_cast<int>(ops.front().size());
  return SearchSpace(widths, choices, ops, input_dim, num_classes).with_residual(residual);
}

void parse_dataset(const YAML::Node& node, DatasetSpec& d) {
  const std::string where = "dataset";
  check_keys(node, where,
             {"generator", "path", "samples", "classes", "dim", "spread", "noise", "turns", "grid", "label_noise",
              "train_fraction", "val_fraction"});
  read(node, where, "generator", d.generator);
  std::string path;
  read(node, where, "path", path);
  if (!path.empty()) d.path = path;
  read(node, where, "samples", d.samples);
  read(node, where, "classes", d.classes);
  read(node, where, "dim", d.dim);
  read(node, where, "spread", d.spread);
  read(node, where, "noise", d.noise);
  read(node, where, "turns", d.turns);
  read(node, where, "grid", d.grid);
  read(node, where, "label_noise", d.label_noise);
  read(node, where, "train_fraction", d.train_fraction);
  read(node, where, "val_fraction", d.val_fraction);
  d.check();
}

void parse_train(const YAML::Node& node, TrainConfig& t) {
  const std::string where = "train";
  check_keys(node, where,
             {"mode", "k", "scale_lr_by_k", "epochs", "batch_size", "lr0", "momentum", "weight_decay"});
  if (node["mode"]) {
    const auto mode = node["mode"].as<std::string>();
    t.mode = parse_train_mode(mode);
  }
  read(node, where, "k", t.k);
  read(node, where, "scale_lr_by_k", t.scale_lr_by_k);
  read(node, where, "epochs", t.epochs);
  read(node, where, "batch_size", t.batch_size);
  read(node, where, "lr0", t.lr0);
  read(node, where, "momentum", t.momentum);
  read(node, where, "weight_decay", t.weight_decay);
  try {
    t.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
}

void parse_search(const YAML::Node& node, SearchConfig& s) {
  const std::string where = "search";
  check_keys(node, where,
             {"population", "generations", "mutation_ratio", "p_rm", "p_re", "p_pr", "p_m", "p_km", "select_k",
              "policy"});
  read(node, where, "population", s.population);
  read(node, where, "generations", s.generations);
  read(node, where, "mutation_ratio", s.mutation_ratio);
  read(node, where, "p_rm", s.p_rm);
  read(node, where, "p_re", s.p_re);
  read(node, where, "p_pr", s.p_pr);
  read(node, where, "p_m", s.p_m);
  read(node, where, "p_km", s.p_km);
  read(node, where, "select_k", s.select_k);
  if (const auto p = node["policy"]) {
    check_keys(p, "search.policy", {"learning_rate", "clip", "baseline_decay", "epochs"});
    read(p, "search.policy", "learning_rate", s.policy.learning_rate);
    read(p, "search.policy", "clip", s.policy.clip);
    read(p, "search.policy", "baseline_decay", s.policy.baseline_decay);
    read(p, "search.policy", "epochs", s.policy.epochs);
  }
  s.check();
}

void parse_analysis(const YAML::Node& node, AnalysisConfig& a) {
  const std::string where = "analysis";
  check_keys(node, where,
             {"samples", "bins", "probe_layer", "probe_size", "select_k", "standalone_repeats", "seeds", "methods",
              "krepeat_k"});
  read(node, where, "samples", a.samples);
  read(node, where, "bins", a.bins);
  read(node, where, "probe_layer", a.probe_layer);
  read(node, where, "probe_size", a.probe_size);
  read(node, where, "select_k", a.select_k);
  read(node, where, "standalone_repeats", a.standalone_repeats);
  read(node, where, "seeds", a.seeds);
  read(node, where, "methods", a.methods);
  read(node, where, "krepeat_k", a.krepeat_k);
  for (const auto& m : a.methods) {
    try {
      (void)parse_train_mode(m);
    } catch (const ConfigError&) {
      throw ConfigError("analysis.methods: unknown mode '" + m + "'");
    }
  }
  if (a.samples < 1) throw ConfigError("analysis.samples: must be positive");
  if (a.bins < 1) throw ConfigError("analysis.bins: must be positive");
  if (a.probe_size < 1) throw ConfigError("analysis.probe_size: must be positive");
  if (a.krepeat_k < 1) throw ConfigError("analysis.krepeat_k: must be at least 1");
}

}  // namespace

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) throw ConfigError("seed: required (set it in the config or pass --seed)");
  return *seed;
}

const SearchSpace& ExperimentConfig::require_space() const {
  if (!space) throw ConfigError("space: required");
  return *space;
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  if (!root || root.IsNull()) return c;
  check_keys(root, "", {"seed", "output_dir", "threads", "space", "dataset", "train", "search", "analysis"});
  if (root["seed"]) {
    std::uint64_t seed = 0;
    read(root, "", "seed", seed);
    c.seed = seed;
  }
  std::string out;
  read(root, "", "output_dir", out);
  if (!out.empty()) c.output_dir = out;
  read(root, "", "threads", c.threads);
  if (c.threads < 1) throw ConfigError("threads: must be at least 1");
  if (root["space"]) c.space = parse_space(root["space"]);
  if (root["dataset"]) parse_dataset(root["dataset"], c.dataset);
  if (root["train"]) parse_train(root["train"], c.train);
  if (root["search"]) parse_search(root["search"], c.search);
  if (root["analysis"]) parse_analysis(root["analysis"], c.analysis);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  if (c.seed) e << YAML::Key << "seed" << YAML::Value << *c.seed;
  e << YAML::Key << "output_dir" << YAML::Value << c.output_dir.string();
  e << YAML::Key << "threads" << YAML::Value << c.threads;
  if (c.space) {
    const auto& s = *c.space;
    e << YAML::Key << "space" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "layers" << YAML::Value << s.num_layers();
    e << YAML::Key << "choices" << YAML::Value << s.choices_per_layer();
    e << YAML::Key << "widths" << YAML::Value << YAML::Flow << s.widths();
    e << YAML::Key << "input_dim" << YAML::Value << s.input_dim();
    e << YAML::Key << "num_classes" << YAML::Value << s.num_classes();
    e << YAML::Key << "residual" << YAML::Value << s.residual();
    e << YAML::Key << "ops" << YAML::Value << YAML::BeginSeq;
    for (int l = 0; l < s.num_layers(); ++l) {
      e << YAML::BeginSeq;
      for (int j = 0; j < s.choices_per_layer(); ++j) {
        const auto& op = s.op(l, j);
        e << YAML::Flow << YAML::BeginMap << YAML::Key << "mult" << YAML::Value << op.hidden_multiplier.str()
          << YAML::Key << "act" << YAML::Value << std::string(to_string(op.activation)) << YAML::Key << "bn"
          << YAML::Value << op.uses_batchnorm << YAML::EndMap;
      }
      e << YAML::EndSeq;
    }
    e << YAML::EndSeq << YAML::EndMap;
  }
  const auto& d = c.dataset;
  e << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "generator" << YAML::Value << d.generator;
  if (d.generator == "file") e << YAML::Key << "path" << YAML::Value << d.path.string();
  e << YAML::Key << "samples" << YAML::Value << d.samples << YAML::Key << "classes" << YAML::Value << d.classes
    << YAML::Key << "dim" << YAML::Value << d.dim << YAML::Key << "spread" << YAML::Value << d.spread
    << YAML::Key << "noise" << YAML::Value << d.noise << YAML::Key << "turns" << YAML::Value << d.turns
    << YAML::Key << "grid" << YAML::Value << d.grid << YAML::Key << "label_noise" << YAML::Value << d.label_noise
    << YAML::Key << "train_fraction" << YAML::Value << d.train_fraction << YAML::Key << "val_fraction"
    << YAML::Value << d.val_fraction << YAML::EndMap;
  const auto& t = c.train;
  e << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mode" << YAML::Value << std::string(to_string(t.mode)) << YAML::Key << "k" << YAML::Value
    << t.k << YAML::Key << "scale_lr_by_k" << YAML::Value << t.scale_lr_by_k << YAML::Key << "epochs"
    << YAML::Value << t.epochs << YAML::Key << "batch_size" << YAML::Value << t.batch_size << YAML::Key << "lr0"
    << YAML::Value << t.lr0 << YAML::Key << "momentum" << YAML::Value << t.momentum << YAML::Key
    << "weight_decay" << YAML::Value << t.weight_decay << YAML::EndMap;
  const auto& s = c.search;
  e << YAML::Key << "search" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "population" << YAML::Value << s.population << YAML::Key << "generations" << YAML::Value
    << s.generations << YAML::Key << "mutation_ratio" << YAML::Value << s.mutation_ratio << YAML::Key << "p_rm"
    << YAML::Value << s.p_rm << YAML::Key << "p_re" << YAML::Value << s.p_re << YAML::Key << "p_pr"
    << YAML::Value << s.p_pr << YAML::Key << "p_m" << YAML::Value << s.p_m << YAML::Key << "p_km" << YAML::Value
    << s.p_km << YAML::Key << "select_k" << YAML::Value << s.select_k;
  e << YAML::Key << "policy" << YAML::Value << YAML::BeginMap << YAML::Key << "learning_rate" << YAML::Value
    << s.policy.learning_rate << YAML::Key << "clip" << YAML::Value << s.policy.clip << YAML::Key
    << "baseline_decay" << YAML::Value << s.policy.baseline_decay << YAML::Key << "epochs" << YAML::Value
    << s.policy.epochs << YAML::EndMap << YAML::EndMap;
  const auto& a = c.analysis;
  e << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "samples" << YAML::Value << a.samples << YAML::Key << "bins" << YAML::Value << a.bins
    << YAML::Key << "probe_layer" << YAML::Value << a.probe_layer << YAML::Key << "probe_size" << YAML::Value
    << a.probe_size << YAML::Key << "select_k" << YAML::Value << a.select_k << YAML::Key << "standalone_repeats"
    << YAML::Value << a.standalone_repeats << YAML::Key << "seeds" << YAML::Value << YAML::Flow << a.seeds
    << YAML::Key << "methods" << YAML::Value << YAML::Flow << a.methods << YAML::Key << "krepeat_k"
    << YAML::Value << a.krepeat_k << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& config) { return fnv1a(to_yaml(config)); }

TrainConfig resolved_train(const ExperimentConfig& config) {
  TrainConfig t = config.train;
  t.seed = config.require_seed();
  t.threads = config.threads;
  return t;
}

SearchConfig resolved_search(const ExperimentConfig& config) {
  SearchConfig s = config.search;
  s.seed = config.require_seed();
  s.threads = config.threads;
  return s;
}

}  // namespace strictnas
