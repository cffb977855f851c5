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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "strictnas/checkpoint.hpp"
#include "strictnas/commands.hpp"
#include "strictnas/config.hpp"
#include "strictnas/error.hpp"

namespace strictnas {
namespace {

namespace fs = std::filesystem;

const char* kSmall = R"(
seed: 3
space:
  layers: 2
  choices: 2
  width: 4
  input_dim: 2
  num_classes: 3
  ops:
    - {mult: 1/2, act: relu, bn: false}
    - {mult: 1, act: tanh, bn: true}
dataset:
  generator: blobs
  samples: 300
train:
  mode: strict_fair
  epochs: 1
  batch_size: 32
)";

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("strictnas_cfg_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(Config, ParsesSpaceAndSections) {
  const auto c = parse_config(kSmall);
  ASSERT_TRUE(c.seed.has_value());
  EXPECT_EQ(*c.seed, 3u);
  const auto& s = c.require_space();
  EXPECT_EQ(s.num_layers(), 2);
  EXPECT_EQ(s.choices_per_layer(), 2);
  EXPECT_EQ(s.op(1, 0).hidden_multiplier, (Ratio{1, 2}));
  EXPECT_EQ(s.op(0, 1).activation, Activation::tanh);
  EXPECT_TRUE(s.op(0, 1).uses_batchnorm);
  EXPECT_EQ(c.dataset.generator, "blobs");
  EXPECT_EQ(c.train.epochs, 1);
  EXPECT_EQ(resolved_train(c).seed, 3u);
}

TEST(Config, DefaultsFollowTheSearchSettings) {
  const auto c = parse_config("seed: 1\n");
  EXPECT_EQ(c.search.population, 64);
  EXPECT_EQ(c.search.generations, 200);
  EXPECT_DOUBLE_EQ(c.search.p_rm, 0.2);
  EXPECT_DOUBLE_EQ(c.search.p_re, 0.65);
  EXPECT_DOUBLE_EQ(c.search.p_pr, 0.15);
  EXPECT_DOUBLE_EQ(c.train.lr0, 0.045);
  EXPECT_THROW(c.require_space(), ConfigError);
  EXPECT_THROW(parse_config("threads: 2\n").require_seed(), ConfigError);
}

TEST(Config, UnknownModeNamesTheKey) {
  const auto msg = error_of("seed: 1\ntrain:\n  mode: fairest\n");
  EXPECT_NE(msg.find("train.mode"), std::string::npos) << msg;
  EXPECT_NE(msg.find("fairest"), std::string::npos) << msg;
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_NE(error_of("seed: 1\ntrain:\n  epocs: 3\n").find("train.epocs"), std::string::npos);
  EXPECT_NE(error_of("sed: 1\n").find("sed"), std::string::npos);
  EXPECT_FALSE(error_of("seed: 1\nsearch:\n  p_rm: 0.5\n").empty());
}

TEST(Config, CanonicalYamlRoundTrips) {
  const auto c = parse_config(kSmall);
  const auto text = to_yaml(c);
  EXPECT_EQ(to_yaml(parse_config(text)), text);
  EXPECT_EQ(config_hash(parse_config(text)), config_hash(c));
  auto d = c;
  d.train.epochs = 2;
  EXPECT_NE(config_hash(d), config_hash(c));
}

TEST(Config, ToyConfigLoads) {
  const auto c = load_config(fs::path(STRICTNAS_SOURCE_DIR) / "configs" / "toy.yaml");
  EXPECT_EQ(c.require_space().num_layers(), 6);
  EXPECT_EQ(c.require_space().choices_per_layer(), 4);
  EXPECT_EQ(c.analysis.seeds.size(), 5u);
  EXPECT_THROW(load_config("/nonexistent/strictnas.yaml"), IoError);
}

TEST(Commands, FormatNumberUsesNineDigits) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_DOUBLE_EQ(round9(1.0 / 3.0), 0.333333333);
}

TEST(Commands, OutputDirResolvesAgainstEnvironmentRoot) {
  const auto root = temp_dir("root");
  ::setenv(kOutputRootEnv, root.c_str(), 1);
  CommonOptions common;
  common.out = "run1";
  const auto c = parse_config("seed: 1\n");
  EXPECT_EQ(resolve_output_dir(common, c), root / "run1");
  common.out = "/tmp/absolute";
  EXPECT_EQ(resolve_output_dir(common, c), fs::path("/tmp/absolute"));
  ::unsetenv(kOutputRootEnv);
  fs::remove_all(root);
}

TEST(Commands, LemmaCurveStrictlyDecreases) {
  const auto dir = temp_dir("lemma");
  CommonOptions common;
  common.out = dir;
  std::ostringstream out;
  ASSERT_EQ(cmd_lemma_curve(common, LemmaCurveOptions{{2}, 100}, out), 0);
  std::ifstream in(dir / "lemma_curve.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "m,n,f_exact,f_stirling");
  double prev = 2.0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string m, n, f;
    std::getline(ss, m, ',');
    std::getline(ss, n, ',');
    std::getline(ss, f, ',');
    EXPECT_LT(std::stod(f), prev) << line;
    prev = std::stod(f);
    ++rows;
  }
  EXPECT_EQ(rows, 50);
  EXPECT_TRUE(fs::exists(dir / "manifest-lemma-curve.json"));
  fs::remove_all(dir);
}

TEST(Commands, RankPairsPrintsTau) {
  const auto dir = temp_dir("rank");
  {
    std::ofstream f(dir / "pairs.csv");
    f << "arch,oneshot,standalone\n";
    const int order[] = {0, 1, 3, 2, 4, 5, 6, 7, 9, 8, 10, 11, 12};
    for (int i = 0; i < 13; ++i) f << "\"" << i % 4 << "\"," << 0.5 + 0.01 * i << "," << 0.6 + 0.01 * order[i] << "\n";
  }
  CommonOptions common;
  common.out = dir / "out";
  RankOptions opts;
  opts.pairs = dir / "pairs.csv";
  std::ostringstream out;
  ASSERT_EQ(cmd_rank(common, opts, out), 0);
  EXPECT_NE(out.str().find("0.9487"), std::string::npos) << out.str();
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "rank.json"));
  EXPECT_NEAR(j["tau"].get<double>(), 0.9487, 1e-4);
  fs::remove_all(dir);
}

TEST(Commands, FairnessSimStrictAndUniform) {
  const auto dir = temp_dir("fair");
  CommonOptions common;
  common.seed = 4;
  common.out = dir / "strict";
  FairnessSimOptions opts;
  opts.backprops = 6000;
  opts.runs = 10;
  std::ostringstream out;
  ASSERT_EQ(cmd_fairness_sim(common, opts, out), 0);
  auto j = nlohmann::json::parse(slurp(dir / "strict" / "fairness.json"));
  EXPECT_EQ(j["max_variance"].get<double>(), 0.0);
  common.out = dir / "uniform";
  opts.mode = "uniform";
  ASSERT_EQ(cmd_fairness_sim(common, opts, out), 0);
  j = nlohmann::json::parse(slurp(dir / "uniform" / "fairness.json"));
  const double theory = j["uniform_variance"].get<double>();
  EXPECT_NEAR(j["mean_variance"].get<double>(), theory, 0.2 * theory);
  fs::remove_all(dir);
}

TEST(Commands, SearchRefusesCheckpointOfAnotherSpace) {
  const auto dir = temp_dir("mismatch");
  {
    std::ofstream(dir / "cfg.yaml") << kSmall;
  }
  CommonOptions common;
  common.config = dir / "cfg.yaml";
  common.out = dir / "a";
  std::ostringstream out;
  ASSERT_EQ(cmd_train_supernet(common, TrainSupernetOptions{}, out), 0);
  std::string other = kSmall;
  other.replace(other.find("width: 4"), 8, "width: 5");
  {
    std::ofstream(dir / "other.yaml") << other;
  }
  common.config = dir / "other.yaml";
  common.out = dir / "b";
  SearchOptions s;
  s.checkpoint = dir / "a" / "supernet";
  s.population = 4;
  s.generations = 1;
  try {
    cmd_search(common, s, out);
    FAIL() << "search accepted a mismatched checkpoint";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("search space"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace strictnas
