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

#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "strictnas/commands.hpp"
#include "strictnas/error.hpp"

namespace {

// Exit codes.
constexpr int kConfigFailure = 2;
constexpr int kDiverged = 3;
constexpr int kIoFailure = 4;

void add_common(CLI::App* cmd, strictnas::CommonOptions& common) {
  cmd->add_option("--config", common.config, "YAML experiment config");
  cmd->add_option("--seed", common.seed, "global seed (overrides the config)");
  cmd->add_option("--threads", common.threads, "worker threads");
  cmd->add_option("--out", common.out, "output directory (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace strictnas;
  CLI::App app{"Fair weight-sharing architecture search toolkit"};
  app.set_version_flag("--version", std::string(STRICTNAS_VERSION));
  app.require_subcommand(1);

  CommonOptions common;

  TrainSupernetOptions train_opts;
  auto* train = app.add_subcommand("train-supernet", "train a supernet; writes train_log.csv and a checkpoint");
  add_common(train, common);
  train->add_option("--mode", train_opts.mode, "strict_fair | ef_uniform | ef_krepeat | spos");
  train->add_option("--epochs", train_opts.epochs);
  train->add_option("--k", train_opts.k, "repeat count for ef_krepeat");
  train->add_option("--scale-lr-by-k", train_opts.scale_lr_by_k, "divide the rate by k in ef_krepeat mode");
  train->add_option("--checkpoint", train_opts.checkpoint, "checkpoint base name inside the output directory");

  TrainStandaloneOptions sa_opts;
  auto* sa = app.add_subcommand("train-standalone", "train one architecture from scratch");
  add_common(sa, common);
  sa->add_option("--arch", sa_opts.arch, "comma-separated choice indices")->required();
  sa->add_option("--checkpoint", sa_opts.checkpoint, "checkpoint base name inside the output directory");

  SearchOptions search_opts;
  auto* search = app.add_subcommand("search", "evolutionary search with a trained supernet as evaluator");
  add_common(search, common);
  search->add_option("--checkpoint", search_opts.checkpoint, "supernet checkpoint base path")->required();
  search->add_option("--population", search_opts.population);
  search->add_option("--generations", search_opts.generations);

  RankOptions rank_opts;
  auto* rank = app.add_subcommand("rank", "Kendall tau of one-shot vs stand-alone accuracies");
  add_common(rank, common);
  rank->add_option("--pairs", rank_opts.pairs, "CSV with oneshot,standalone[,arch] columns; omit to run the experiment");
  rank->add_option("--method", rank_opts.method, "label for --pairs input");

  SimilarityOptions sim_opts;
  auto* sim = app.add_subcommand("similarity", "cross-block cosine similarity at one layer");
  add_common(sim, common);
  sim->add_option("--checkpoint", sim_opts.checkpoint, "supernet checkpoint base path")->required();
  sim->add_option("--layer", sim_opts.layer);
  sim->add_flag("--standalone", sim_opts.standalone, "also compare independently trained models");

  LemmaCurveOptions lemma_opts;
  auto* lemma = app.add_subcommand("lemma-curve", "probability that m choices are drawn equally often");
  add_common(lemma, common);
  lemma->add_option("--m", lemma_opts.m, "choice counts")->expected(1, -1);
  lemma->add_option("--n-max", lemma_opts.n_max, "largest draw count");

  FairnessSimOptions fair_opts;
  auto* fair = app.add_subcommand("fairness-sim", "simulate update counters under a sampler");
  add_common(fair, common);
  fair->add_option("--mode", fair_opts.mode, "strict | uniform | krepeat");
  fair->add_option("--k", fair_opts.k);
  fair->add_option("--bps", fair_opts.backprops, "back-propagations per run");
  fair->add_option("--runs", fair_opts.runs);
  fair->add_option("--layers", fair_opts.layers);
  fair->add_option("--choices", fair_opts.choices);

  ProfileOptions prof_opts;
  auto* prof = app.add_subcommand("profile", "parameter and multiply-add counts");
  add_common(prof, common);
  prof->add_option("--arch", prof_opts.archs, "architectures to profile");
  prof->add_option("--random", prof_opts.random, "also profile this many random architectures");

  ExportDatasetOptions export_opts;
  auto* exp = app.add_subcommand("export-dataset", "write the configured dataset as a binary file");
  add_common(exp, common);
  exp->add_option("--file", export_opts.file);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train_supernet(common, train_opts, std::cout);
    if (sa->parsed()) return cmd_train_standalone(common, sa_opts, std::cout);
    if (search->parsed()) return cmd_search(common, search_opts, std::cout);
    if (rank->parsed()) return cmd_rank(common, rank_opts, std::cout);
    if (sim->parsed()) return cmd_similarity(common, sim_opts, std::cout);
    if (lemma->parsed()) return cmd_lemma_curve(common, lemma_opts, std::cout);
    if (fair->parsed()) return cmd_fairness_sim(common, fair_opts, std::cout);
    if (prof->parsed()) return cmd_profile(common, prof_opts, std::cout);
    if (exp->parsed()) return cmd_export_dataset(common, export_opts, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
