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

#include "strictnas/commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "strictnas/analysis.hpp"
#include "strictnas/checkpoint.hpp"
#include "strictnas/error.hpp"
#include "strictnas/experiments.hpp"
#include "strictnas/fairness.hpp"

namespace strictnas {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

double round9(double value) {
  if (!std::isfinite(value)) return value;
  const auto text = format_number(value);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

ExperimentConfig resolve_config(const CommonOptions& common) {
  ExperimentConfig config = common.config ? load_config(*common.config) : ExperimentConfig{};
  if (common.seed) config.seed = *common.seed;
  if (common.threads) {
    if (*common.threads < 1) throw ConfigError("--threads: must be at least 1");
    config.threads = *common.threads;
  }
  return config;
}

fs::path resolve_output_dir(const CommonOptions& common, const ExperimentConfig& config) {
  fs::path dir = common.out ? *common.out : config.output_dir;
  if (dir.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') dir = fs::path(root) / dir;
  }
  return dir;
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Stages every artifact atomically and records it for the run manifest.
class RunRecorder {
 public:
  RunRecorder(std::string command, const ExperimentConfig& config, fs::path dir)
      : command_(std::move(command)), hash_(config_hash(config)), dir_(std::move(dir)), started_(utc_now()) {
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& contents) {
    write_file_atomic(dir_ / name, contents);
    outputs_.push_back(name);
  }

  void write_json(const std::string& name, const ordered_json& j) { write(name, j.dump(2) + "\n"); }

  void checkpoint(const std::string& base, const Supernet& net) {
    save_checkpoint(dir_ / base, net);
    outputs_.push_back(blob_path(base).string());
    outputs_.push_back(manifest_path(base).string());
  }

  void finish() {
    ordered_json m;
    m["tool"] = "strictnas";
    m["version"] = STRICTNAS_VERSION;
    m["command"] = command_;
    m["config_hash"] = hex64(hash_);
    m["started"] = started_;
    m["finished"] = utc_now();
    m["outputs"] = outputs_;
    write_file_atomic(dir_ / ("manifest-" + command_ + ".json"), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::uint64_t hash_;
  fs::path dir_;
  std::string started_;
  std::vector<std::string> outputs_;
};

ordered_json objectives_json(const Individual& ind) {
  return {{"arch", ind.arch.str()},
          {"accuracy", round9(ind.obj.accuracy)},
          {"mult_adds", ind.obj.mult_adds},
          {"params", ind.obj.params}};
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  return out + "\n";
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

void write_config_copy(RunRecorder& rec, const ExperimentConfig& config) { rec.write("config.yaml", to_yaml(config)); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool in_quotes = false;
  for (const char ch : line) {
    if (ch == '"') {
      in_quotes = !in_quotes;
    } else if (ch == ',' && !in_quotes) {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  while (begin != end && *begin == ' ') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) throw ConfigError(what + ": not a number '" + text + "'");
  return v;
}

}  // namespace

int cmd_train_supernet(const CommonOptions& common, const TrainSupernetOptions& options, std::ostream& out) {
  ExperimentConfig config = resolve_config(common);
  if (options.mode) config.train.mode = parse_train_mode(*options.mode);
  if (options.epochs) config.train.epochs = *options.epochs;
  if (options.k) config.train.k = *options.k;
  if (options.scale_lr_by_k) config.train.scale_lr_by_k = *options.scale_lr_by_k;
  const auto train = resolved_train(config);
  train.check();
  const auto& space = config.require_space();
  const Dataset data = make_dataset(config.dataset, train.seed);

  RunRecorder rec("train-supernet", config, resolve_output_dir(common, config));
  write_config_copy(rec, config);
  Supernet net(space, mix_seed(train.seed, fnv1a("init")), {}, {train.momentum, train.weight_decay});
  std::string csv = "epoch,step,lr,train_loss,counter_variance\n";
  train_supernet(net, data, train, [&](const EpochLog& log) {
    csv += csv_line({std::to_string(log.epoch), std::to_string(log.step), format_number(log.lr),
                     format_number(log.train_loss), format_number(log.counter_variance)});
  });
  rec.write("train_log.csv", csv);

  const auto report = counter_report(net.counters());
  std::string counters = "layer,choice,count\n";
  for (std::size_t l = 0; l < report.layers.size(); ++l) {
    for (std::size_t j = 0; j < report.layers[l].counts.size(); ++j) {
      counters += csv_line({std::to_string(l), std::to_string(j), std::to_string(report.layers[l].counts[j])});
    }
  }
  rec.write("counters.csv", counters);
  rec.checkpoint(options.checkpoint, net);
  rec.finish();
  out << "mode " << to_string(train.mode) << ", " << net.step() << " updates, " << report.total_bp
      << " back-propagations, max counter variance " << format_number(report.max_variance()) << "\n";
  return 0;
}

int cmd_train_standalone(const CommonOptions& common, const TrainStandaloneOptions& options, std::ostream& out) {
  const ExperimentConfig config = resolve_config(common);
  const auto train = resolved_train(config);
  const auto& space = config.require_space();
  const Architecture arch = Architecture::parse(options.arch);
  require_valid(space, arch);
  const Dataset data = make_dataset(config.dataset, train.seed);

  RunRecorder rec("train-standalone", config, resolve_output_dir(common, config));
  write_config_copy(rec, config);
  const auto result = train_standalone(space, arch, data, train);
  const auto cost = profile(space, arch);
  ordered_json j;
  j["arch"] = arch.str();
  j["train_accuracy"] = round9(result.train_accuracy);
  j["val_accuracy"] = round9(result.val_accuracy);
  j["test_accuracy"] = round9(result.test_accuracy);
  j["params"] = cost.params;
  j["mult_adds"] = cost.mult_adds;
  rec.write_json("standalone.json", j);
  rec.checkpoint(options.checkpoint, result.model);
  rec.finish();
  out << arch.str() << ": train " << format_number(result.train_accuracy) << ", test "
      << format_number(result.test_accuracy) << "\n";
  return 0;
}

int cmd_search(const CommonOptions& common, const SearchOptions& options, std::ostream& out) {
  ExperimentConfig config = resolve_config(common);
  if (options.population) config.search.population = *options.population;
  if (options.generations) config.search.generations = *options.generations;
  const auto search = resolved_search(config);
  search.check();
  const auto& space = config.require_space();
  const Supernet net = load_checkpoint(options.checkpoint, space);
  const Dataset data = make_dataset(config.dataset, search.seed);

  RunRecorder rec("search", config, resolve_output_dir(common, config));
  write_config_copy(rec, config);
  std::string jsonl;
  const auto result = run_search(net, data, Split::val, search, [&](const GenerationRecord& g) {
    ordered_json line;
    line["generation"] = g.generation;
    line["evaluated"] = g.evaluated;
    line["best_accuracy"] = round9(g.best_accuracy);
    ordered_json front = ordered_json::array();
    for (const auto& ind : g.front) front.push_back(objectives_json(ind));
    line["front"] = std::move(front);
    jsonl += line.dump() + "\n";
  });
  rec.write("generations.jsonl", jsonl);

  std::string evals = "generation,arch,accuracy,mult_adds,params\n";
  for (const auto& e : result.evaluations) {
    evals += csv_line({std::to_string(e.generation), quoted(e.individual.arch.str()),
                       format_number(e.individual.obj.accuracy), std::to_string(e.individual.obj.mult_adds),
                       std::to_string(e.individual.obj.params)});
  }
  rec.write("evaluations.csv", evals);

  ordered_json pareto;
  pareto["generations"] = search.generations;
  pareto["population"] = search.population;
  pareto["evaluations"] = result.evaluations.size();
  ordered_json front = ordered_json::array();
  std::string csv = "arch,accuracy,mult_adds,params\n";
  for (const auto& ind : result.front) {
    front.push_back(objectives_json(ind));
    csv += csv_line({quoted(ind.arch.str()), format_number(ind.obj.accuracy), std::to_string(ind.obj.mult_adds),
                     std::to_string(ind.obj.params)});
  }
  pareto["front"] = std::move(front);
  ordered_json population = ordered_json::array();
  for (const auto& ind : result.population) {
    auto j = objectives_json(ind);
    j["rank"] = ind.rank;
    j["crowding"] = std::isinf(ind.crowding) ? ordered_json("inf") : ordered_json(round9(ind.crowding));
    population.push_back(std::move(j));
  }
  pareto["population_final"] = std::move(population);
  rec.write_json("pareto.json", pareto);
  rec.write("pareto.csv", csv);

  ordered_json selected = ordered_json::array();
  for (const auto& ind : result.selected) selected.push_back(objectives_json(ind));
  rec.write_json("selected.json", {{"k", search.select_k}, {"models", selected}});
  rec.finish();
  out << result.evaluations.size() << " evaluations over " << search.generations << " generations, front of "
      << result.front.size() << ", " << result.selected.size() << " selected\n";
  return 0;
}

RankingExperimentConfig ranking_experiment_config(const ExperimentConfig& config) {
  RankingExperimentConfig rc{config.require_space()};
  rc.dataset = config.dataset;
  const auto base = resolved_train(config);
  for (const auto& name : config.analysis.methods) {
    RankingMethod m{name, base};
    m.train.mode = parse_train_mode(name);
    m.train.k = m.train.mode == TrainMode::ef_krepeat ? config.analysis.krepeat_k : 1;
    m.train.scale_lr_by_k = false;
    rc.methods.push_back(std::move(m));
  }
  rc.standalone = base;
  rc.standalone.mode = TrainMode::spos;
  rc.standalone.k = 1;
  rc.samples = config.analysis.samples;
  rc.select_k = config.analysis.select_k;
  rc.bins = config.analysis.bins;
  rc.standalone_repeats = config.analysis.standalone_repeats;
  rc.seeds.clear();
  rc.seeds = config.analysis.seeds;
  rc.threads = config.threads;
  return rc;
}

namespace {

int rank_pairs(const CommonOptions& common, const ExperimentConfig& config, const RankOptions& options,
               std::ostream& out) {
  std::ifstream in(*options.pairs);
  if (!in) throw IoError("cannot read pairs file " + options.pairs->string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("pairs file is empty");
  const auto header = split_csv_line(line);
  int col_arch = -1;
  int col_one = -1;
  int col_sa = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "arch") col_arch = static_cast<int>(i);
    if (header[i] == "oneshot") col_one = static_cast<int>(i);
    if (header[i] == "standalone") col_sa = static_cast<int>(i);
  }
  if (col_one < 0 || col_sa < 0) throw ConfigError("pairs file needs 'oneshot' and 'standalone' columns");
  RankingPair pair;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    const auto need = static_cast<std::size_t>(std::max({col_arch, col_one, col_sa}));
    if (cells.size() <= need) throw ConfigError("pairs file row " + std::to_string(row) + ": missing columns");
    RankedArch item;
    if (col_arch >= 0) item.arch = Architecture::parse(cells[static_cast<std::size_t>(col_arch)]);
    item.oneshot = parse_double(cells[static_cast<std::size_t>(col_one)], "row " + std::to_string(row));
    item.standalone = parse_double(cells[static_cast<std::size_t>(col_sa)], "row " + std::to_string(row));
    pair.items.push_back(std::move(item));
  }
  const double tau = kendall_tau(pair);
  RunRecorder rec("rank", config, resolve_output_dir(common, config));
  ordered_json j;
  j["method"] = options.method;
  j["tau"] = round9(tau);
  ordered_json pairs = ordered_json::array();
  std::string csv = "method,arch,oneshot,standalone\n";
  for (const auto& it : pair.items) {
    pairs.push_back({{"arch", it.arch.str()}, {"oneshot", round9(it.oneshot)}, {"standalone", round9(it.standalone)}});
    csv += csv_line({options.method, quoted(it.arch.str()), format_number(it.oneshot), format_number(it.standalone)});
  }
  j["pairs"] = std::move(pairs);
  rec.write_json("rank.json", j);
  rec.write("scatter.csv", csv);
  rec.finish();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", tau);
  out << options.method << " tau = " << buf << " (" << pair.items.size() << " items)\n";
  return 0;
}

int rank_experiment(const CommonOptions& common, const ExperimentConfig& config, std::ostream& out) {
  const auto rc = ranking_experiment_config(config);
  RunRecorder rec("rank", config, resolve_output_dir(common, config));
  write_config_copy(rec, config);
  const auto result = run_ranking_experiment(rc, [](const std::string& msg) { (void)msg; });
  ordered_json j;
  ordered_json methods = ordered_json::array();
  std::string scatter = "seed,method,arch,oneshot,standalone\n";
  std::string hist = "seed,method,bin,lower,upper,count\n";
  for (std::size_t k = 0; k < result.summary.size(); ++k) {
    const auto& s = result.summary[k];
    ordered_json m;
    m["method"] = s.name;
    m["median_tau"] = round9(s.median_tau);
    m["median_oneshot_range"] = round9(s.median_oneshot_range);
    ordered_json seeds = ordered_json::array();
    for (std::size_t i = 0; i < result.seeds.size(); ++i) {
      const auto& so = result.seeds[i];
      const auto& mo = so.methods[k];
      ordered_json pairs = ordered_json::array();
      for (const auto& it : mo.pairs.items) {
        pairs.push_back(
            {{"arch", it.arch.str()}, {"oneshot", round9(it.oneshot)}, {"standalone", round9(it.standalone)}});
        scatter += csv_line({std::to_string(config.analysis.seeds[i]), s.name, quoted(it.arch.str()),
                             format_number(it.oneshot), format_number(it.standalone)});
      }
      for (std::size_t b = 0; b < mo.histogram.counts.size(); ++b) {
        hist += csv_line({std::to_string(config.analysis.seeds[i]), s.name, std::to_string(b),
                          format_number(mo.histogram.edges[b]), format_number(mo.histogram.edges[b + 1]),
                          std::to_string(mo.histogram.counts[b])});
      }
      seeds.push_back({{"seed", config.analysis.seeds[i]},
                       {"tau", round9(mo.tau)},
                       {"oneshot_range", round9(mo.oneshot_range)},
                       {"standalone_range", round9(mo.gap.standalone_range)},
                       {"lambda", round9(mo.gap.gap)},
                       {"pairs", std::move(pairs)}});
    }
    m["seeds"] = std::move(seeds);
    methods.push_back(std::move(m));
  }
  j["methods"] = std::move(methods);
  rec.write_json("rank.json", j);
  rec.write("scatter.csv", scatter);
  rec.write("histogram.csv", hist);
  rec.finish();
  for (const auto& s : result.summary) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-12s median tau %.4f  median one-shot range %.4f\n", s.name.c_str(), s.median_tau,
                  s.median_oneshot_range);
    out << buf;
  }
  return 0;
}

}  // namespace

int cmd_rank(const CommonOptions& common, const RankOptions& options, std::ostream& out) {
  const ExperimentConfig config = resolve_config(common);
  if (options.pairs) return rank_pairs(common, config, options, out);
  return rank_experiment(common, config, out);
}

int cmd_similarity(const CommonOptions& common, const SimilarityOptions& options, std::ostream& out) {
  const ExperimentConfig config = resolve_config(common);
  const auto train = resolved_train(config);
  const auto& space = config.require_space();
  const int layer = options.layer.value_or(config.analysis.probe_layer);
  if (layer < 0 || layer >= space.num_layers()) {
    throw ConfigError("layer: " + std::to_string(layer) + " outside [0, " + std::to_string(space.num_layers()) + ")");
  }
  const Supernet net = load_checkpoint(options.checkpoint, space);
  const Dataset data = make_dataset(config.dataset, train.seed);
  const auto n_probe = std::min<std::size_t>(static_cast<std::size_t>(config.analysis.probe_size), data.train.size());
  const Batch probe = make_batch(data, std::span<const int>(data.train).subspan(0, n_probe));

  RunRecorder rec("similarity", config, resolve_output_dir(common, config));
  write_config_copy(rec, config);
  std::string csv = "source,layer,channel,i,j,cosine\n";
  auto emit = [&](const std::string& source, const SimilarityReport& r) {
    for (std::size_t c = 0; c < r.per_channel.size(); ++c) {
      const auto& m = r.per_channel[c];
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
          csv += csv_line({source, std::to_string(layer), std::to_string(c), std::to_string(i), std::to_string(k),
                           format_number(m(i, k))});
        }
      }
    }
    for (Eigen::Index i = 0; i < r.averaged.rows(); ++i) {
      for (Eigen::Index k = 0; k < r.averaged.cols(); ++k) {
        csv += csv_line({source, std::to_string(layer), "mean", std::to_string(i), std::to_string(k),
                         format_number(r.averaged(i, k))});
      }
    }
  };
  const auto report = cross_block_similarity(net, layer, probe.x);
  emit("supernet", report);
  ordered_json summary;
  summary["layer"] = layer;
  summary["supernet_mean_off_diagonal"] = round9(report.mean_off_diagonal());
  out << "supernet layer " << layer << ": mean off-diagonal similarity " << format_number(report.mean_off_diagonal())
      << "\n";

  if (options.standalone) {
    // One stand-alone model per choice at `layer`; other layers take choice 0.
    std::vector<Supernet> models;
    std::vector<Architecture> paths;
    for (int j = 0; j < space.choices_per_layer(); ++j) {
      Architecture a{std::vector<int>(static_cast<std::size_t>(space.num_layers()), 0)};
      a[static_cast<std::size_t>(layer)] = j;
      TrainConfig t = train;
      t.seed = mix_seed(train.seed, static_cast<std::uint64_t>(j) + 1);
      models.push_back(train_standalone(space, a, data, t).model);
      paths.push_back(a);
    }
    std::vector<const ParamSet<float>*> ptrs;
    for (const auto& m : models) ptrs.push_back(&m.params());
    const auto sa = cross_model_similarity(ptrs, paths, layer, probe.x);
    emit("standalone", sa);
    summary["standalone_mean_off_diagonal"] = round9(sa.mean_off_diagonal());
    out << "stand-alone layer " << layer << ": mean off-diagonal similarity " << format_number(sa.mean_off_diagonal())
        << "\n";
  }
  rec.write("similarity.csv", csv);
  rec.write_json("similarity.json", summary);
  rec.finish();
  return 0;
}

int cmd_lemma_curve(const CommonOptions& common, const LemmaCurveOptions& options, std::ostream& out) {
  const ExperimentConfig config = resolve_config(common);
  std::string csv = "m,n,f_exact,f_stirling\n";
  std::size_t rows = 0;
  for (const int m : options.m) {
    if (m < 2) throw ConfigError("--m: must be at least 2");
    for (std::int64_t n = m; n <= options.n_max; n += m) {
      const auto exact = equal_count_probability_exact(m, n);
      csv += csv_line({std::to_string(m), std::to_string(n), format_number(exact.value),
                       format_number(equal_count_probability_stirling(m, n))});
      ++rows;
    }
  }
  RunRecorder rec("lemma-curve", config, resolve_output_dir(common, config));
  rec.write("lemma_curve.csv", csv);
  rec.finish();
  out << rows << " rows written to " << (rec.dir() / "lemma_curve.csv").string() << "\n";
  return 0;
}

int cmd_fairness_sim(const CommonOptions& common, const FairnessSimOptions& options, std::ostream& out) {
  const ExperimentConfig config = resolve_config(common);
  const auto seed = config.require_seed();
  SearchSpace space = [&] {
    if (config.space && !options.layers && !options.choices) return *config.space;
    const int layers = options.layers.value_or(config.space ? config.space->num_layers() : 6);
    const int choices = options.choices.value_or(config.space ? config.space->choices_per_layer() : 4);
    std::vector<OpDescriptor> row;
    for (int j = 0; j < choices; ++j) row.push_back({j, Ratio{1, 1}, Activation::relu, false});
    return SearchSpace::uniform(std::vector<int>(static_cast<std::size_t>(layers) + 1, 1), row);
  }();
  const int m = space.choices_per_layer();
  if (options.backprops <= 0) throw ConfigError("--bps: must be positive");
  if (options.runs < 1) throw ConfigError("--runs: must be at least 1");
  if (options.mode == "strict" && options.backprops % m != 0) {
    throw ConfigError("--bps: must be a multiple of the choice count in strict mode");
  }
  if (options.mode != "strict" && options.mode != "uniform" && options.mode != "krepeat") {
    throw ConfigError("--mode: unknown mode '" + options.mode + "'");
  }
  std::string csv = "run,layer,choice,count\n";
  ordered_json runs = ordered_json::array();
  double variance_sum = 0.0;
  double max_variance = 0.0;
  CounterReport last;
  for (int r = 0; r < options.runs; ++r) {
    Rng rng = Rng::derive(seed, mix_seed(fnv1a(options.mode), static_cast<std::uint64_t>(r)));
    FairnessCounters counters(space.num_layers(), m);
    if (options.mode == "strict") {
      for (std::int64_t t = 0; t < options.backprops / m; ++t) {
        for (const auto& a : sample_strict_step(space, rng).models) counters.record(a);
      }
    } else if (options.mode == "uniform") {
      for (std::int64_t t = 0; t < options.backprops; ++t) counters.record(sample_uniform(space, rng));
    } else {
      KRepeatSampler sampler(space, options.k, rng);
      for (std::int64_t t = 0; t < options.backprops; ++t) counters.record(sampler.next());
    }
    last = counter_report(counters);
    for (std::size_t l = 0; l < last.layers.size(); ++l) {
      for (std::size_t j = 0; j < last.layers[l].counts.size(); ++j) {
        csv += csv_line({std::to_string(r), std::to_string(l), std::to_string(j),
                         std::to_string(last.layers[l].counts[j])});
      }
    }
    variance_sum += last.mean_variance();
    max_variance = std::max(max_variance, last.max_variance());
    runs.push_back({{"run", r}, {"mean_variance", round9(last.mean_variance())}, {"max_variance", round9(last.max_variance())}});
  }
  const double mean_variance = variance_sum / options.runs;
  ordered_json j;
  j["mode"] = options.mode;
  j["layers"] = space.num_layers();
  j["choices"] = m;
  j["backprops"] = options.backprops;
  j["expected_count"] = round9(last.expected_count);
  j["uniform_variance"] = round9(last.uniform_variance);
  j["mean_variance"] = round9(mean_variance);
  j["max_variance"] = round9(max_variance);
  j["runs"] = std::move(runs);

  RunRecorder rec("fairness-sim", config, resolve_output_dir(common, config));
  rec.write("fairness_counts.csv", csv);
  rec.write_json("fairness.json", j);
  rec.finish();
  out << options.mode << ": n = " << options.backprops << ", expected count " << format_number(last.expected_count)
      << ", mean variance " << format_number(mean_variance) << " (uniform theory "
      << format_number(last.uniform_variance) << "), max variance " << format_number(max_variance) << "\n";
  return 0;
}

int cmd_profile(const CommonOptions& common, const ProfileOptions& options, std::ostream& out) {
  const ExperimentConfig config = resolve_config(common);
  const auto& space = config.require_space();
  std::vector<Architecture> archs;
  for (const auto& a : options.archs) archs.push_back(Architecture::parse(a));
  if (options.random > 0) {
    Rng rng = Rng::derive(config.require_seed(), "profile");
    for (int i = 0; i < options.random; ++i) archs.push_back(sample_uniform(space, rng));
  }
  std::string csv = "arch,params,mult_adds\n";
  for (const auto& a : archs) {
    const auto p = profile(space, a);
    csv += csv_line({quoted(a.str()), std::to_string(p.params), std::to_string(p.mult_adds)});
  }
  ordered_json j;
  j["layers"] = space.num_layers();
  j["choices"] = space.choices_per_layer();
  j["architectures"] = count_architectures(space).get_str();
  j["step_configurations"] = count_step_configurations(space).get_str();
  RunRecorder rec("profile", config, resolve_output_dir(common, config));
  rec.write("profile.csv", csv);
  rec.write_json("space.json", j);
  rec.finish();
  out << "search space: " << j["architectures"].get<std::string>() << " architectures, "
      << j["step_configurations"].get<std::string>() << " strict step configurations\n";
  for (const auto& a : archs) {
    const auto p = profile(space, a);
    out << a.str() << ": params " << p.params << ", mult-adds " << p.mult_adds << "\n";
  }
  return 0;
}

int cmd_export_dataset(const CommonOptions& common, const ExportDatasetOptions& options, std::ostream& out) {
  const ExperimentConfig config = resolve_config(common);
  const Dataset data = make_dataset(config.dataset, config.require_seed());
  RunRecorder rec("export-dataset", config, resolve_output_dir(common, config));
  const auto path = rec.dir() / options.file;
  auto tmp = path;
  tmp += ".tmp";
  write_dataset(tmp, data);
  fs::rename(tmp, path);
  rec.finish();
  out << data.size() << " examples, " << data.dim() << " features, " << data.num_classes << " classes -> "
      << path.string() << "\n";
  return 0;
}

}  // namespace strictnas
