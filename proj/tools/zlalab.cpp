// Copyright 2026 The zlalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// zlalab: command-line front end for sweeps, reference codes, analyses,
// probes, tables and plots.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "zla/analysis.hpp"
#include "zla/errors.hpp"
#include "zla/experiment.hpp"
#include "zla/io.hpp"
#include "zla/lexicodes.hpp"
#include "zla/plots.hpp"
#include "zla/training.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

// Invalid flag combinations discovered after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string preset = "full";
  std::vector<std::size_t> a;
  std::vector<std::size_t> max_len;
  std::vector<double> alpha;
  std::vector<std::uint64_t> seed;
  std::string out;
  std::string lexicon;
  std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset, "desk or full")
      ->check(CLI::IsMember({"desk", "full", "paper"}));
  cmd->add_option("--a", c.a, "alphabet size(s), eos included");
  cmd->add_option("--max-len", c.max_len, "maximum message length(s), eos included");
  cmd->add_option("--alpha", c.alpha, "length penalty coefficient(s)");
  cmd->add_option("--seed", c.seed, "random seed(s)");
  cmd->add_option("--out", c.out, "output path");
  cmd->add_option("--lexicon", c.lexicon, "word<TAB>frequency list")->check(CLI::ExistingFile);
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(zla::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw zla::IoError(path + ": " + e.what());
  }
}

zla::SweepSpec build_spec(const Common& c) {
  zla::SweepSpec spec = zla::preset_spec(zla::parse_preset(c.preset));
  if (!c.config.empty()) zla::from_json(read_json(c.config), spec);
  if (!c.a.empty()) spec.alphabet_sizes = c.a;
  if (!c.max_len.empty()) spec.max_lens = c.max_len;
  if (!c.alpha.empty()) spec.length_penalties = c.alpha;
  if (!c.seed.empty()) spec.seeds = c.seed;
  if (!c.lexicon.empty()) spec.lexicon = c.lexicon;
  return spec;
}

template <typename T>
T single(const std::vector<T>& values, const char* flag, T fallback) {
  if (values.empty()) return fallback;
  if (values.size() > 1) throw UsageError(std::string(flag) + " takes one value here");
  return values.front();
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    zla::write_file_atomic(out, text);
  }
}

zla::Code load_code(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw zla::IoError("cannot open " + path);
  return zla::read_code(in);
}

std::string code_text(const zla::Code& code) {
  std::ostringstream s;
  zla::write_code(s, code);
  return s.str();
}

zla::FrequencyModel input_model(const std::string& distribution, std::size_t n) {
  return distribution == "uniform" ? zla::uniform(n) : zla::power_law(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Length statistics of emergent and reference codes"};
  app.require_subcommand(1);

  Common c;
  std::string mode = "train";
  auto* sweep = app.add_subcommand("sweep", "run or resume a grid sweep");
  add_common(sweep, c);
  sweep->add_option("--mode", mode, "train, reference-only, analyze or probe")
      ->check(CLI::IsMember({"train", "reference-only", "analyze", "probe"}));

  bool verbose = false;
  auto* train = app.add_subcommand("train", "train one Speaker/Listener pair");
  add_common(train, c);
  train->add_flag("--verbose", verbose, "also log per-batch metrics");

  std::size_t n = 1000;
  std::string distribution = "power-law";
  std::string code_path;
  std::size_t permutations = zla::kDefaultPermutations;
  std::size_t window = zla::kDefaultSmoothing;
  auto* analyze = app.add_subcommand("analyze", "analyze a code file");
  add_common(analyze, c);
  analyze->add_option("--code", code_path, "code.tsv to analyze")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--permutations", permutations)->check(CLI::PositiveNumber);
  analyze->add_option("--window", window, "smoothing window")->check(CLI::PositiveNumber);
  analyze->add_option("--distribution", distribution)
      ->check(CLI::IsMember({"power-law", "uniform"}));

  std::string report_path;
  auto* plot = app.add_subcommand("plot", "draw length-vs-rank SVGs from a report");
  add_common(plot, c);
  plot->add_option("--report", report_path, "report.json")->required()->check(CLI::ExistingFile);

  auto* table = app.add_subcommand("table", "randomization-test table from a report");
  add_common(table, c);
  table->add_option("--report", report_path, "report.json")->required()->check(CLI::ExistingFile);

  bool unique = false;
  std::vector<std::size_t> hidden_sizes{100, 250, 500};
  std::size_t per_size = 30;
  auto* probe_speaker = app.add_subcommand("probe-speaker", "lengths of untrained Speakers");
  add_common(probe_speaker, c);
  probe_speaker->add_option("--n", n)->check(CLI::PositiveNumber);
  probe_speaker->add_flag("--unique", unique, "resample colliding messages");
  probe_speaker->add_option("--hidden", hidden_sizes, "Speaker hidden sizes");
  probe_speaker->add_option("--per-size", per_size, "Speakers per hidden size")
      ->check(CLI::PositiveNumber);

  std::string kind = "oc";
  std::size_t listeners = 50;
  std::size_t listener_hidden = 100;
  bool weighted = false;
  auto* probe_listener =
      app.add_subcommand("probe-listener", "hidden-state spread of untrained Listeners");
  add_common(probe_listener, c);
  probe_listener->add_option("--n", n)->check(CLI::PositiveNumber);
  probe_listener->add_option("--code", code_path, "code.tsv (overrides --kind)")
      ->check(CLI::ExistingFile);
  probe_listener->add_option("--kind", kind)->check(CLI::IsMember({"oc", "mt"}));
  probe_listener->add_option("--listeners", listeners)->check(CLI::PositiveNumber);
  probe_listener->add_option("--hidden", listener_hidden)->check(CLI::PositiveNumber);
  probe_listener->add_flag("--weighted", weighted, "weight pairs by input probability");

  bool rank_order = false;
  auto* mt = app.add_subcommand("mt", "generate a monkey-typing code");
  add_common(mt, c);
  mt->add_option("--n", n)->check(CLI::PositiveNumber);
  mt->add_flag("--rank-order", rank_order, "serve inputs most frequent first");

  auto* oc = app.add_subcommand("oc", "generate the optimal code");
  add_common(oc, c);
  oc->add_option("--n", n)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  try {
    if (sweep->parsed()) {
      auto spec = build_spec(c);
      spec.mode = zla::parse_sweep_mode(mode);
      const fs::path out = c.out.empty() ? fs::path("sweep") : fs::path(c.out);
      const auto report = zla::run_sweep(spec, out, c.jobs, [](const std::string& line) {
        std::cerr << line << '\n';
      });
      zla::make_plots(report, out / "plots");
      std::cout << zla::summary_table(report);
    } else if (train->parsed()) {
      zla::TrainConfig cfg = c.preset == "desk" ? zla::desk_config() : zla::TrainConfig{};
      if (!c.config.empty()) {
        nlohmann::json merged = cfg;
        merged.update(read_json(c.config));
        cfg = merged.get<zla::TrainConfig>();
      }
      cfg.a = single(c.a, "--a", cfg.a);
      cfg.max_len = single(c.max_len, "--max-len", cfg.max_len);
      cfg.length_penalty = single(c.alpha, "--alpha", cfg.length_penalty);
      cfg.seed = single(c.seed, "--seed", cfg.seed);
      cfg.verbose = cfg.verbose || verbose;
      const fs::path out = c.out.empty() ? fs::path("run") : fs::path(c.out);
      const auto record = zla::train(cfg, [](const zla::EpisodeMetrics& m) {
        std::cerr << "episode " << m.episode << " loss " << zla::format_double(m.loss)
                  << " length " << zla::format_double(m.mean_length) << " accuracy "
                  << zla::format_double(m.train_accuracy) << '\n';
      });
      zla::save_run(out, record);
      zla::Rng rng = zla::Rng(cfg.seed).derive(3);
      zla::write_analysis(out, zla::analyze_code(record.evaluation.code, cfg.input_model(),
                                                 zla::kDefaultPermutations, rng));
      std::cout << (record.status.success ? "success" : "failure") << " accuracy="
                << zla::format_double(record.evaluation.accuracy) << '\n';
    } else if (analyze->parsed()) {
      const auto code = load_code(code_path);
      const auto probs = input_model(distribution, code.n());
      zla::Rng rng(single(c.seed, "--seed", std::uint64_t{1}));
      const auto result = zla::analyze_code(code, probs, permutations, rng, window);
      if (c.out.empty())
        std::cout << zla::to_json(result).dump(2) << '\n';
      else
        zla::write_analysis(c.out, result);
    } else if (plot->parsed()) {
      const auto report = zla::report_from_json(read_json(report_path));
      const fs::path out = c.out.empty() ? fs::path("plots") : fs::path(c.out);
      for (const auto& path : zla::make_plots(report, out)) std::cout << path.string() << '\n';
    } else if (table->parsed()) {
      emit(c.out, zla::summary_table(zla::report_from_json(read_json(report_path))));
    } else if (probe_speaker->parsed()) {
      const std::size_t a = single(c.a, "--a", std::size_t{5});
      const std::size_t max_len = single(c.max_len, "--max-len", std::size_t{30});
      zla::Rng rng(single(c.seed, "--seed", std::uint64_t{1}));
      const auto res =
          zla::untrained_speaker_probe(hidden_sizes, per_size, n, a, max_len, unique, rng);
      const nlohmann::json j{{"a", a},
                             {"max_len", max_len},
                             {"n", n},
                             {"unique", unique},
                             {"mean_length", res.mean_length},
                             {"std_error", res.std_error},
                             {"length_histogram", res.length_histogram},
                             {"mt_length_pmf", zla::mt_length_pmf(a, max_len)}};
      emit(c.out, j.dump(2) + "\n");
    } else if (probe_listener->parsed()) {
      const std::size_t a = single(c.a, "--a", std::size_t{40});
      const std::size_t max_len = single(c.max_len, "--max-len", std::size_t{30});
      zla::Rng rng(single(c.seed, "--seed", std::uint64_t{1}));
      zla::Code code;
      if (!code_path.empty())
        code = load_code(code_path);
      else if (kind == "mt")
        code = zla::monkey_typing(n, a, max_len, rng);
      else
        code = zla::optimal_code(n, a, max_len);
      const auto probs = zla::power_law(code.n());
      const auto res = zla::listener_discriminability(code, listeners, listener_hidden, rng,
                                                      weighted ? &probs : nullptr);
      const nlohmann::json j{{"mean", res.mean},
                             {"stddev", res.stddev},
                             {"per_listener", res.per_listener}};
      emit(c.out, j.dump(2) + "\n");
    } else if (mt->parsed()) {
      const std::size_t a = single(c.a, "--a", std::size_t{40});
      const std::size_t max_len = single(c.max_len, "--max-len", std::size_t{30});
      zla::Rng rng(single(c.seed, "--seed", std::uint64_t{1}));
      emit(c.out, code_text(zla::monkey_typing(n, a, max_len, rng, {rank_order})));
    } else if (oc->parsed()) {
      const std::size_t a = single(c.a, "--a", std::size_t{40});
      const std::size_t max_len = single(c.max_len, "--max-len", std::size_t{30});
      emit(c.out, code_text(zla::optimal_code(n, a, max_len)));
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
