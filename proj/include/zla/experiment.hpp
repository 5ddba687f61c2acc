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

// Grid sweeps over (max_len, a) cells: training or reference generation,
// resumable run directories, aggregation across seeds and per-setting
// summaries.

#ifndef ZLA_EXPERIMENT_HPP_
#define ZLA_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zla/analysis.hpp"
#include "zla/training.hpp"

namespace zla {

enum class SweepMode { Train, ReferenceOnly, Analyze, Probe };
enum class Preset { Desk, Full };

std::string to_string(SweepMode mode);
SweepMode parse_sweep_mode(const std::string& text);
std::string to_string(Preset preset);
Preset parse_preset(const std::string& text);

struct HiddenPair {
  std::size_t speaker = 250;
  std::size_t listener = 100;
};

struct SweepSpec {
  std::vector<std::size_t> alphabet_sizes{3, 5, 10, 40, 1000};
  std::vector<std::size_t> max_lens{2, 6, 11, 30};
  std::vector<HiddenPair> hidden_pairs{{100, 100}, {250, 100}, {250, 250}, {500, 250}};
  std::vector<double> entropy_coeffs{1.0, 1.5, 2.0};
  std::vector<double> length_penalties{0.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  SweepMode mode = SweepMode::Train;
  TrainConfig base;  // n, schedule and optimizer; grid fields are overwritten
  std::size_t permutations = kDefaultPermutations;
  std::size_t mt_codes = 25;
  std::size_t min_successes = 4;  // a cell is reported when it has this many
  std::uint64_t reference_seed = 2020;
  std::optional<std::filesystem::path> lexicon;

  /// Throws std::invalid_argument on empty grids or repeated seeds.
  void validate() const;
};

// Desk-scale schedule: n = 100 inputs and a reduced budget that fits a
// laptop. The smaller sample budget needs a larger step and a per-step
// (mean) entropy bonus to leave the early plateau; runs stop at the first
// successful episode.
inline constexpr std::size_t kDeskSpeakerHidden = 64;
inline constexpr std::size_t kDeskListenerHidden = 64;
inline constexpr double kDeskLearningRate = 0.01;
inline constexpr double kDeskEntropyCoeff = 0.5;
inline constexpr EntropyReduction kDeskEntropyReduction = EntropyReduction::Mean;
inline constexpr std::size_t kDeskEpisodes = 150;
inline constexpr std::size_t kDeskBatchesPerEpisode = 75;
inline constexpr std::size_t kDeskBatchSize = 512;

/// Single desk-scale run at (a = 40, max_len = 10).
TrainConfig desk_config();

SweepSpec preset_spec(Preset preset);

void to_json(nlohmann::json& j, const SweepSpec& spec);
/// Missing keys keep the values already in `spec`.
void from_json(const nlohmann::json& j, SweepSpec& spec);

/// Capacity ratio D = M / n for a cell.
double capacity_ratio(std::size_t a, std::size_t max_len, std::size_t n);

struct RunKey {
  std::size_t a = 0;
  std::size_t max_len = 0;
  HiddenPair hidden;
  double entropy_coeff = 0.0;
  double length_penalty = 0.0;
  std::uint64_t seed = 0;

  std::string dir_name() const;
};

struct RunSummary {
  RunKey key;
  std::filesystem::path dir;
  bool success = false;
  double accuracy = 0.0;
  bool resumed = false;
  std::string reason;
};

struct CurveSet {
  std::string label;
  std::vector<double> lengths;  // per rank, averaged over the contributing codes
  std::size_t codes = 0;
};

struct CellReport {
  std::size_t a = 0;
  std::size_t max_len = 0;
  double capacity_ratio = 0.0;
  std::optional<std::string> skipped;  // reason, when the cell never ran
  std::size_t runs = 0;
  std::size_t successes = 0;
  bool reported = false;  // passed the success gate
  std::vector<CurveSet> curves;  // OC, MT, then emergent per alpha
};

struct TableRow {
  std::string setting;
  std::string code;
  std::optional<RandTestResult> test;  // empty: unavailable
  std::string note;
};

struct AggregateReport {
  std::size_t n = 0;
  std::vector<CellReport> cells;
  std::vector<TableRow> table;
  std::optional<CurveSet> natural;  // corpus lengths by rank, when a lexicon was given
  std::vector<RunSummary> runs;
};

nlohmann::json to_json(const AggregateReport& report);
AggregateReport report_from_json(const nlohmann::json& j);

using SweepLog = std::function<void(const std::string&)>;

/// Executes or resumes every cell of the sweep under `out` with `jobs` worker
/// threads, then aggregates and writes report.json and summary.csv.
/// Results do not depend on `jobs`.
AggregateReport run_sweep(const SweepSpec& spec, const std::filesystem::path& out,
                          std::size_t jobs, const SweepLog& log = {});

/// Re-aggregates persisted run directories without training.
AggregateReport aggregate(const SweepSpec& spec, const std::filesystem::path& out);

/// CSV with header setting,code,E,left_p,right_p,left_star,right_star,note.
std::string summary_table(const AggregateReport& report);

/// Two-sided Welch test on per-rank lengths of emergent vs MT codes trained
/// with uniform inputs.
double uniform_inputs_p_value(std::span<const double> emergent,
                              std::span<const double> monkey);

}  // namespace zla

#endif  // ZLA_EXPERIMENT_HPP_
