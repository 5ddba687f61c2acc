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

#include "zla/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "zla/checkpoint.hpp"
#include "zla/errors.hpp"
#include "zla/io.hpp"
#include "zla/stats.hpp"

namespace zla {

namespace fs = std::filesystem;

std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::Train: return "train";
    case SweepMode::ReferenceOnly: return "reference-only";
    case SweepMode::Analyze: return "analyze";
    case SweepMode::Probe: return "probe";
  }
  return "train";
}

SweepMode parse_sweep_mode(const std::string& text) {
  if (text == "train") return SweepMode::Train;
  if (text == "reference-only") return SweepMode::ReferenceOnly;
  if (text == "analyze") return SweepMode::Analyze;
  if (text == "probe") return SweepMode::Probe;
  throw std::invalid_argument("unknown sweep mode '" + text + "'");
}

std::string to_string(Preset preset) {
  return preset == Preset::Desk ? "desk" : "full";
}

Preset parse_preset(const std::string& text) {
  if (text == "desk") return Preset::Desk;
  if (text == "full" || text == "paper") return Preset::Full;
  throw std::invalid_argument("unknown preset '" + text + "'");
}

void SweepSpec::validate() const {
  if (alphabet_sizes.empty() || max_lens.empty() || hidden_pairs.empty() ||
      entropy_coeffs.empty() || length_penalties.empty() || seeds.empty())
    throw std::invalid_argument("sweep grids must be non-empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw std::invalid_argument("sweep seeds must be distinct");
  for (std::size_t a : alphabet_sizes)
    if (a < 2) throw std::invalid_argument("alphabet sizes must be >= 2");
  for (std::size_t l : max_lens)
    if (l == 0) throw std::invalid_argument("max_len must be positive");
  for (const auto& h : hidden_pairs)
    if (h.listener == 0 || h.speaker < h.listener)
      throw std::invalid_argument("hidden pairs need speaker >= listener > 0");
  if (permutations == 0 || mt_codes == 0 || min_successes == 0)
    throw std::invalid_argument("permutations, mt_codes and min_successes must be positive");
  if (base.n == 0) throw std::invalid_argument("n must be positive");
}

SweepSpec preset_spec(Preset preset) {
  SweepSpec spec;
  if (preset == Preset::Full) return spec;
  spec.alphabet_sizes = {5, 10, 40};
  spec.max_lens = {6, 10};
  spec.hidden_pairs = {{kDeskSpeakerHidden, kDeskListenerHidden}};
  spec.entropy_coeffs = {kDeskEntropyCoeff};
  spec.min_successes = 1;
  spec.base = desk_config();
  return spec;
}

TrainConfig desk_config() {
  TrainConfig cfg;
  cfg.n = 100;
  cfg.a = 40;
  cfg.max_len = 10;
  cfg.speaker_hidden = kDeskSpeakerHidden;
  cfg.listener_hidden = kDeskListenerHidden;
  cfg.learning_rate = kDeskLearningRate;
  cfg.entropy_coeff = kDeskEntropyCoeff;
  cfg.entropy_reduction = kDeskEntropyReduction;
  cfg.episodes = kDeskEpisodes;
  cfg.batches_per_episode = kDeskBatchesPerEpisode;
  cfg.batch_size = kDeskBatchSize;
  cfg.stop_on_success = true;
  return cfg;
}

void to_json(nlohmann::json& j, const SweepSpec& spec) {
  nlohmann::json hidden = nlohmann::json::array();
  for (const auto& h : spec.hidden_pairs) hidden.push_back({h.speaker, h.listener});
  j = nlohmann::json{
      {"alphabet_sizes", spec.alphabet_sizes},
      {"max_lens", spec.max_lens},
      {"hidden_pairs", hidden},
      {"entropy_coeffs", spec.entropy_coeffs},
      {"length_penalties", spec.length_penalties},
      {"seeds", spec.seeds},
      {"mode", to_string(spec.mode)},
      {"base", spec.base},
      {"permutations", spec.permutations},
      {"mt_codes", spec.mt_codes},
      {"min_successes", spec.min_successes},
      {"reference_seed", spec.reference_seed},
  };
  if (spec.lexicon) j["lexicon"] = spec.lexicon->string();
}

void from_json(const nlohmann::json& j, SweepSpec& spec) {
  if (!j.is_object()) throw std::invalid_argument("sweep config must be a JSON object");
  if (j.contains("base")) {
    // Start from the current base so a partial object only overrides fields.
    nlohmann::json merged = spec.base;
    merged.update(j.at("base"));
    spec.base = merged.get<TrainConfig>();
  }
  spec.alphabet_sizes = j.value("alphabet_sizes", spec.alphabet_sizes);
  spec.max_lens = j.value("max_lens", spec.max_lens);
  if (j.contains("hidden_pairs")) {
    spec.hidden_pairs.clear();
    for (const auto& p : j.at("hidden_pairs")) {
      if (!p.is_array() || p.size() != 2)
        throw std::invalid_argument("hidden_pairs entries are [speaker, listener]");
      spec.hidden_pairs.push_back({p[0].get<std::size_t>(), p[1].get<std::size_t>()});
    }
  }
  spec.entropy_coeffs = j.value("entropy_coeffs", spec.entropy_coeffs);
  spec.length_penalties = j.value("length_penalties", spec.length_penalties);
  spec.seeds = j.value("seeds", spec.seeds);
  if (j.contains("mode")) spec.mode = parse_sweep_mode(j.at("mode").get<std::string>());
  spec.permutations = j.value("permutations", spec.permutations);
  spec.mt_codes = j.value("mt_codes", spec.mt_codes);
  spec.min_successes = j.value("min_successes", spec.min_successes);
  spec.reference_seed = j.value("reference_seed", spec.reference_seed);
  if (j.contains("lexicon")) spec.lexicon = fs::path(j.at("lexicon").get<std::string>());
}

double capacity_ratio(std::size_t a, std::size_t max_len, std::size_t n) {
  return message_space_size(a, max_len) / static_cast<double>(n);
}

std::string RunKey::dir_name() const {
  return "hs" + std::to_string(hidden.speaker) + "_hl" + std::to_string(hidden.listener) +
         "_ent" + format_double(entropy_coeff) + "_alpha" + format_double(length_penalty) +
         "_seed" + std::to_string(seed);
}

namespace {

std::string cell_name(std::size_t max_len, std::size_t a) {
  return "L" + std::to_string(max_len) + "_a" + std::to_string(a);
}

std::string setting_name(std::size_t max_len, std::size_t a) {
  return "max_len=" + std::to_string(max_len) + " a=" + std::to_string(a);
}

fs::path cell_dir(const fs::path& out, std::size_t max_len, std::size_t a) {
  return out / "cells" / cell_name(max_len, a);
}

std::uint64_t cell_stream(std::size_t max_len, std::size_t a) {
  return (static_cast<std::uint64_t>(a) << 20) ^ static_cast<std::uint64_t>(max_len);
}

bool feasible(const SweepSpec& spec, std::size_t a, std::size_t max_len) {
  return capacity_ratio(a, max_len, spec.base.n) >= 1.0;
}

std::vector<RunKey> enumerate_runs(const SweepSpec& spec) {
  std::vector<RunKey> keys;
  for (std::size_t max_len : spec.max_lens)
    for (std::size_t a : spec.alphabet_sizes) {
      if (!feasible(spec, a, max_len)) continue;
      for (const auto& h : spec.hidden_pairs)
        for (double ent : spec.entropy_coeffs)
          for (double alpha : spec.length_penalties)
            for (std::uint64_t seed : spec.seeds)
              keys.push_back({a, max_len, h, ent, alpha, seed});
    }
  return keys;
}

fs::path run_dir(const fs::path& out, const RunKey& key) {
  return cell_dir(out, key.max_len, key.a) / "runs" / key.dir_name();
}

TrainConfig run_config(const SweepSpec& spec, const RunKey& key) {
  TrainConfig cfg = spec.base;
  cfg.a = key.a;
  cfg.max_len = key.max_len;
  cfg.speaker_hidden = key.hidden.speaker;
  cfg.listener_hidden = key.hidden.listener;
  cfg.entropy_coeff = key.entropy_coeff;
  cfg.length_penalty = key.length_penalty;
  cfg.seed = key.seed;
  return cfg;
}

Code load_code(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_code(in);
}

void save_code(const fs::path& path, const Code& code) {
  std::ostringstream text;
  write_code(text, code);
  write_file_atomic(path, text.str());
}

// Moves a damaged run directory aside so the run can be redone.
void quarantine(const fs::path& out, const fs::path& dir, const std::string& why) {
  const fs::path target_root = out / "quarantine";
  fs::create_directories(target_root);
  const std::string base = dir.parent_path().parent_path().filename().string() + "__" +
                           dir.filename().string();
  fs::path target = target_root / base;
  for (int k = 1; fs::exists(target); ++k)
    target = target_root / (base + "." + std::to_string(k));
  fs::rename(dir, target);
  write_file_atomic(target / "diagnostic.txt", why + "\n");
}

// A finished run directory passes every check here; anything else throws.
StoredStatus verify_run(const fs::path& dir, const TrainConfig& cfg) {
  const auto status = read_status(dir / "status");
  const Code code = load_code(dir / "code.tsv");
  if (code.n() != cfg.n || code.alphabet.size != cfg.a || code.max_len != cfg.max_len)
    throw ParseError("code.tsv does not match the run configuration", 0);
  if (fs::exists(dir / "params.ckpt")) load_tensors(dir / "params.ckpt");
  return status;
}

void analyze_run(const fs::path& dir, const TrainConfig& cfg, std::size_t permutations) {
  const Code code = load_code(dir / "code.tsv");
  Rng rng = Rng(cfg.seed).derive(3);
  write_analysis(dir, analyze_code(code, cfg.input_model(), permutations, rng));
}

struct References {
  Code oc;
  std::vector<Code> mt;
};

References ensure_references(const SweepSpec& spec, const fs::path& out, std::size_t a,
                             std::size_t max_len) {
  const fs::path dir = cell_dir(out, max_len, a) / "reference";
  fs::create_directories(dir);
  References refs;
  const fs::path oc_path = dir / "oc.tsv";
  refs.oc = optimal_code(spec.base.n, a, max_len);
  save_code(oc_path, refs.oc);
  const Rng base = Rng(spec.reference_seed).derive(cell_stream(max_len, a));
  for (std::size_t k = 0; k < spec.mt_codes; ++k) {
    const fs::path path = dir / ("mt_" + std::to_string(k + 1) + ".tsv");
    Rng rng = base.derive(k);
    Code code = monkey_typing(spec.base.n, a, max_len, rng);
    save_code(path, code);
    refs.mt.push_back(std::move(code));
  }
  return refs;
}

References load_references(const SweepSpec& spec, const fs::path& out, std::size_t a,
                           std::size_t max_len) {
  const fs::path dir = cell_dir(out, max_len, a) / "reference";
  References refs;
  refs.oc = optimal_code(spec.base.n, a, max_len);
  const Rng base = Rng(spec.reference_seed).derive(cell_stream(max_len, a));
  for (std::size_t k = 0; k < spec.mt_codes; ++k) {
    const fs::path path = dir / ("mt_" + std::to_string(k + 1) + ".tsv");
    if (fs::exists(path)) {
      refs.mt.push_back(load_code(path));
    } else {
      Rng rng = base.derive(k);
      refs.mt.push_back(monkey_typing(spec.base.n, a, max_len, rng));
    }
  }
  return refs;
}

void run_probe(const SweepSpec& spec, const fs::path& out, std::size_t a,
               std::size_t max_len, const References& refs) {
  const std::size_t n = spec.base.n;
  const std::vector<std::size_t> sizes{100, 250, 500};
  Rng rng = Rng(spec.reference_seed).derive(cell_stream(max_len, a) + 7);
  nlohmann::json j;
  const auto free = untrained_speaker_probe(sizes, 30, n, a, max_len, false, rng);
  j["speaker_free"] = {{"mean_length", free.mean_length},
                       {"std_error", free.std_error},
                       {"length_histogram", free.length_histogram}};
  if (capacity_ratio(a, max_len, n) >= 1.0) {
    const auto unique = untrained_speaker_probe(sizes, 30, n, a, max_len, true, rng);
    j["speaker_unique"] = {{"mean_length", unique.mean_length},
                           {"std_error", unique.std_error}};
    const auto oc = listener_discriminability(refs.oc, 50, 100, rng);
    j["listener"]["OC"] = {{"mean", oc.mean}, {"stddev", oc.stddev}};
    if (!refs.mt.empty()) {
      const auto mt = listener_discriminability(refs.mt.front(), 50, 100, rng);
      j["listener"]["MT"] = {{"mean", mt.mean}, {"stddev", mt.stddev}};
    }
  }
  write_file_atomic(cell_dir(out, max_len, a) / "probe.json", j.dump(2) + "\n");
}

std::vector<double> mean_curve(const std::vector<std::vector<std::size_t>>& codes,
                               std::size_t n) {
  std::vector<double> mean(n, 0.0);
  for (const auto& lengths : codes)
    for (std::size_t r = 0; r < n; ++r) mean[r] += static_cast<double>(lengths[r]);
  for (double& v : mean) v /= static_cast<double>(codes.size());
  return mean;
}

TableRow test_row(const std::string& setting, const std::string& code,
                  const std::vector<double>& lengths, const FrequencyModel& probs,
                  std::size_t permutations, Rng rng) {
  return {setting, code, randomization_test(lengths, probs.probs, permutations, rng), ""};
}

std::string alpha_label(double alpha) {
  return alpha == 0.0 ? std::string("Emergent")
                      : "Regularized (alpha=" + format_double(alpha) + ")";
}

}  // namespace

AggregateReport aggregate(const SweepSpec& spec, const fs::path& out) {
  spec.validate();
  AggregateReport report;
  report.n = spec.base.n;
  const FrequencyModel probs = spec.base.input_model();
  const Rng table_rng = Rng(spec.reference_seed).derive(0x7AB1E);
  std::uint64_t row_stream = 0;

  for (std::size_t max_len : spec.max_lens) {
    for (std::size_t a : spec.alphabet_sizes) {
      CellReport cell;
      cell.a = a;
      cell.max_len = max_len;
      cell.capacity_ratio = capacity_ratio(a, max_len, spec.base.n);
      const std::string setting = setting_name(max_len, a);
      if (cell.capacity_ratio < 1.0) {
        cell.skipped = "D < 1: the message space cannot hold " +
                       std::to_string(spec.base.n) + " distinct messages";
        report.table.push_back({setting, "all", std::nullopt, *cell.skipped});
        report.cells.push_back(std::move(cell));
        continue;
      }

      const References refs = load_references(spec, out, a, max_len);
      const auto oc_lengths = as_doubles(refs.oc.lengths());
      cell.curves.push_back({"OC", oc_lengths, 1});
      report.table.push_back(test_row(setting, "OC", oc_lengths, probs, spec.permutations,
                                      table_rng.derive(row_stream++)));
      std::vector<std::vector<std::size_t>> mt_lengths;
      for (const auto& code : refs.mt) mt_lengths.push_back(code.lengths());
      const auto mt_curve = mean_curve(mt_lengths, spec.base.n);
      cell.curves.push_back({"MT", mt_curve, mt_lengths.size()});
      report.table.push_back(test_row(setting, "MT", mt_curve, probs, spec.permutations,
                                      table_rng.derive(row_stream++)));

      for (double alpha : spec.length_penalties) {
        std::vector<std::vector<std::size_t>> successful;
        std::size_t attempted = 0;
        for (const auto& h : spec.hidden_pairs)
          for (double ent : spec.entropy_coeffs)
            for (std::uint64_t seed : spec.seeds) {
              const RunKey key{a, max_len, h, ent, alpha, seed};
              const fs::path dir = run_dir(out, key);
              if (!fs::exists(dir / "status")) continue;
              RunSummary summary{key, dir, false, 0.0, true, ""};
              try {
                const auto status = read_status(dir / "status");
                summary.success = status.success;
                summary.accuracy = status.accuracy;
                summary.reason = status.reason;
                if (status.success) successful.push_back(load_code(dir / "code.tsv").lengths());
              } catch (const std::exception& e) {
                summary.reason = std::string("unreadable: ") + e.what();
              }
              ++attempted;
              report.runs.push_back(std::move(summary));
            }
        cell.runs += attempted;
        cell.successes += successful.size();
        const std::string label = alpha_label(alpha);
        if (attempted == 0) continue;
        if (successful.size() < spec.min_successes) {
          report.table.push_back({setting, label, std::nullopt,
                                  std::to_string(successful.size()) + " of " +
                                      std::to_string(attempted) +
                                      " runs successful; below the reporting gate"});
          continue;
        }
        const auto curve = mean_curve(successful, spec.base.n);
        cell.curves.push_back({label, curve, successful.size()});
        report.table.push_back(test_row(setting, label, curve, probs, spec.permutations,
                                        table_rng.derive(row_stream++)));
      }
      std::size_t gated = 0;
      for (const auto& c : cell.curves)
        if (c.label != "OC" && c.label != "MT") ++gated;
      cell.reported = gated > 0;
      report.cells.push_back(std::move(cell));
    }
  }

  if (spec.lexicon) {
    const auto lexicon = load_lexicon(*spec.lexicon, spec.base.n);
    const auto lengths = as_doubles(lexicon_lengths(lexicon));
    const auto model = corpus_model(lexicon);
    const std::string name = spec.lexicon->stem().string();
    report.natural = CurveSet{name, lengths, 1};
    Rng rng = table_rng.derive(row_stream++);
    TableRow row{"corpus", name, randomization_test(lengths, model.probs, spec.permutations, rng),
                 "alphabet " + std::to_string(lexicon.alphabet_size)};
    if (lexicon.warning) row.note += "; " + *lexicon.warning;
    report.table.push_back(std::move(row));
  }
  return report;
}

AggregateReport run_sweep(const SweepSpec& spec, const fs::path& out, std::size_t jobs,
                          const SweepLog& log) {
  spec.validate();
  if (jobs == 0) throw std::invalid_argument("jobs must be positive");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  {
    nlohmann::json j = spec;
    write_file_atomic(out / "sweep.json", j.dump(2) + "\n");
  }
  std::mutex log_mutex;
  auto say = [&](const std::string& line) {
    if (!log) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    log(line);
  };

  for (std::size_t max_len : spec.max_lens)
    for (std::size_t a : spec.alphabet_sizes) {
      if (!feasible(spec, a, max_len)) {
        say(cell_name(max_len, a) + ": skipped (D < 1)");
        continue;
      }
      const auto refs = ensure_references(spec, out, a, max_len);
      if (spec.mode == SweepMode::Probe) {
        say(cell_name(max_len, a) + ": probing untrained agents");
        run_probe(spec, out, a, max_len, refs);
      }
    }

  if (spec.mode == SweepMode::Train || spec.mode == SweepMode::Analyze) {
    const auto keys = enumerate_runs(spec);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(keys.size());
    auto worker = [&]() {
      for (std::size_t k = next++; k < keys.size(); k = next++) {
        const RunKey& key = keys[k];
        const fs::path dir = run_dir(out, key);
        const TrainConfig cfg = run_config(spec, key);
        const std::string name = cell_name(key.max_len, key.a) + "/" + key.dir_name();
        try {
          bool done = false;
          if (fs::exists(dir / "status")) {
            try {
              verify_run(dir, cfg);
              done = true;
            } catch (const std::exception& e) {
              quarantine(out, dir, e.what());
              say(name + ": quarantined (" + e.what() + ")");
            }
          } else if (fs::exists(dir)) {
            fs::remove_all(dir);  // interrupted before completion
          }
          if (!done) {
            if (spec.mode == SweepMode::Analyze) continue;
            say(name + ": training");
            const auto record = train(cfg);
            save_run(dir, record);
            say(name + ": " + (record.status.success ? "success" : "failure") +
                " (accuracy " + format_double(record.evaluation.accuracy) + ")");
          } else {
            say(name + ": resumed");
          }
          if (!done || spec.mode == SweepMode::Analyze || !fs::exists(dir / "analysis.json"))
            analyze_run(dir, cfg, spec.permutations);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t threads = std::min(jobs, std::max<std::size_t>(keys.size(), 1));
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  AggregateReport report = aggregate(spec, out);
  write_file_atomic(out / "report.json", to_json(report).dump(2) + "\n");
  write_file_atomic(out / "summary.csv", summary_table(report));
  return report;
}

nlohmann::json to_json(const AggregateReport& report) {
  auto curve_json = [](const CurveSet& c) {
    return nlohmann::json{{"label", c.label}, {"codes", c.codes}, {"lengths", c.lengths}};
  };
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json cj{{"a", c.a},
                      {"max_len", c.max_len},
                      {"capacity_ratio", c.capacity_ratio},
                      {"runs", c.runs},
                      {"successes", c.successes},
                      {"reported", c.reported}};
    if (c.skipped) cj["skipped"] = *c.skipped;
    cj["curves"] = nlohmann::json::array();
    for (const auto& curve : c.curves) cj["curves"].push_back(curve_json(curve));
    cells.push_back(std::move(cj));
  }
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : report.table) {
    nlohmann::json rj{{"setting", row.setting}, {"code", row.code}, {"note", row.note}};
    if (row.test) {
      rj["E"] = row.test->observed;
      rj["left_p"] = row.test->left_p;
      rj["right_p"] = row.test->right_p;
      rj["permutations"] = row.test->permutations;
    }
    table.push_back(std::move(rj));
  }
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs)
    runs.push_back({{"a", r.key.a},
                    {"max_len", r.key.max_len},
                    {"dir", r.key.dir_name()},
                    {"success", r.success},
                    {"accuracy", r.accuracy},
                    {"reason", r.reason}});
  nlohmann::json j{{"n", report.n}, {"cells", cells}, {"table", table}, {"runs", runs}};
  if (report.natural) j["natural"] = curve_json(*report.natural);
  return j;
}

AggregateReport report_from_json(const nlohmann::json& j) {
  auto read_curve = [](const nlohmann::json& c) {
    return CurveSet{c.at("label").get<std::string>(), c.at("lengths").get<std::vector<double>>(),
                    c.at("codes").get<std::size_t>()};
  };
  AggregateReport report;
  report.n = j.at("n").get<std::size_t>();
  for (const auto& cj : j.at("cells")) {
    CellReport c;
    c.a = cj.at("a").get<std::size_t>();
    c.max_len = cj.at("max_len").get<std::size_t>();
    c.capacity_ratio = cj.at("capacity_ratio").get<double>();
    c.runs = cj.at("runs").get<std::size_t>();
    c.successes = cj.at("successes").get<std::size_t>();
    c.reported = cj.at("reported").get<bool>();
    if (cj.contains("skipped")) c.skipped = cj.at("skipped").get<std::string>();
    for (const auto& curve : cj.at("curves")) c.curves.push_back(read_curve(curve));
    report.cells.push_back(std::move(c));
  }
  for (const auto& rj : j.at("table")) {
    TableRow row{rj.at("setting").get<std::string>(), rj.at("code").get<std::string>(),
                 std::nullopt, rj.value("note", std::string())};
    if (rj.contains("E")) {
      RandTestResult t;
      t.observed = rj.at("E").get<double>();
      t.left_p = rj.at("left_p").get<double>();
      t.right_p = rj.at("right_p").get<double>();
      t.permutations = rj.at("permutations").get<std::size_t>();
      row.test = t;
    }
    report.table.push_back(std::move(row));
  }
  if (j.contains("natural")) report.natural = read_curve(j.at("natural"));
  return report;
}

std::string summary_table(const AggregateReport& report) {
  std::ostringstream out;
  CsvWriter csv(out);
  csv.row({"setting", "code", "E", "left_p", "right_p", "left_star", "right_star", "note"});
  for (const auto& row : report.table) {
    if (!row.test) {
      csv.row({row.setting, row.code, "unavailable", "unavailable", "unavailable", "", "",
               row.note});
      continue;
    }
    const auto& t = *row.test;
    csv.row({row.setting, row.code, format_double(t.observed), format_double(t.left_p),
             format_double(t.right_p), t.significantly_small() ? "*" : "",
             t.significantly_large() ? "*" : "", row.note});
  }
  return out.str();
}

double uniform_inputs_p_value(std::span<const double> emergent,
                              std::span<const double> monkey) {
  return welch_t_test(emergent, monkey);
}

}  // namespace zla
