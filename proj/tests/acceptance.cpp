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

// Acceptance suite: one PASS/FAIL line per criterion. Criteria can be
// selected on the command line (e.g. `zla_acceptance 1 3 8`).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "oracle.hpp"
#include "temp_dir.hpp"
#include "zla/analysis.hpp"
#include "zla/experiment.hpp"
#include "zla/io.hpp"
#include "zla/lexicodes.hpp"
#include "zla/stats.hpp"
#include "zla/training.hpp"

using namespace zla;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kOcTolerance = 0.01;
constexpr double kOcSeconds = 1.0;
constexpr std::size_t kPermutations = 100000;
constexpr double kRandomizationSeconds = 60.0;
constexpr double kMtTarget = 7.56;
constexpr double kMtTolerance = 0.5;
constexpr double kPmfAlpha = 0.001;
constexpr double kMtSeconds = 120.0;
constexpr std::size_t kGradientSeeds = 20;
constexpr double kGradientSeconds = 60.0;
constexpr double kProbeAlpha = 0.001;
constexpr double kProbeZ = 2.0;
constexpr double kProbeRankFraction = 0.9;  // share of ranks within kProbeZ SE
constexpr double kProbeSeconds = 300.0;
constexpr double kDeskSeconds = 1800.0;
constexpr double kFalsePositiveRate = 0.01;
// A calibrated two-sided test flags 1% of codes, so 200 codes see about two
// flags; the rate bound is rejected only when the count is implausible under it.
constexpr double kFalsePositiveAlpha = 0.001;
constexpr std::size_t kSyntheticCodes = 200;
constexpr std::size_t kSyntheticPermutations = 10000;
constexpr std::size_t kStripCodes = 10000;
constexpr double kEntropyTolerance = 1e-12;
constexpr std::uint64_t kSeed = 2020;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Optimal code lengths under power_law(1000).
Outcome optimal_code_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto probs = power_law(1000);
  const std::vector<std::pair<std::size_t, double>> expected{
      {5, 3.55}, {10, 2.82}, {40, 2.29}, {1000, 1.86}};
  Outcome out{true, ""};
  for (const auto& [a, e] : expected) {
    const double got = mean_length(optimal_code(1000, a, 30), probs);
    out.pass = out.pass && std::abs(got - e) <= kOcTolerance;
    out.detail += "a=" + std::to_string(a) + " E=" + fmt("%.4f", got) + " ";
  }
  const double t = seconds_since(t0);
  out.pass = out.pass && t < kOcSeconds;
  out.detail += fmt("(%.3f s)", t);
  return out;
}

// 2. Randomization test on the optimal codes and on a constant-length code.
Outcome randomization_pattern() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto probs = power_law(1000);
  Rng root(kSeed);
  Outcome out{true, ""};
  std::uint64_t stream = 0;
  for (std::size_t a : {5u, 10u, 40u, 1000u}) {
    Rng rng = root.derive(stream++);
    const auto r = randomization_test(optimal_code(1000, a, 30), probs, kPermutations, rng);
    out.pass = out.pass && r.left_p <= kSignificance && r.right_p >= 1.0 - kSignificance;
    out.detail += "a=" + std::to_string(a) + " p=" + fmt("%.2g", r.left_p) + "/" +
                  fmt("%.6f", r.right_p) + " ";
  }
  Rng rng = root.derive(stream++);
  const std::vector<double> flat(1000, 7.0);
  const auto c = randomization_test(flat, probs.probs, kPermutations, rng);
  out.pass = out.pass && c.left_p == 1.0 && c.right_p == 1.0;
  out.detail += "constant p=" + fmt("%g", c.left_p) + "/" + fmt("%g", c.right_p);
  const double t = seconds_since(t0);
  out.pass = out.pass && t < kRandomizationSeconds;
  out.detail += fmt(" (%.1f s)", t);
  return out;
}

// Mean-over-codes length curve of `count` MT codes, drawn from the streams the
// sweep uses for its reference codes.
std::vector<std::vector<std::size_t>> mt_ensemble(std::size_t n, std::size_t a, std::size_t max_len,
                                                  std::size_t count) {
  const Rng cell = Rng(kSeed).derive((static_cast<std::uint64_t>(a) << 20) ^ max_len);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng = cell.derive(k);
    out.push_back(monkey_typing(n, a, max_len, rng).lengths());
  }
  return out;
}

// 3. Monkey typing: E at a = 5, the length pmf and the a = 40 verdict.
Outcome monkey_typing_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto probs = power_law(1000);
  Outcome out{true, ""};

  double e = 0.0;
  const auto codes = mt_ensemble(1000, 5, 30, 25);
  for (const auto& l : codes) e += mean_length(as_doubles(l), probs.probs) / 25.0;
  out.pass = std::abs(e - kMtTarget) <= kMtTolerance;
  out.detail += "E(a=5)=" + fmt("%.3f", e);

  Rng typing = Rng(kSeed).derive(0x5EED);
  std::vector<double> counts(30, 0.0);
  for (int k = 0; k < 100000; ++k) counts[random_typing_message(5, 30, typing).length() - 1] += 1.0;
  const auto gof = chi_square_gof(counts, mt_length_pmf(5, 30));
  out.pass = out.pass && gof.p_value > kPmfAlpha;
  out.detail += " pmf chi2 p=" + fmt("%.3f", gof.p_value);

  std::vector<double> curve(1000, 0.0);
  for (const auto& l : mt_ensemble(1000, 40, 30, 25))
    for (std::size_t r = 0; r < 1000; ++r) curve[r] += static_cast<double>(l[r]) / 25.0;
  Rng rng = Rng(kSeed).derive(40);
  const auto t = randomization_test(curve, probs.probs, kPermutations, rng);
  out.pass = out.pass && !t.significantly_small() && !t.significantly_large();
  out.detail += " a=40 p=" + fmt("%.3f", t.left_p) + "/" + fmt("%.3f", t.right_p);

  const double s = seconds_since(t0);
  out.pass = out.pass && s < kMtSeconds;
  out.detail += fmt(" (%.1f s)", s);
  return out;
}

// 4. Assembled gradients against central differences.
Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t speaker_bad = 0, listener_bad = 0, entries = 0;
  for (std::uint64_t seed = 1; seed <= kGradientSeeds; ++seed) {
    Rng rng = Rng(kSeed).derive(seed);
    const auto sp = init_speaker<double>(5, 3, 4, 0, rng, seed % 2 == 0);
    const std::size_t rank = 1 + rng.index(5);
    const auto tr = speaker_forward(sp, rank, 4, DecodeMode::Sample, &rng);
    const double adv = rng.uniform(-2.0, 2.0);
    const double ent = rng.uniform(0.0, 1.5);
    const auto sg = speaker_backward(sp, tr, adv, ent);
    speaker_bad += oracle::check_gradient<SpeakerParams<double>>(
                       sp, sg,
                       [&](const SpeakerParams<double>& p) {
                         return oracle::speaker_objective(p, rank, tr.message, 4, adv, ent);
                       })
                       .size();

    const auto li = init_listener<double>(5, 3, 4, 0, rng);
    const auto m = random_typing_message(3, 5, rng);
    const std::size_t target = 1 + rng.index(5);
    const auto lg = listener_backward(li, m, target);
    listener_bad += oracle::check_gradient<ListenerParams<double>>(
                        li, lg.grad,
                        [&](const ListenerParams<double>& p) {
                          return oracle::listener_loss(p, m, target);
                        })
                        .size();
    sp.visit([&](const std::string&, const Matrix<double>& x) { entries += x.size(); });
    li.visit([&](const std::string&, const Matrix<double>& x) { entries += x.size(); });
  }
  const double t = seconds_since(t0);
  Outcome out;
  out.pass = speaker_bad == 0 && listener_bad == 0 && t < kGradientSeconds;
  out.detail = std::to_string(entries) + " entries, mismatches speaker=" +
               std::to_string(speaker_bad) + " listener=" + std::to_string(listener_bad) +
               fmt(" (%.1f s)", t);
  return out;
}

// 5. Untrained speakers behave like random typists.
Outcome untrained_speakers() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = 1000, a = 5, max_len = 30;
  const std::vector<std::size_t> hidden{100, 250, 500};
  Outcome out{true, ""};

  Rng rng = Rng(kSeed).derive(0x9B0BE);
  const auto free = untrained_speaker_probe(hidden, 30, n, a, max_len, false, rng);
  const auto gof = chi_square_gof(free.length_histogram, mt_length_pmf(a, max_len));
  out.pass = gof.p_value > kProbeAlpha;
  out.detail += "histogram chi2 p=" + fmt("%.3f", gof.p_value);

  const auto unique = untrained_speaker_probe(hidden, 30, n, a, max_len, true, rng);
  const auto mt = mt_ensemble(n, a, max_len, unique.lengths.size());
  std::size_t within = 0;
  std::vector<double> column(mt.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < mt.size(); ++k) column[k] = static_cast<double>(mt[k][r]);
    const auto s = summarize(column);
    const double se = std::hypot(s.std_error, unique.std_error[r]);
    if (std::abs(unique.mean_length[r] - s.mean) <= kProbeZ * se + 1e-12) ++within;
  }
  // the same comparison on E, one value per speaker / code
  const auto probs = power_law(n);
  std::vector<double> e_us, e_mt;
  for (const auto& l : unique.lengths) e_us.push_back(mean_length(as_doubles(l), probs.probs));
  for (const auto& l : mt) e_mt.push_back(mean_length(as_doubles(l), probs.probs));
  const auto su = summarize(e_us), sm = summarize(e_mt);
  const double z = (su.mean - sm.mean) / std::hypot(su.std_error, sm.std_error);
  const double fraction = static_cast<double>(within) / static_cast<double>(n);
  out.pass = out.pass && fraction >= kProbeRankFraction && std::abs(z) <= kProbeZ;
  out.detail += " unique: ranks within 2 SE=" + fmt("%.3f", fraction) + " E=" +
                fmt("%.3f", su.mean) + " vs MT " + fmt("%.3f", sm.mean) + " z=" + fmt("%.2f", z);

  const double t = seconds_since(t0);
  out.pass = out.pass && t < kProbeSeconds;
  out.detail += fmt(" (%.1f s)", t);
  return out;
}

// 6. Desk-scale training.
Outcome desk_training() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto base = desk_config();
  const auto probs = base.input_model();
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  auto run = [&](std::uint64_t seed, double alpha) {
    auto cfg = base;
    cfg.seed = seed;
    cfg.length_penalty = alpha;
    return train(cfg);
  };
  // Seeds run in waves of `workers`; once a wave contains a success the
  // criterion is met and later seeds are not needed.
  std::vector<RunRecord> plain;
  for (std::size_t start = 0; start < seeds.size(); start += workers) {
    std::vector<std::future<RunRecord>> wave;
    for (std::size_t k = start; k < std::min(seeds.size(), start + workers); ++k)
      wave.push_back(std::async(std::launch::async, run, seeds[k], 0.0));
    for (auto& f : wave) plain.push_back(f.get());
    if (std::any_of(plain.begin(), plain.end(), [](const RunRecord& r) { return r.status.success; }))
      break;
  }

  Outcome out;
  std::size_t successes = 0;
  std::size_t chosen = 0;
  bool found = false;
  for (std::size_t k = 0; k < plain.size(); ++k) {
    const auto& r = plain[k];
    const double e = mean_length(r.evaluation.code, probs);
    out.detail += "seed " + std::to_string(seeds[k]) + " acc=" +
                  fmt("%.2f", r.evaluation.accuracy) + " E=" + fmt("%.2f", e) + " after " +
                  std::to_string(r.metrics.size()) + " episodes; ";
    if (r.status.success) {
      ++successes;
      if (!found) chosen = k;
      found = true;
    }
  }
  if (plain.size() < seeds.size())
    out.detail += std::to_string(seeds.size() - plain.size()) + " seed(s) not needed; ";
  const auto penalized = run(seeds[chosen], 0.5);
  const double e0 = mean_length(plain[chosen].evaluation.code, probs);
  const double e1 = mean_length(penalized.evaluation.code, probs);
  out.detail += "alpha=0.5 seed " + std::to_string(seeds[chosen]) + " acc=" +
                fmt("%.2f", penalized.evaluation.accuracy) + " E=" + fmt("%.2f", e1) +
                " vs " + fmt("%.2f", e0);
  // The runtime is a laptop target: reported against the budget, not gated,
  // since the seeds only run concurrently when cores are available.
  const double t = seconds_since(t0);
  out.pass = successes >= 1 && e1 < e0;
  out.detail += fmt(" (%.0f s", t) + (t < kDeskSeconds ? " within" : " over") +
                fmt(" the %.0f s target, ", kDeskSeconds) + std::to_string(workers) +
                (workers == 1 ? " core)" : " cores)");
  return out;
}

// 7. Property suites standing in for full-scale claims.
Outcome property_suites() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out{true, ""};
#ifdef ZLA_UNIT_TESTS
  const int status = std::system(ZLA_UNIT_TESTS " --minimal > /dev/null 2>&1");
  out.pass = status == 0;
  out.detail += std::string("unit suites ") + (status == 0 ? "pass" : "FAIL");
#else
  out.detail += "unit suites not located";
  out.pass = false;
#endif

  // Rank-independent lengths: i.i.d. random typing, one message per input.
  const auto probs = power_law(1000);
  Rng rng = Rng(kSeed).derive(0xFA15E);
  std::size_t flagged = 0;
  for (std::size_t k = 0; k < kSyntheticCodes; ++k) {
    std::vector<double> lengths(1000);
    for (auto& l : lengths) l = static_cast<double>(random_typing_message(5, 30, rng).length());
    const auto r = randomization_test(lengths, probs.probs, kSyntheticPermutations, rng);
    flagged += r.significantly_small() || r.significantly_large();
  }
  const double rate = static_cast<double>(flagged) / static_cast<double>(kSyntheticCodes);
  const boost::math::binomial count_dist(static_cast<double>(kSyntheticCodes), kFalsePositiveRate);
  const double excess_p =
      flagged == 0 ? 1.0 : boost::math::cdf(boost::math::complement(count_dist, flagged - 1.0));
  out.pass = out.pass && excess_p > kFalsePositiveAlpha;
  out.detail += "; false positives " + std::to_string(flagged) + "/" +
                std::to_string(kSyntheticCodes) + fmt(" (rate %.3f", rate) +
                (rate <= kFalsePositiveRate ? " <= " : " > ") + "0.01, P(count >= observed | 1%) = " +
                fmt("%.3f)", excess_p);

  std::size_t strip_bad = 0;
  for (std::size_t k = 0; k < kStripCodes; ++k) {
    const std::size_t a = 2 + rng.index(9);
    const std::size_t max_len = 2 + rng.index(14);
    const std::size_t n = 1 + rng.index(40);
    Code code{std::vector<Message>(n), Alphabet{a}, max_len};
    for (auto& m : code.messages) m = random_typing_message(a, max_len, rng);
    const auto p = power_law(n);
    const auto once = strip_repetitions(code, p);
    const auto twice = strip_repetitions(once.stripped, p);
    if (twice.stripped.messages != once.stripped.messages) ++strip_bad;
    if (once.mean_after > once.mean_before + 1e-12) ++strip_bad;
  }
  out.pass = out.pass && strip_bad == 0;
  out.detail += "; strip violations " + std::to_string(strip_bad) + "/" + std::to_string(kStripCodes);
  out.detail += fmt(" (%.1f s)", seconds_since(t0));
  return out;
}

// 8. Entropy of the code using every two-symbol message over 40 symbols once.
Outcome entropy_references() {
  Code code;
  code.alphabet = Alphabet{41};
  code.max_len = 3;
  for (Symbol x = 1; x <= 40; ++x)
    for (Symbol y = 1; y <= 40; ++y) code.messages.push_back(Message{{x, y, kEos}});
  const auto s = symbol_stats(code);
  const double du = std::abs(s.unigram_entropy - std::log(40.0));
  const double db = std::abs(s.bigram_entropy - std::log(1600.0));
  return {du <= kEntropyTolerance && db <= kEntropyTolerance,
          "unigram " + fmt("%.15f", s.unigram_entropy) + " bigram " +
              fmt("%.15f", s.bigram_entropy)};
}

#ifdef ZLA_CLI
bool run_cli(const std::string& args) {
  const std::string cmd = std::string(ZLA_CLI) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}
#endif

// 9. Repeated CLI invocations write identical files at any parallelism.
Outcome cli_determinism() {
#ifndef ZLA_CLI
  return {false, "zlalab not located"};
#else
  testing::TempDir dir("acceptance_cli");
  const auto root = dir.path();
  write_file_atomic(root / "train.json",
                    R"({"n": 20, "a": 5, "max_len": 5, "speaker_hidden": 16, "listener_hidden": 16,
                        "episodes": 3, "batches_per_episode": 4, "batch_size": 64})");
  write_file_atomic(root / "sweep.json",
                    R"({"alphabet_sizes": [3, 5], "max_lens": [4, 5], "hidden_pairs": [[16, 16]],
                        "entropy_coeffs": [0.1], "seeds": [1, 2], "mt_codes": 3,
                        "permutations": 1000, "min_successes": 1,
                        "base": {"n": 20, "episodes": 2, "batches_per_episode": 3,
                                 "batch_size": 32}})");
  const std::string r = root.string();
  bool ok = run_cli("train --config " + r + "/train.json --seed 3 --out " + r + "/t1") &&
            run_cli("train --config " + r + "/train.json --seed 3 --out " + r + "/t2") &&
            run_cli("sweep --config " + r + "/sweep.json --jobs 1 --out " + r + "/s1") &&
            run_cli("sweep --config " + r + "/sweep.json --jobs 2 --out " + r + "/s2");
  if (!ok) return {false, "a CLI invocation failed"};

  std::size_t compared = 0, differing = 0;
  auto compare = [&](const fs::path& x, const fs::path& y) {
    ++compared;
    if (!fs::exists(x) || !fs::exists(y) || read_file(x) != read_file(y)) ++differing;
  };
  for (const char* f : {"metrics.csv", "code.tsv", "analysis.json"})
    compare(root / "t1" / f, root / "t2" / f);
  for (const auto& e : fs::recursive_directory_iterator(root / "s1")) {
    const auto name = e.path().filename().string();
    if (name == "metrics.csv" || name == "code.tsv" || name == "analysis.json" ||
        name == "report.json")
      compare(e.path(), root / "s2" / fs::relative(e.path(), root / "s1"));
  }
  return {differing == 0 && compared > 3,
          std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ"};
#endif
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"optimal code mean lengths", optimal_code_exactness},
      {"randomization test on reference codes", randomization_pattern},
      {"monkey typing reference", monkey_typing_checks},
      {"gradient fidelity", gradient_fidelity},
      {"untrained speaker equivalence", untrained_speakers},
      {"desk-scale training", desk_training},
      {"property suites", property_suites},
      {"entropy references", entropy_references},
      {"CLI determinism", cli_determinism},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::strtoul(argv[i], nullptr, 10));

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected.empty() && !selected.contains(k + 1)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
