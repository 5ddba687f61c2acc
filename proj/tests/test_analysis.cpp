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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "temp_dir.hpp"
#include "zla/analysis.hpp"
#include "zla/errors.hpp"
#include "zla/io.hpp"

using namespace zla;

namespace {

Message msg(std::initializer_list<Symbol> s) { return Message{std::vector<Symbol>(s)}; }

Code make_code(std::vector<Message> messages, std::size_t a, std::size_t max_len) {
  Code c;
  c.messages = std::move(messages);
  c.alphabet = Alphabet{a};
  c.max_len = max_len;
  return c;
}

// Exact permutation p-values by enumerating every assignment of lengths.
std::pair<double, double> exact_p(std::vector<double> lengths, const std::vector<double>& probs) {
  const double observed = mean_length(lengths, probs);
  std::vector<std::size_t> idx(lengths.size());
  std::iota(idx.begin(), idx.end(), 0);
  double le = 0, ge = 0, total = 0;
  do {
    double e = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) e += probs[k] * lengths[idx[k]];
    const double tol = 1e-12 * std::max(1.0, std::abs(observed));
    if (e <= observed + tol) ++le;
    if (e >= observed - tol) ++ge;
    ++total;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return {le / total, ge / total};
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("mean length") {
  const std::vector<double> l{1, 2, 3};
  const std::vector<double> p{0.5, 0.3, 0.2};
  CHECK(mean_length(l, p) == doctest::Approx(1.7));
  CHECK_THROWS_AS(mean_length(l, std::vector<double>{1.0}), std::invalid_argument);
  const auto oc = optimal_code(3, 3, 3);  // lengths 1, 2, 2
  CHECK(mean_length(oc, power_law(3)) == doctest::Approx((1.0 + 2.0 / 2 + 2.0 / 3) / (1 + 0.5 + 1.0 / 3)));
}

TEST_CASE("randomization test matches exact enumeration") {
  const std::vector<double> lengths{3, 1, 4, 1, 5, 2};
  const auto pl = power_law(6);
  const auto [le, ge] = exact_p(lengths, pl.probs);
  Rng rng(11);
  const auto res = randomization_test(lengths, pl.probs, 100000, rng);
  CHECK(res.observed == doctest::Approx(mean_length(lengths, pl.probs)));
  CHECK(res.permutations == 100000);
  // binomial standard error at P = 1e5 is below 0.0016
  CHECK(std::abs(res.left_p - le) < 0.006);
  CHECK(std::abs(res.right_p - ge) < 0.006);
}

TEST_CASE("randomization test verdicts") {
  Rng rng(12);
  const auto pl = power_law(100);
  const auto oc = randomization_test(optimal_code(100, 5, 10), pl, 10000, rng);
  CHECK(oc.significantly_small());
  CHECK_FALSE(oc.significantly_large());
  CHECK(oc.left_p == doctest::Approx(1.0 / 10001));

  auto lengths = as_doubles(optimal_code(20, 3, 10).lengths());
  std::reverse(lengths.begin(), lengths.end());
  const auto rev = randomization_test(lengths, power_law(20).probs, 10000, rng);
  CHECK(rev.significantly_large());
  CHECK_FALSE(rev.significantly_small());

  const std::vector<double> flat(50, 4.0);
  const auto constant = randomization_test(flat, power_law(50).probs, 1000, rng);
  CHECK(constant.left_p == 1.0);
  CHECK(constant.right_p == 1.0);

  for (int k = 0; k < 20; ++k) {
    const auto code = monkey_typing(30, 4, 8, rng);
    const auto r = randomization_test(code, power_law(30), 500, rng);
    CHECK(r.left_p + r.right_p >= 1.0);
  }
  CHECK_THROWS_AS(randomization_test(flat, power_law(50).probs, 0, rng), std::invalid_argument);
}

TEST_CASE("length curves") {
  const std::vector<double> l{1, 2, 3, 4, 5};
  CHECK(length_curve(l, 2) == std::vector<double>{1.5, 2.5, 3.5, 4.5});
  CHECK(length_curve(l, 1) == l);
  CHECK(length_curve(l, 5) == std::vector<double>{3.0});
  CHECK_THROWS_AS(length_curve(l, 0), std::invalid_argument);
  CHECK_THROWS_AS(length_curve(l, 6), std::invalid_argument);

  const auto prof = length_profile(optimal_code(40, 5, 6), power_law(40), 10);
  CHECK(prof.smoothed.size() == 31);
  CHECK(prof.lengths.size() == 40);
  CHECK(prof.window == 10);
}

TEST_CASE("symbol entropies on a balanced code") {
  // every two-symbol message over 40 content symbols exactly once
  std::vector<Message> all;
  for (Symbol x = 1; x <= 40; ++x)
    for (Symbol y = 1; y <= 40; ++y) all.push_back(msg({x, y, kEos}));
  const auto s = symbol_stats(make_code(all, 41, 3));
  CHECK(s.unigram_entropy == doctest::Approx(std::log(40.0)).epsilon(1e-12));
  CHECK(s.bigram_entropy == doctest::Approx(std::log(1600.0)).epsilon(1e-12));
  CHECK(s.unigram_total == 3200.0);
  CHECK(s.bigram_total == 1600.0);
  CHECK(s.unigram[kEos] == 0.0);
}

TEST_CASE("symbol statistics of small codes") {
  const auto single = symbol_stats(make_code({msg({1, 1, 2, kEos})}, 3, 4));
  CHECK(single.unigram[1] == doctest::Approx(2.0 / 3.0));
  CHECK(single.unigram[2] == doctest::Approx(1.0 / 3.0));
  CHECK(single.bigram_prob(1, 1) == doctest::Approx(0.5));
  CHECK(single.bigram_prob(1, 2) == doctest::Approx(0.5));
  CHECK(single.bigram_prob(2, 1) == 0.0);
  CHECK(single.bigram_entropy == doctest::Approx(std::log(2.0)));

  const auto eos_only = symbol_stats(make_code({msg({kEos}), msg({1, kEos})}, 3, 3));
  CHECK(eos_only.unigram_entropy == 0.0);
  CHECK(eos_only.bigram_entropy == 0.0);
  CHECK(eos_only.bigram_total == 0.0);

  Rng rng(13);
  const auto code = monkey_typing(200, 6, 10, rng);
  const auto st = symbol_stats(code);
  double mass = 0.0;
  for (const auto& [pair, count] : st.bigram) mass += st.bigram_prob(pair.first, pair.second);
  CHECK(mass == doctest::Approx(1.0));
  CHECK(st.bigram_entropy <= 2.0 * std::log(5.0) + 1e-12);

  // weighting by frequency only changes the counts' scale when all messages agree
  const auto same = make_code({msg({1, 2, kEos}), msg({1, 2, kEos})}, 3, 3);
  const auto w = power_law(2);
  CHECK(symbol_stats(same, &w).unigram_entropy == doctest::Approx(std::log(2.0)));
  const auto three = power_law(3);
  CHECK_THROWS_AS(symbol_stats(same, &three), std::invalid_argument);
}

TEST_CASE("repetition verdicts") {
  const auto code = make_code({msg({1, 1, 1, kEos}), msg({2, 3, kEos})}, 4, 4);
  const auto v = repetition_check(code);
  REQUIRE(v.size() == 3);
  CHECK(v[0].symbol == 1);
  CHECK(v[0].unigram == doctest::Approx(0.6));
  CHECK(v[0].self_bigram == doctest::Approx(2.0 / 3.0));
  CHECK(v[0].repeated);
  CHECK(v[1].symbol == 2);  // ties broken by lower id
  CHECK_FALSE(v[1].repeated);
  CHECK(repetition_check(code, 1).size() == 1);

  // uniform random typing repeats about half of its top symbols
  Rng rng(14);
  std::size_t flagged = 0, total = 0;
  for (int k = 0; k < 20; ++k) {
    for (const auto& r : repetition_check(monkey_typing(300, 40, 30, rng))) {
      flagged += r.repeated;
      ++total;
    }
  }
  CHECK(total == 200);
  CHECK(double(flagged) / double(total) < 0.975);
}

TEST_CASE("stripping repetitions") {
  CHECK(strip_repetitions(msg({1, 1, 2, 2, 2, 1, kEos})) == msg({1, 2, 1, kEos}));
  CHECK(strip_repetitions(msg({kEos})) == msg({kEos}));
  CHECK(strip_repetitions(msg({3, 1, 3, kEos})) == msg({3, 1, 3, kEos}));

  Rng rng(15);
  for (int k = 0; k < 200; ++k) {
    const auto m = random_typing_message(3, 12, rng);
    const auto once = strip_repetitions(m);
    CHECK(strip_repetitions(once) == once);
    CHECK(once.length() <= m.length());
    CHECK(once.symbols.back() == kEos);
  }
  const auto code = make_code({msg({1, 1, kEos}), msg({2, kEos}), msg({2, 2, 2, kEos})}, 3, 4);
  const auto res = strip_repetitions(code, power_law(3));
  CHECK(res.lengths == std::vector<std::size_t>{2, 2, 2});
  CHECK(res.mean_after == doctest::Approx(2.0));
  CHECK(res.mean_before == doctest::Approx(mean_length(code, power_law(3))));
}

TEST_CASE("repetitive codes have lower bigram entropy than their controls") {
  // runs of one symbol: the unigram distribution is shared with the control,
  // the bigram distribution is concentrated on the diagonal
  std::vector<Message> runs;
  for (Symbol s = 1; s <= 9; ++s)
    for (std::size_t len = 2; len <= 6; ++len) {
      Message m;
      m.symbols.assign(len, s);
      m.symbols.push_back(kEos);
      runs.push_back(m);
    }
  const auto code = make_code(runs, 10, 7);
  const auto base = symbol_stats(code);
  Rng rng(16);
  double unigram = 0.0, bigram = 0.0;
  const int draws = 50;
  for (int k = 0; k < draws; ++k) {
    const auto st = symbol_stats(control_code(code, rng));
    unigram += st.unigram_entropy / draws;
    bigram += st.bigram_entropy / draws;
  }
  CHECK(unigram == doctest::Approx(base.unigram_entropy).epsilon(0.01));
  CHECK(base.bigram_entropy < bigram);
  CHECK(base.bigram_entropy == doctest::Approx(std::log(9.0)));
}

TEST_CASE("untrained speaker probe") {
  Rng rng(17);
  const std::vector<std::size_t> hidden{8, 16};
  const auto probe = untrained_speaker_probe(hidden, 3, 30, 5, 6, false, rng);
  CHECK(probe.lengths.size() == 6);
  CHECK(probe.mean_length.size() == 30);
  CHECK(probe.std_error.size() == 30);
  CHECK(probe.length_histogram.size() == 6);
  CHECK(std::accumulate(probe.length_histogram.begin(), probe.length_histogram.end(), 0.0) == 180.0);
  for (double m : probe.mean_length) {
    CHECK(m >= 1.0);
    CHECK(m <= 6.0);
  }

  Rng again(17);
  CHECK(untrained_speaker_probe(hidden, 3, 30, 5, 6, false, again).lengths == probe.lengths);

  // in uniqueness mode a tiny message space forces long messages
  const auto unique = untrained_speaker_probe(std::vector<std::size_t>{8}, 2, 15, 3, 4, true, rng);
  for (const auto& per_speaker : unique.lengths) {
    std::vector<std::size_t> sorted = per_speaker;
    std::sort(sorted.begin(), sorted.end());
    // 1 + 2 + 4 + 8 messages of length 1..4: the 15 inputs use all of them
    CHECK(std::count(sorted.begin(), sorted.end(), 4u) == 8);
  }
  CHECK_THROWS_AS(untrained_speaker_probe(std::vector<std::size_t>{8}, 1, 16, 3, 4, true, rng), CapacityError);
  CHECK_THROWS_AS(untrained_speaker_probe(std::vector<std::size_t>{}, 1, 5, 3, 4, false, rng), std::invalid_argument);
}

TEST_CASE("listener discriminability") {
  Rng rng(18);
  const auto code = optimal_code(20, 4, 5);
  const auto res = listener_discriminability(code, 4, 8, rng);
  CHECK(res.per_listener.size() == 4);
  CHECK(res.mean > 0.0);
  CHECK(res.stddev >= 0.0);
  for (double d : res.per_listener) CHECK(d <= 2.0 * std::sqrt(8.0));

  const auto same = make_code({msg({1, kEos}), msg({1, kEos})}, 3, 3);
  CHECK(listener_discriminability(same, 2, 4, rng).mean == 0.0);

  const auto pl = power_law(20);
  const auto weighted = listener_discriminability(code, 2, 8, rng, &pl);
  CHECK(weighted.mean > 0.0);
  const auto wrong = power_law(3);
  CHECK_THROWS_AS(listener_discriminability(code, 2, 8, rng, &wrong), std::invalid_argument);
}

TEST_CASE("analysis report files") {
  testing::TempDir dir("analysis");
  Rng rng(19);
  const auto code = optimal_code(50, 5, 6);
  const auto an = analyze_code(code, power_law(50), 2000, rng);
  CHECK(an.n == 50);
  CHECK(an.distinct == 50);
  CHECK(an.test.significantly_small());
  CHECK(an.mean_after_strip <= an.mean_before_strip + 1e-12);
  write_analysis(dir.path(), an);

  const auto j = nlohmann::json::parse(read_file(dir / "analysis.json"));
  for (const char* key : {"n", "alphabet_size", "max_len", "distinct_messages", "E", "left_p",
                          "right_p", "permutations", "unigram_entropy", "bigram_entropy",
                          "repetition", "E_before_strip", "E_after_strip"})
    CHECK(j.contains(key));
  CHECK(j["E"].get<double>() == doctest::Approx(an.test.observed));

  std::ifstream curves(dir / "curves.csv");
  std::string line;
  std::getline(curves, line);
  CHECK(line == "rank,raw_length,smoothed_length");
  std::size_t rows = 0;
  while (std::getline(curves, line)) ++rows;
  CHECK(rows == 50);
}

}  // TEST_SUITE
