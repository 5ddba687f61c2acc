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

#include "zla/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "zla/agents.hpp"
#include "zla/errors.hpp"
#include "zla/io.hpp"

namespace zla {

std::vector<double> as_doubles(std::span<const std::size_t> values) {
  return std::vector<double>(values.begin(), values.end());
}

double mean_length(std::span<const double> lengths, std::span<const double> probs) {
  if (lengths.size() != probs.size())
    throw std::invalid_argument("mean_length: code and distribution sizes differ");
  double e = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) e += probs[i] * lengths[i];
  return e;
}

double mean_length(const Code& code, const FrequencyModel& probs) {
  const auto lengths = as_doubles(code.lengths());
  return mean_length(lengths, probs.probs);
}

RandTestResult randomization_test(std::span<const double> lengths,
                                  std::span<const double> probs,
                                  std::size_t permutations, Rng& rng) {
  if (permutations == 0)
    throw std::invalid_argument("randomization_test: need at least one permutation");
  RandTestResult res;
  res.observed = mean_length(lengths, probs);
  res.permutations = permutations;
  const double tol = 1e-12 * std::max(1.0, std::abs(res.observed));

  std::vector<double> shuffled(lengths.begin(), lengths.end());
  std::size_t at_most = 0;
  std::size_t at_least = 0;
  for (std::size_t k = 0; k < permutations; ++k) {
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.index(i)]);
    const double e = mean_length(shuffled, probs);
    if (e <= res.observed + tol) ++at_most;
    if (e >= res.observed - tol) ++at_least;
  }
  const auto denom = static_cast<double>(permutations + 1);
  res.left_p = static_cast<double>(at_most + 1) / denom;
  res.right_p = static_cast<double>(at_least + 1) / denom;
  return res;
}

RandTestResult randomization_test(const Code& code, const FrequencyModel& probs,
                                  std::size_t permutations, Rng& rng) {
  const auto lengths = as_doubles(code.lengths());
  return randomization_test(lengths, probs.probs, permutations, rng);
}

std::vector<double> length_curve(std::span<const double> lengths, std::size_t window) {
  if (window == 0) throw std::invalid_argument("length_curve: window must be positive");
  if (window > lengths.size())
    throw std::invalid_argument("length_curve: window larger than the code");
  std::vector<double> out;
  out.reserve(lengths.size() - window + 1);
  for (std::size_t k = 0; k + window <= lengths.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = k; i < k + window; ++i) sum += lengths[i];
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

LengthProfile length_profile(const Code& code, const FrequencyModel& probs,
                             std::size_t window) {
  LengthProfile p;
  p.lengths = as_doubles(code.lengths());
  p.probs = probs.probs;
  p.mean = mean_length(p.lengths, p.probs);
  p.window = std::min(window, p.lengths.size());
  if (p.window > 0) p.smoothed = length_curve(p.lengths, p.window);
  return p;
}

double SymbolStats::bigram_prob(Symbol first, Symbol second) const {
  const auto it = bigram.find({first, second});
  return it == bigram.end() ? 0.0 : it->second;
}

namespace {

double entropy_of(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

}  // namespace

SymbolStats symbol_stats(const Code& code, const FrequencyModel* weights) {
  if (weights != nullptr && weights->n() != code.n())
    throw std::invalid_argument("symbol_stats: weights do not match the code");
  SymbolStats st;
  st.unigram.assign(code.alphabet.size, 0.0);
  for (std::size_t r = 0; r < code.n(); ++r) {
    const double w = weights != nullptr ? weights->probs[r] : 1.0;
    const auto content = code.messages[r].content();
    for (std::size_t i = 0; i < content.size(); ++i) {
      st.unigram.at(content[i]) += w;
      st.unigram_total += w;
      if (i + 1 < content.size()) {
        st.bigram[{content[i], content[i + 1]}] += w;
        st.bigram_total += w;
      }
    }
  }
  if (st.unigram_total > 0.0)
    for (double& p : st.unigram) p /= st.unigram_total;
  std::vector<double> bigram_probs;
  bigram_probs.reserve(st.bigram.size());
  for (auto& [pair, count] : st.bigram) {
    count /= st.bigram_total;
    bigram_probs.push_back(count);
  }
  st.unigram_entropy = entropy_of(st.unigram);
  st.bigram_entropy = entropy_of(bigram_probs);
  return st;
}

std::vector<RepetitionVerdict> repetition_check(const Code& code, std::size_t top) {
  const auto st = symbol_stats(code);
  std::vector<Symbol> symbols;
  for (Symbol s = 1; s < st.unigram.size(); ++s)
    if (st.unigram[s] > 0.0) symbols.push_back(s);
  std::stable_sort(symbols.begin(), symbols.end(), [&](Symbol x, Symbol y) {
    return st.unigram[x] > st.unigram[y];
  });
  if (symbols.size() > top) symbols.resize(top);
  std::vector<RepetitionVerdict> out;
  for (Symbol s : symbols) {
    RepetitionVerdict v{s, st.unigram[s], st.bigram_prob(s, s), false};
    v.repeated = v.self_bigram > v.unigram * v.unigram;
    out.push_back(v);
  }
  return out;
}

Message strip_repetitions(const Message& message) {
  Message out;
  const auto content = message.content();
  for (std::size_t i = 0; i < content.size(); ++i)
    if (i == 0 || content[i] != content[i - 1]) out.symbols.push_back(content[i]);
  out.symbols.push_back(kEos);
  return out;
}

StripResult strip_repetitions(const Code& code, const FrequencyModel& probs) {
  StripResult res;
  res.stripped = Code{{}, code.alphabet, code.max_len};
  res.stripped.messages.reserve(code.n());
  for (const auto& m : code.messages) {
    res.stripped.messages.push_back(strip_repetitions(m));
    res.lengths.push_back(res.stripped.messages.back().length());
  }
  res.mean_before = mean_length(code, probs);
  res.mean_after = mean_length(res.stripped, probs);
  return res;
}

SpeakerProbeResult untrained_speaker_probe(std::span<const std::size_t> hidden_sizes,
                                           std::size_t speakers_per_size,
                                           std::size_t n, std::size_t a,
                                           std::size_t max_len, bool uniqueness,
                                           Rng& rng) {
  if (hidden_sizes.empty() || speakers_per_size == 0 || n == 0)
    throw std::invalid_argument("untrained_speaker_probe: empty ensemble");
  if (uniqueness) {
    const double capacity = message_space_size(a, max_len);
    if (capacity < static_cast<double>(n)) throw CapacityError(capacity, n);
  }
  constexpr std::size_t kRedraws = 16;
  constexpr std::size_t kPrefetch = 8;
  const Rng base(rng.next());
  std::vector<std::size_t> ranks(n);
  std::iota(ranks.begin(), ranks.end(), std::size_t{1});

  SpeakerProbeResult res;
  res.length_histogram.assign(max_len, 0.0);
  std::uint64_t stream = 0;
  for (std::size_t hidden : hidden_sizes) {
    for (std::size_t k = 0; k < speakers_per_size; ++k) {
      Rng local = base.derive(stream++);
      const auto params = init_speaker<double>(
          static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(a),
          static_cast<Eigen::Index>(hidden), 0, local);
      auto first = speaker_rollout(params, std::span<const std::size_t>(ranks),
                                   max_len, DecodeMode::Sample, &local);
      std::vector<std::size_t> lengths(n);
      if (!uniqueness) {
        for (std::size_t r = 0; r < n; ++r) lengths[r] = first.messages[r].length();
      } else {
        // Redraws are i.i.d. per input, so they can be drawn ahead of time.
        // Inputs whose first message is shared are the ones likely to collide;
        // their pools come from one batched rollout, others refill on demand.
        std::unordered_map<Message, std::size_t, MessageHash> first_counts;
        for (const auto& m : first.messages) ++first_counts[m];
        std::vector<std::size_t> batched;
        for (std::size_t r = 0; r < n; ++r)
          if (first_counts[first.messages[r]] > 1)
            batched.insert(batched.end(), kPrefetch, r + 1);
        std::vector<std::vector<Message>> pools(n);
        if (!batched.empty()) {
          auto drawn = speaker_rollout(params, std::span<const std::size_t>(batched), max_len,
                                       DecodeMode::Sample, &local);
          for (std::size_t q = 0; q < batched.size(); ++q)
            pools[batched[q] - 1].push_back(std::move(drawn.messages[q]));
        }
        std::unordered_set<Message, MessageHash> used;
        for (std::size_t r : sampling_order(power_law(n), local)) {
          Message m = std::move(first.messages[r]);
          std::vector<Message>& pool = pools[r];
          std::size_t next = 0;
          while (used.contains(m)) {
            if (next == pool.size()) {
              const std::vector<std::size_t> same(kRedraws, r + 1);
              pool = speaker_rollout(params, std::span<const std::size_t>(same),
                                     max_len, DecodeMode::Sample, &local)
                         .messages;
              next = 0;
            }
            m = std::move(pool[next++]);
          }
          lengths[r] = m.length();
          used.insert(std::move(m));
        }
      }
      for (std::size_t l : lengths) res.length_histogram[l - 1] += 1.0;
      res.lengths.push_back(std::move(lengths));
    }
  }

  res.mean_length.assign(n, 0.0);
  res.std_error.assign(n, 0.0);
  std::vector<double> column(res.lengths.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < res.lengths.size(); ++s)
      column[s] = static_cast<double>(res.lengths[s][r]);
    const auto summary = summarize(column);
    res.mean_length[r] = summary.mean;
    res.std_error[r] = summary.std_error;
  }
  return res;
}

DiscriminabilityResult listener_discriminability(const Code& code,
                                                 std::size_t listeners,
                                                 std::size_t hidden, Rng& rng,
                                                 const FrequencyModel* weights) {
  if (listeners == 0 || hidden == 0)
    throw std::invalid_argument("listener_discriminability: empty ensemble");
  validate(code, false);
  if (weights != nullptr && weights->n() != code.n())
    throw std::invalid_argument("listener_discriminability: weights do not match the code");
  const auto n = static_cast<Eigen::Index>(code.n());
  const Rng base(rng.next());
  DiscriminabilityResult res;
  for (std::size_t l = 0; l < listeners; ++l) {
    Rng local = base.derive(l);
    const auto params = init_listener<double>(
        n, static_cast<Eigen::Index>(code.alphabet.size),
        static_cast<Eigen::Index>(hidden), 0, local);
    const auto heard = listener_rollout(params, code.messages, false);
    const Matrix<double>& h = heard.hidden;
    const Matrix<double> gram = h.transpose() * h;
    double total = 0.0;
    double norm = 0.0;
    for (Eigen::Index j = 1; j < n; ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double sq = std::max(0.0, gram(i, i) + gram(j, j) - 2.0 * gram(i, j));
        const double w = weights != nullptr ? weights->probs[i] * weights->probs[j] : 1.0;
        total += w * std::sqrt(sq);
        norm += w;
      }
    }
    res.per_listener.push_back(norm > 0.0 ? total / norm : 0.0);
  }
  const auto summary = summarize(res.per_listener);
  res.mean = summary.mean;
  res.stddev = std::sqrt(summary.variance);
  return res;
}

CodeAnalysis analyze_code(const Code& code, const FrequencyModel& probs,
                          std::size_t permutations, Rng& rng, std::size_t window) {
  CodeAnalysis out;
  out.n = code.n();
  out.alphabet_size = code.alphabet.size;
  out.max_len = code.max_len;
  out.distinct = distinct_messages(code);
  out.test = randomization_test(code, probs, permutations, rng);
  out.symbols = symbol_stats(code);
  out.repetition = repetition_check(code);
  const auto stripped = strip_repetitions(code, probs);
  out.mean_before_strip = stripped.mean_before;
  out.mean_after_strip = stripped.mean_after;
  out.profile = length_profile(code, probs, window);
  return out;
}

nlohmann::json to_json(const CodeAnalysis& a) {
  nlohmann::json verdicts = nlohmann::json::array();
  std::size_t repeated = 0;
  for (const auto& v : a.repetition) {
    verdicts.push_back({{"symbol", v.symbol},
                        {"unigram", v.unigram},
                        {"self_bigram", v.self_bigram},
                        {"repeated", v.repeated}});
    if (v.repeated) ++repeated;
  }
  return {
      {"n", a.n},
      {"alphabet_size", a.alphabet_size},
      {"max_len", a.max_len},
      {"distinct_messages", a.distinct},
      {"E", a.test.observed},
      {"left_p", a.test.left_p},
      {"right_p", a.test.right_p},
      {"permutations", a.test.permutations},
      {"significantly_small", a.test.significantly_small()},
      {"significantly_large", a.test.significantly_large()},
      {"unigram_entropy", a.symbols.unigram_entropy},
      {"bigram_entropy", a.symbols.bigram_entropy},
      {"repetition", verdicts},
      {"repetition_all_top", !a.repetition.empty() && repeated == a.repetition.size()},
      {"E_before_strip", a.mean_before_strip},
      {"E_after_strip", a.mean_after_strip},
      {"smoothing_window", a.profile.window},
  };
}

void write_analysis(const std::filesystem::path& dir, const CodeAnalysis& analysis) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "analysis.json", to_json(analysis).dump(2) + "\n");
  std::ostringstream curves;
  CsvWriter csv(curves);
  csv.row({"rank", "raw_length", "smoothed_length"});
  const auto& p = analysis.profile;
  for (std::size_t r = 0; r < p.lengths.size(); ++r)
    csv.row({std::to_string(r + 1), format_double(p.lengths[r]),
             r < p.smoothed.size() ? format_double(p.smoothed[r]) : std::string()});
  write_file_atomic(dir / "curves.csv", curves.str());
}

}  // namespace zla
