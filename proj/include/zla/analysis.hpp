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

#ifndef ZLA_ANALYSIS_HPP_
#define ZLA_ANALYSIS_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "zla/freqmodel.hpp"
#include "zla/lexicodes.hpp"
#include "zla/rng.hpp"
#include "zla/stats.hpp"

namespace zla {

/// Per-side threshold for "significantly small" / "significantly large".
inline constexpr double kSignificance = 0.005;
inline constexpr std::size_t kDefaultPermutations = 100000;
inline constexpr std::size_t kDefaultSmoothing = 10;

std::vector<double> as_doubles(std::span<const std::size_t> values);

/// E = sum_r p_r * l_r. Throws std::invalid_argument on a size mismatch.
double mean_length(std::span<const double> lengths, std::span<const double> probs);
double mean_length(const Code& code, const FrequencyModel& probs);

struct RandTestResult {
  double observed = 0.0;
  double left_p = 1.0;
  double right_p = 1.0;
  std::size_t permutations = 0;

  bool significantly_small() const { return left_p <= kSignificance; }
  bool significantly_large() const { return right_p <= kSignificance; }
};

/// Shuffles lengths across types and compares E against the observed value.
/// p = (#{E_perm <= E_obs} + 1) / (P + 1) on the left, with >= on the right;
/// ties count on both sides (a relative tolerance of 1e-12 defines a tie).
RandTestResult randomization_test(std::span<const double> lengths,
                                  std::span<const double> probs,
                                  std::size_t permutations, Rng& rng);
RandTestResult randomization_test(const Code& code, const FrequencyModel& probs,
                                  std::size_t permutations, Rng& rng);

/// Trailing sliding mean: point k averages lengths[k .. k+window-1], giving
/// n - window + 1 points. window = 1 is the identity.
std::vector<double> length_curve(std::span<const double> lengths, std::size_t window);

struct LengthProfile {
  std::vector<double> lengths;
  std::vector<double> probs;
  double mean = 0.0;
  std::size_t window = 1;
  std::vector<double> smoothed;
};

LengthProfile length_profile(const Code& code, const FrequencyModel& probs,
                             std::size_t window = kDefaultSmoothing);

/// Symbol statistics over content symbols (eos excluded). Bigrams are
/// adjacent pairs inside a message. Each message counts once unless weights
/// are given, in which case message r contributes with weight p_r.
struct SymbolStats {
  std::vector<double> unigram;  // indexed by symbol id; entry 0 (eos) stays 0
  std::map<std::pair<Symbol, Symbol>, double> bigram;
  double unigram_entropy = 0.0;  // nats
  double bigram_entropy = 0.0;
  double unigram_total = 0.0;    // raw (weighted) counts
  double bigram_total = 0.0;

  double bigram_prob(Symbol first, Symbol second) const;
};

SymbolStats symbol_stats(const Code& code, const FrequencyModel* weights = nullptr);

struct RepetitionVerdict {
  Symbol symbol = 0;
  double unigram = 0.0;      // P(s)
  double self_bigram = 0.0;  // P(s, s)
  bool repeated = false;     // P(s, s) > P(s)^2
};

/// Verdicts for the `top` most frequent symbols (ties by lower id); fewer if
/// fewer symbols are attested.
std::vector<RepetitionVerdict> repetition_check(const Code& code, std::size_t top = 10);

/// Collapses every run of identical content symbols to one occurrence.
Message strip_repetitions(const Message& message);

struct StripResult {
  Code stripped;
  std::vector<std::size_t> lengths;
  double mean_before = 0.0;
  double mean_after = 0.0;
};

StripResult strip_repetitions(const Code& code, const FrequencyModel& probs);

struct SpeakerProbeResult {
  std::vector<std::vector<std::size_t>> lengths;  // [speaker][rank-1]
  std::vector<double> mean_length;                // per rank, across speakers
  std::vector<double> std_error;                  // per rank
  std::vector<double> length_histogram;           // counts for l = 1..max_len
};

/// Fresh untrained speakers (speakers_per_size for each hidden size) encode
/// every input by sampling. In uniqueness mode inputs are visited in power-law
/// sampling order without replacement and a message already given to another
/// input is redrawn. Throws CapacityError in uniqueness mode
/// when the message space is smaller than n.
SpeakerProbeResult untrained_speaker_probe(std::span<const std::size_t> hidden_sizes,
                                           std::size_t speakers_per_size,
                                           std::size_t n, std::size_t a,
                                           std::size_t max_len, bool uniqueness,
                                           Rng& rng);

struct DiscriminabilityResult {
  double mean = 0.0;    // across listeners
  double stddev = 0.0;  // across listeners
  std::vector<double> per_listener;
};

/// Mean pairwise L2 distance between untrained listeners' hidden states after
/// eos, over all unordered pairs of the code's messages. With weights, pair
/// (i, j) is weighted by p_i p_j.
DiscriminabilityResult listener_discriminability(const Code& code,
                                                 std::size_t listeners,
                                                 std::size_t hidden, Rng& rng,
                                                 const FrequencyModel* weights = nullptr);

/// Everything written to analysis.json for one code.
struct CodeAnalysis {
  std::size_t n = 0;
  std::size_t alphabet_size = 0;
  std::size_t max_len = 0;
  std::size_t distinct = 0;
  RandTestResult test;
  SymbolStats symbols;
  std::vector<RepetitionVerdict> repetition;
  double mean_before_strip = 0.0;
  double mean_after_strip = 0.0;
  LengthProfile profile;
};

CodeAnalysis analyze_code(const Code& code, const FrequencyModel& probs,
                          std::size_t permutations, Rng& rng,
                          std::size_t window = kDefaultSmoothing);

nlohmann::json to_json(const CodeAnalysis& analysis);

/// Writes analysis.json and curves.csv (rank, raw_length, smoothed_length).
void write_analysis(const std::filesystem::path& dir, const CodeAnalysis& analysis);

}  // namespace zla

#endif  // ZLA_ANALYSIS_HPP_
