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

#ifndef ZLA_FREQMODEL_HPP_
#define ZLA_FREQMODEL_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zla/rng.hpp"

namespace zla {

// Ranks are 1-based everywhere in the public API (rank 1 = most frequent);
// vectors indexed by rank are 0-based internally.

enum class FrequencyKind { PowerLaw, Uniform, Corpus };

const char* to_string(FrequencyKind kind);

/// Probability distribution over n input types, sorted most frequent first.
struct FrequencyModel {
  FrequencyKind kind = FrequencyKind::PowerLaw;
  std::vector<double> probs;

  std::size_t n() const { return probs.size(); }
  double prob(std::size_t rank) const { return probs.at(rank - 1); }
};

/// p_r = 1 / (r * H_n).
FrequencyModel power_law(std::size_t n);
FrequencyModel uniform(std::size_t n);

/// Throws std::invalid_argument unless probs is positive, sorted
/// non-increasing and sums to one within 1e-12.
void validate(const FrequencyModel& model);

/// Inverse-CDF sampler over ranks. Construction is O(n); draws are O(log n).
class RankSampler {
 public:
  explicit RankSampler(const FrequencyModel& model);

  std::size_t draw(Rng& rng) const;
  std::size_t n() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

/// 0-based input indices in the order in which sequential sampling without
/// replacement, proportional to probability, would draw them.
std::vector<std::size_t> sampling_order(const FrequencyModel& model, Rng& rng);

/// k i.i.d. ranks (1-based) drawn with replacement.
std::vector<std::size_t> sample_batch(const FrequencyModel& model,
                                      std::size_t k, Rng& rng);

struct LexiconEntry {
  std::string word;
  double frequency = 0.0;

  bool operator==(const LexiconEntry&) const = default;
};

struct CorpusLexicon {
  std::vector<LexiconEntry> entries;
  std::size_t alphabet_size = 0;
  /// Set when the source list had fewer surviving words than requested.
  std::optional<std::string> warning;
};

inline constexpr std::size_t kDefaultLexiconSize = 1000;

/// Reads a frequency list (`rank freq word` or `word freq`, auto-detected).
/// Forms are lowercased and merged, words containing any non-letter code
/// point are dropped, and the `keep` most frequent survivors are returned.
/// Throws IoError / ParseError.
CorpusLexicon load_lexicon(const std::filesystem::path& path,
                           std::size_t keep = kDefaultLexiconSize);
CorpusLexicon parse_lexicon(std::istream& in,
                            std::size_t keep = kDefaultLexiconSize);

/// Two-column form, readable by load_lexicon.
void write_lexicon(std::ostream& out, const CorpusLexicon& lexicon);

/// Word lengths in code points, in rank order.
std::vector<std::size_t> lexicon_lengths(const CorpusLexicon& lexicon);

/// Frequencies normalised into a distribution over the lexicon's ranks.
FrequencyModel corpus_model(const CorpusLexicon& lexicon);

}  // namespace zla

#endif  // ZLA_FREQMODEL_HPP_
