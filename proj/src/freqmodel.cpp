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

#include "zla/freqmodel.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "zla/errors.hpp"

namespace zla {

const char* to_string(FrequencyKind kind) {
  switch (kind) {
    case FrequencyKind::PowerLaw: return "power_law";
    case FrequencyKind::Uniform: return "uniform";
    case FrequencyKind::Corpus: return "corpus";
  }
  return "unknown";
}

FrequencyModel power_law(std::size_t n) {
  if (n == 0) throw std::invalid_argument("power_law: n must be positive");
  // Summing smallest terms first keeps H_n accurate to a few ulp.
  double harmonic = 0.0;
  for (std::size_t k = n; k >= 1; --k) harmonic += 1.0 / static_cast<double>(k);
  FrequencyModel model{FrequencyKind::PowerLaw, std::vector<double>(n)};
  for (std::size_t r = 1; r <= n; ++r)
    model.probs[r - 1] = 1.0 / (static_cast<double>(r) * harmonic);
  return model;
}

FrequencyModel uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform: n must be positive");
  return {FrequencyKind::Uniform,
          std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

void validate(const FrequencyModel& model) {
  if (model.probs.empty())
    throw std::invalid_argument("frequency model is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < model.probs.size(); ++i) {
    const double p = model.probs[i];
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("frequency model has a non-positive entry");
    if (i > 0 && p > model.probs[i - 1])
      throw std::invalid_argument("frequency model is not sorted by rank");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("frequency model does not sum to one");
}

RankSampler::RankSampler(const FrequencyModel& model)
    : cumulative_(model.probs.size()) {
  if (model.probs.empty())
    throw std::invalid_argument("RankSampler: empty model");
  double acc = 0.0;
  for (std::size_t i = 0; i < model.probs.size(); ++i) {
    acc += model.probs[i];
    cumulative_[i] = acc;
  }
  // Draws in [acc, 1) would otherwise fall off the end.
  cumulative_.back() = 1.0;
}

std::size_t RankSampler::draw(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<std::size_t>(it - cumulative_.begin()) + 1;
}

std::vector<std::size_t> sampling_order(const FrequencyModel& model, Rng& rng) {
  // Exponential keys: sorting by log(u) / p descending draws without
  // replacement with probabilities proportional to p.
  std::vector<double> keys(model.n());
  for (std::size_t i = 0; i < keys.size(); ++i)
    keys[i] = std::log1p(-rng.uniform()) / model.probs[i];
  std::vector<std::size_t> order(model.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return keys[x] > keys[y]; });
  return order;
}

std::vector<std::size_t> sample_batch(const FrequencyModel& model,
                                      std::size_t k, Rng& rng) {
  if (k == 0) throw std::invalid_argument("sample_batch: k must be positive");
  const RankSampler sampler(model);
  std::vector<std::size_t> out(k);
  for (auto& rank : out) rank = sampler.draw(rng);
  return out;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

double parse_number(const std::string& text, std::size_t line_no,
                    const char* what) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value))
    throw ParseError(std::string("malformed ") + what + " '" + text + "'",
                     line_no);
  return value;
}

// Lowercases a UTF-8 word code point by code point. Returns false if the
// word contains a code point outside the Unicode letter categories.
bool fold_word(const std::string& word, std::size_t line_no, std::string& out,
               std::set<UChar32>* letters) {
  out.clear();
  const auto* s = reinterpret_cast<const uint8_t*>(word.data());
  const auto length = static_cast<int32_t>(word.size());
  bool alphabetic = true;
  for (int32_t i = 0; i < length;) {
    UChar32 cp = 0;
    U8_NEXT(s, i, length, cp);
    if (cp < 0) throw ParseError("invalid UTF-8 in '" + word + "'", line_no);
    if (!u_isalpha(cp)) alphabetic = false;
    const UChar32 lower = u_tolower(cp);
    if (letters != nullptr) letters->insert(lower);
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, lower, error);
    if (error) throw ParseError("cannot encode '" + word + "'", line_no);
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return alphabetic;
}

std::size_t code_points(const std::string& word) {
  const auto* s = reinterpret_cast<const uint8_t*>(word.data());
  const auto length = static_cast<int32_t>(word.size());
  std::size_t count = 0;
  for (int32_t i = 0; i < length;) {
    UChar32 cp = 0;
    U8_NEXT(s, i, length, cp);
    ++count;
  }
  return count;
}

}  // namespace

CorpusLexicon parse_lexicon(std::istream& in, std::size_t keep) {
  std::map<std::string, double> merged;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  std::string line;
  std::string folded;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_ws(line);
    if (fields.empty() || fields.front().front() == '#') continue;
    if (columns == 0) {
      columns = fields.size();
      if (columns != 2 && columns != 3)
        throw ParseError("expected 2 or 3 columns, found " +
                             std::to_string(columns),
                         line_no);
    }
    if (fields.size() != columns)
      throw ParseError("expected " + std::to_string(columns) +
                           " columns, found " + std::to_string(fields.size()),
                       line_no);
    std::string word;
    double frequency = 0.0;
    if (columns == 3) {
      parse_number(fields[0], line_no, "rank");
      frequency = parse_number(fields[1], line_no, "frequency");
      word = fields[2];
    } else {
      word = fields[0];
      frequency = parse_number(fields[1], line_no, "frequency");
    }
    if (!(frequency > 0.0))
      throw ParseError("frequency must be positive", line_no);
    if (!fold_word(word, line_no, folded, nullptr)) continue;
    merged[folded] += frequency;
  }

  CorpusLexicon lexicon;
  lexicon.entries.reserve(merged.size());
  for (auto& [word, frequency] : merged)
    lexicon.entries.push_back({word, frequency});
  // std::map iteration is lexicographic, so a stable sort by frequency
  // leaves ties in lexicographic order.
  std::stable_sort(lexicon.entries.begin(), lexicon.entries.end(),
                   [](const LexiconEntry& x, const LexiconEntry& y) {
                     return x.frequency > y.frequency;
                   });
  if (lexicon.entries.size() > keep) {
    lexicon.entries.resize(keep);
  } else if (lexicon.entries.size() < keep) {
    lexicon.warning = "frequency list has only " +
                      std::to_string(lexicon.entries.size()) +
                      " alphabetic words (wanted " + std::to_string(keep) + ")";
  }

  std::set<UChar32> letters;
  for (const auto& entry : lexicon.entries)
    fold_word(entry.word, 0, folded, &letters);
  lexicon.alphabet_size = letters.size();
  return lexicon;
}

CorpusLexicon load_lexicon(const std::filesystem::path& path,
                           std::size_t keep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frequency list " + path.string());
  return parse_lexicon(in, keep);
}

void write_lexicon(std::ostream& out, const CorpusLexicon& lexicon) {
  char buf[64];
  for (const auto& entry : lexicon.entries) {
    const auto result = std::to_chars(buf, buf + sizeof buf, entry.frequency);
    out << entry.word << '\t' << std::string_view(buf, result.ptr - buf)
        << '\n';
  }
}

std::vector<std::size_t> lexicon_lengths(const CorpusLexicon& lexicon) {
  std::vector<std::size_t> lengths;
  lengths.reserve(lexicon.entries.size());
  for (const auto& entry : lexicon.entries)
    lengths.push_back(code_points(entry.word));
  return lengths;
}

FrequencyModel corpus_model(const CorpusLexicon& lexicon) {
  if (lexicon.entries.empty())
    throw std::invalid_argument("corpus_model: empty lexicon");
  double total = 0.0;
  for (const auto& entry : lexicon.entries) total += entry.frequency;
  FrequencyModel model{FrequencyKind::Corpus, {}};
  model.probs.reserve(lexicon.entries.size());
  for (const auto& entry : lexicon.entries)
    model.probs.push_back(entry.frequency / total);
  return model;
}

}  // namespace zla
