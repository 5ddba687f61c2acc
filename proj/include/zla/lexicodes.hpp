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

#ifndef ZLA_LEXICODES_HPP_
#define ZLA_LEXICODES_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "zla/rng.hpp"

namespace zla {

/// Symbol ids: 0 is eos, 1..a-1 are the ordinary symbols s_1..s_{a-1}.
using Symbol = std::uint32_t;
inline constexpr Symbol kEos = 0;

struct Alphabet {
  std::size_t size = 2;  // a, including eos

  std::size_t content_symbols() const { return size - 1; }
  bool contains(Symbol s) const { return s < size; }
};

/// A message always ends with exactly one eos; its length counts that eos.
struct Message {
  std::vector<Symbol> symbols;

  std::size_t length() const { return symbols.size(); }
  std::span<const Symbol> content() const {
    return std::span<const Symbol>(symbols).first(symbols.empty() ? 0 : symbols.size() - 1);
  }

  bool operator==(const Message&) const = default;
  auto operator<=>(const Message&) const = default;
};

struct MessageHash {
  std::size_t operator()(const Message& m) const noexcept;
};

/// One message per input rank (messages[r-1] encodes rank r).
struct Code {
  std::vector<Message> messages;
  Alphabet alphabet;
  std::size_t max_len = 0;

  std::size_t n() const { return messages.size(); }
  std::vector<std::size_t> lengths() const;
};

/// Throws std::invalid_argument if the message is not eos-terminated, holds
/// an interior eos, uses an out-of-range symbol or exceeds max_len.
void validate(const Message& message, const Alphabet& alphabet,
              std::size_t max_len);
/// Validates every message and, when require_unique, pairwise distinctness.
void validate(const Code& code, bool require_unique = true);
std::size_t distinct_messages(const Code& code);

/// M_a^max_len = sum_{j=1..max_len} (a-1)^{j-1}, in double precision (exact
/// while below 2^53; full-scale values only need ordering).
double message_space_size(std::size_t a, std::size_t max_len);

/// Length the optimal code assigns to rank r.
std::size_t oc_length(std::size_t rank, std::size_t a);

/// Length-optimal code: rank r gets a message of length oc_length(r, a); within
/// a length class messages are handed out in lexicographic order.
/// Throws CapacityError when the message space is too small.
Code optimal_code(std::size_t n, std::size_t a, std::size_t max_len);

/// P_l for l = 1..max_len (index l-1) of a uniform random typist with
/// eos probability 1/a and truncation at max_len.
std::vector<double> mt_length_pmf(std::size_t a, std::size_t max_len);

/// One unconstrained monkey-typed message.
Message random_typing_message(std::size_t a, std::size_t max_len, Rng& rng);

struct MonkeyTypingOptions {
  /// Inputs receive messages in the order they are drawn without replacement
  /// from the power law; with rank_order they are served most frequent first,
  /// which hands the frequent inputs the short messages before collisions
  /// set in.
  bool rank_order = false;
};

/// Monkey-typing code with rejection of already used messages.
/// Throws CapacityError when the message space is too small.
Code monkey_typing(std::size_t n, std::size_t a, std::size_t max_len, Rng& rng,
                   const MonkeyTypingOptions& options = {});

/// Keeps every rank's message length and redraws content symbols i.i.d. from
/// the template's unigram distribution (eos excluded). Control messages need
/// not be distinct.
Code control_code(const Code& templ, Rng& rng);

/// `rank<TAB>ids<TAB>eos` lines, preceded by `#` metadata lines.
void write_code(std::ostream& out, const Code& code);
/// Accepts the format written by write_code. Missing metadata is inferred
/// from the messages. Throws ParseError.
Code read_code(std::istream& in);

}  // namespace zla

#endif  // ZLA_LEXICODES_HPP_
