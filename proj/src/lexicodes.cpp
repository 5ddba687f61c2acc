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

#include "zla/lexicodes.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "zla/errors.hpp"
#include "zla/freqmodel.hpp"

namespace zla {

std::size_t MessageHash::operator()(const Message& m) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Symbol s : m.symbols) {
    h ^= s;
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

std::vector<std::size_t> Code::lengths() const {
  std::vector<std::size_t> out;
  out.reserve(messages.size());
  for (const auto& m : messages) out.push_back(m.length());
  return out;
}

void validate(const Message& message, const Alphabet& alphabet,
              std::size_t max_len) {
  if (message.symbols.empty() || message.symbols.back() != kEos)
    throw std::invalid_argument("message is not eos-terminated");
  if (message.length() > max_len)
    throw std::invalid_argument("message longer than max_len");
  for (std::size_t i = 0; i + 1 < message.symbols.size(); ++i) {
    const Symbol s = message.symbols[i];
    if (s == kEos) throw std::invalid_argument("interior eos in message");
    if (!alphabet.contains(s))
      throw std::invalid_argument("symbol " + std::to_string(s) +
                                  " outside alphabet");
  }
}

void validate(const Code& code, bool require_unique) {
  if (code.alphabet.size < 2)
    throw std::invalid_argument("alphabet needs at least one symbol plus eos");
  for (const auto& m : code.messages) validate(m, code.alphabet, code.max_len);
  if (require_unique && distinct_messages(code) != code.n())
    throw std::invalid_argument("code messages are not pairwise distinct");
}

std::size_t distinct_messages(const Code& code) {
  std::unordered_set<Message, MessageHash> seen(code.messages.begin(),
                                                code.messages.end());
  return seen.size();
}

double message_space_size(std::size_t a, std::size_t max_len) {
  if (a < 2) throw std::invalid_argument("alphabet size must be at least 2");
  double total = 0.0;
  double per_length = 1.0;
  for (std::size_t j = 1; j <= max_len; ++j) {
    total += per_length;
    per_length *= static_cast<double>(a - 1);
  }
  return total;
}

std::size_t oc_length(std::size_t rank, std::size_t a) {
  if (rank == 0) throw std::invalid_argument("ranks are 1-based");
  if (a < 2) throw std::invalid_argument("alphabet size must be at least 2");
  const auto target = static_cast<double>(rank);
  double covered = 0.0;
  double per_length = 1.0;
  std::size_t length = 0;
  while (covered < target) {
    ++length;
    covered += per_length;
    per_length *= static_cast<double>(a - 1);
  }
  return length;
}

Code optimal_code(std::size_t n, std::size_t a, std::size_t max_len) {
  const double capacity = message_space_size(a, max_len);
  if (capacity < static_cast<double>(n)) throw CapacityError(capacity, n);
  Code code{{}, Alphabet{a}, max_len};
  code.messages.reserve(n);
  const std::size_t base = a - 1;
  std::size_t length = 0;
  std::uint64_t next_in_class = 0;
  for (std::size_t r = 1; r <= n; ++r) {
    const std::size_t l = oc_length(r, a);
    if (l != length) {
      length = l;
      next_in_class = 0;
    }
    // The k-th message of a class, in lexicographic order, spells k in base
    // (a-1) with l-1 digits, most significant first, digit d -> symbol d+1.
    Message m;
    m.symbols.assign(l, kEos);
    std::uint64_t k = next_in_class++;
    for (std::size_t pos = l - 1; pos-- > 0;) {
      m.symbols[pos] = static_cast<Symbol>(k % base) + 1;
      k /= base;
    }
    code.messages.push_back(std::move(m));
  }
  return code;
}

std::vector<double> mt_length_pmf(std::size_t a, std::size_t max_len) {
  if (a < 2) throw std::invalid_argument("alphabet size must be at least 2");
  if (max_len == 0) throw std::invalid_argument("max_len must be positive");
  const double p = 1.0 / static_cast<double>(a);
  std::vector<double> pmf(max_len);
  double survive = 1.0;  // (1-p)^{l-1}
  for (std::size_t l = 1; l < max_len; ++l) {
    pmf[l - 1] = p * survive;
    survive *= 1.0 - p;
  }
  pmf[max_len - 1] = survive;
  return pmf;
}

Message random_typing_message(std::size_t a, std::size_t max_len, Rng& rng) {
  Message m;
  for (std::size_t pos = 0; pos + 1 < max_len; ++pos) {
    const auto key = static_cast<Symbol>(rng.index(a));
    if (key == kEos) break;
    m.symbols.push_back(key);
  }
  m.symbols.push_back(kEos);
  return m;
}

Code monkey_typing(std::size_t n, std::size_t a, std::size_t max_len, Rng& rng,
                   const MonkeyTypingOptions& options) {
  const double capacity = message_space_size(a, max_len);
  if (capacity < static_cast<double>(n)) throw CapacityError(capacity, n);

  std::vector<std::size_t> order(n);
  if (options.rank_order)
    std::iota(order.begin(), order.end(), std::size_t{0});
  else
    order = sampling_order(power_law(n), rng);

  Code code{std::vector<Message>(n), Alphabet{a}, max_len};
  std::unordered_set<Message, MessageHash> used;
  used.reserve(n);
  for (std::size_t idx : order) {
    Message m;
    do {
      m = random_typing_message(a, max_len, rng);
    } while (used.contains(m));
    used.insert(m);
    code.messages[idx] = std::move(m);
  }
  return code;
}

Code control_code(const Code& templ, Rng& rng) {
  const std::size_t a = templ.alphabet.size;
  std::vector<double> cumulative(a, 0.0);
  double total = 0.0;
  for (const auto& m : templ.messages)
    for (Symbol s : m.content()) cumulative[s] += 1.0;
  for (std::size_t s = 0; s < a; ++s) {
    total += cumulative[s];
    cumulative[s] = total;
  }

  Code out{{}, templ.alphabet, templ.max_len};
  out.messages.reserve(templ.n());
  for (const auto& m : templ.messages) {
    Message c;
    c.symbols.reserve(m.length());
    for (std::size_t i = 0; i + 1 < m.length(); ++i) {
      const double u = rng.uniform() * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      if (it == cumulative.end()) --it;
      c.symbols.push_back(static_cast<Symbol>(it - cumulative.begin()));
    }
    c.symbols.push_back(kEos);
    out.messages.push_back(std::move(c));
  }
  return out;
}

void write_code(std::ostream& out, const Code& code) {
  out << "# alphabet_size=" << code.alphabet.size << '\n'
      << "# max_len=" << code.max_len << '\n';
  for (std::size_t r = 0; r < code.n(); ++r) {
    out << r + 1 << '\t';
    const auto content = code.messages[r].content();
    for (std::size_t i = 0; i < content.size(); ++i) {
      if (i > 0) out << ',';
      out << content[i];
    }
    out << "\teos\n";
  }
}

namespace {

std::size_t parse_count(const std::string& text, std::size_t line_no) {
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected an integer, found '" + text + "'", line_no);
  }
  if (pos != text.size() || text.front() == '-')
    throw ParseError("expected an integer, found '" + text + "'", line_no);
  return static_cast<std::size_t>(value);
}

}  // namespace

Code read_code(std::istream& in) {
  Code code;
  std::size_t declared_a = 0;
  std::size_t declared_max_len = 0;
  std::size_t max_symbol = 0;
  std::size_t longest = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      const std::string value = line.substr(eq + 1);
      if (key == "alphabet_size") declared_a = parse_count(value, line_no);
      if (key == "max_len") declared_max_len = parse_count(value, line_no);
      continue;
    }
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw ParseError("expected rank<TAB>symbols<TAB>eos", line_no);
    const std::size_t rank = parse_count(line.substr(0, t1), line_no);
    if (rank != code.n() + 1)
      throw ParseError("ranks must be consecutive from 1", line_no);
    if (line.substr(t2 + 1) != "eos")
      throw ParseError("message must end with eos", line_no);
    Message m;
    const std::string ids = line.substr(t1 + 1, t2 - t1 - 1);
    std::size_t start = 0;
    while (start < ids.size()) {
      auto comma = ids.find(',', start);
      if (comma == std::string::npos) comma = ids.size();
      const std::size_t id = parse_count(ids.substr(start, comma - start), line_no);
      if (id == kEos) throw ParseError("interior eos", line_no);
      m.symbols.push_back(static_cast<Symbol>(id));
      max_symbol = std::max(max_symbol, id);
      start = comma + 1;
    }
    m.symbols.push_back(kEos);
    longest = std::max(longest, m.length());
    code.messages.push_back(std::move(m));
  }
  code.alphabet.size = declared_a != 0 ? declared_a : std::max<std::size_t>(max_symbol + 1, 2);
  code.max_len = declared_max_len != 0 ? declared_max_len : longest;
  if (max_symbol >= code.alphabet.size)
    throw ParseError("symbol id exceeds declared alphabet size", line_no);
  if (longest > code.max_len)
    throw ParseError("message exceeds declared max_len", line_no);
  return code;
}

}  // namespace zla
