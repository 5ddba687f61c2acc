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

#ifndef ZLA_ERRORS_HPP_
#define ZLA_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zla {

// Invalid arguments are reported with std::invalid_argument. The types below
// cover the remaining failure classes callers are expected to distinguish.

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Raised when the message space M_a^max_len cannot hold the requested
/// number of distinct messages.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(double capacity, std::size_t requested)
      : std::runtime_error("message space holds " + std::to_string(capacity) +
                           " messages but " + std::to_string(requested) +
                           " are required"),
        capacity_(capacity),
        requested_(requested) {}

  double capacity() const { return capacity_; }
  std::size_t requested() const { return requested_; }

 private:
  double capacity_;
  std::size_t requested_;
};

}  // namespace zla

#endif  // ZLA_ERRORS_HPP_
