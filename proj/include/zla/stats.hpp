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

#ifndef ZLA_STATS_HPP_
#define ZLA_STATS_HPP_

#include <cstddef>
#include <span>

namespace zla {

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t cells = 0;  // after pooling
};

/// Pearson goodness of fit of observed counts against a distribution (probs
/// need not be normalised). Adjacent cells are pooled left to right until
/// each expected count reaches min_expected; a short tail joins the last
/// pooled cell.
ChiSquareResult chi_square_gof(std::span<const double> observed,
                               std::span<const double> probs,
                               double min_expected = 5.0);

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  std::size_t size = 0;
};

SampleSummary summarize(std::span<const double> sample);

/// Two-sided Welch's unequal-variance t-test. Throws std::invalid_argument
/// if either sample has fewer than two values or both have zero variance.
double welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace zla

#endif  // ZLA_STATS_HPP_
