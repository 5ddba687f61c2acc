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

#include "zla/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace zla {

ChiSquareResult chi_square_gof(std::span<const double> observed,
                               std::span<const double> probs,
                               double min_expected) {
  if (observed.size() != probs.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  const double mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (!(total > 0.0) || !(mass > 0.0))
    throw std::invalid_argument("chi_square_gof: empty sample or distribution");

  std::vector<double> obs;
  std::vector<double> exp;
  double o = 0.0;
  double e = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    o += observed[k];
    e += total * probs[k] / mass;
    if (e >= min_expected) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp.empty()) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      obs.back() += o;
      exp.back() += e;
    }
  }

  ChiSquareResult res;
  res.cells = exp.size();
  for (std::size_t k = 0; k < exp.size(); ++k) {
    if (exp[k] <= 0.0) {
      if (obs[k] > 0.0) {
        res.statistic = INFINITY;
        res.p_value = 0.0;
        res.dof = res.cells > 1 ? res.cells - 1 : 0;
        return res;
      }
      continue;
    }
    const double d = obs[k] - exp[k];
    res.statistic += d * d / exp[k];
  }
  res.dof = res.cells > 1 ? res.cells - 1 : 0;
  if (res.dof == 0) {
    res.p_value = 1.0;
    return res;
  }
  const boost::math::chi_squared dist(static_cast<double>(res.dof));
  res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  return res;
}

SampleSummary summarize(std::span<const double> sample) {
  SampleSummary s;
  s.size = sample.size();
  if (sample.empty()) return s;
  s.mean = std::accumulate(sample.begin(), sample.end(), 0.0) /
           static_cast<double>(sample.size());
  if (sample.size() > 1) {
    double ss = 0.0;
    for (double v : sample) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(sample.size() - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(sample.size()));
  }
  return s;
}

double welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test: each sample needs at least two values");
  const auto sa = summarize(a);
  const auto sb = summarize(b);
  const double va = sa.variance / static_cast<double>(sa.size);
  const double vb = sb.variance / static_cast<double>(sb.size);
  if (!(va + vb > 0.0))
    throw std::invalid_argument("welch_t_test: both samples have zero variance");
  const double t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) /
                    (va * va / static_cast<double>(sa.size - 1) +
                     vb * vb / static_cast<double>(sb.size - 1));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace zla
