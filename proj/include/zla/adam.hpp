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

#ifndef ZLA_ADAM_HPP_
#define ZLA_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "zla/lstm.hpp"

namespace zla {

/// Adam with bias correction:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
/// Moments are kept per tensor in the parameters' visit order.
template <typename Scalar>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t timestep = 0;
  std::vector<Matrix<Scalar>> first_moment;
  std::vector<Matrix<Scalar>> second_moment;
};

template <typename Scalar, typename Params>
void adam_step(AdamState<Scalar>& state, Params& params, const Params& grads,
               double learning_rate) {
  std::vector<Matrix<Scalar>*> targets;
  std::vector<const Matrix<Scalar>*> gradients;
  params.visit([&](const std::string&, Matrix<Scalar>& m) { targets.push_back(&m); });
  grads.visit([&](const std::string&, const Matrix<Scalar>& m) { gradients.push_back(&m); });
  if (targets.size() != gradients.size())
    throw std::invalid_argument("adam_step: parameter/gradient tensor count mismatch");
  for (std::size_t k = 0; k < targets.size(); ++k)
    if (targets[k]->rows() != gradients[k]->rows() ||
        targets[k]->cols() != gradients[k]->cols())
      throw std::invalid_argument("adam_step: parameter/gradient shape mismatch");

  if (state.first_moment.empty()) {
    for (const auto* t : targets) {
      state.first_moment.push_back(Matrix<Scalar>::Zero(t->rows(), t->cols()));
      state.second_moment.push_back(Matrix<Scalar>::Zero(t->rows(), t->cols()));
    }
  } else if (state.first_moment.size() != targets.size()) {
    throw std::invalid_argument("adam_step: optimizer state does not match parameters");
  }

  ++state.timestep;
  const auto t = static_cast<double>(state.timestep);
  const auto b1 = static_cast<Scalar>(state.beta1);
  const auto b2 = static_cast<Scalar>(state.beta2);
  const auto correction1 = static_cast<Scalar>(1.0 - std::pow(state.beta1, t));
  const auto correction2 = static_cast<Scalar>(1.0 - std::pow(state.beta2, t));
  const auto lr = static_cast<Scalar>(learning_rate);
  const auto eps = static_cast<Scalar>(state.epsilon);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    auto m = state.first_moment[k].array();
    auto v = state.second_moment[k].array();
    auto g = gradients[k]->array();
    if (m.rows() != g.rows() || m.cols() != g.cols())
      throw std::invalid_argument("adam_step: optimizer state shape mismatch");
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.square();
    targets[k]->array() -=
        lr * (m / correction1) / ((v / correction2).sqrt() + eps);
  }
}

}  // namespace zla

#endif  // ZLA_ADAM_HPP_
