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

#ifndef ZLA_LSTM_HPP_
#define ZLA_LSTM_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zla/rng.hpp"

namespace zla {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Fills m with U(-1/sqrt(fan_in), 1/sqrt(fan_in)) draws in column-major order.
template <typename Scalar>
void fill_uniform(Matrix<Scalar>& m, Eigen::Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index k = 0; k < m.size(); ++k)
    m.data()[k] = static_cast<Scalar>(rng.uniform(-bound, bound));
}

template <typename Scalar>
bool all_finite(const Matrix<Scalar>& m) {
  return m.allFinite();
}

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) + (-x).exp()).inverse();
}

/// tanh through the vectorized exp; Eigen's own tanh is scalar for double.
template <typename Derived>
auto fast_tanh(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const auto e = (Scalar(-2) * x.abs()).exp().eval();
  return (x.sign() * (Scalar(1) - e) / (Scalar(1) + e)).eval();
}

/// Single-layer LSTM cell. Gate rows are stacked [input; forget; cell; output]
/// and one bias vector is used (no separate recurrent bias).
///
///   a = W_x x + W_h h' + b
///   i = sig(a_i)  f = sig(a_f)  g = tanh(a_g)  o = sig(a_o)
///   c = f * c' + i * g
///   h = o * tanh(c)
template <typename Scalar>
struct LstmWeights {
  Matrix<Scalar> input_weights;      // 4h x e
  Matrix<Scalar> recurrent_weights;  // 4h x h
  Matrix<Scalar> bias;               // 4h x 1

  LstmWeights() = default;
  LstmWeights(Eigen::Index input_size, Eigen::Index hidden_size)
      : input_weights(Matrix<Scalar>::Zero(4 * hidden_size, input_size)),
        recurrent_weights(Matrix<Scalar>::Zero(4 * hidden_size, hidden_size)),
        bias(Matrix<Scalar>::Zero(4 * hidden_size, 1)) {}

  Eigen::Index hidden_size() const { return recurrent_weights.cols(); }
  Eigen::Index input_size() const { return input_weights.cols(); }

  /// Weights drawn from U(+-1/sqrt(fan_in)); biases stay zero.
  void initialize(Rng& rng) {
    fill_uniform(input_weights, input_size(), rng);
    fill_uniform(recurrent_weights, hidden_size(), rng);
    bias.setZero();
  }

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + "input_weights", input_weights);
    f(prefix + "recurrent_weights", recurrent_weights);
    f(prefix + "bias", bias);
  }
  template <typename F>
  void visit(const std::string& prefix, F&& f) const {
    f(prefix + "input_weights", input_weights);
    f(prefix + "recurrent_weights", recurrent_weights);
    f(prefix + "bias", bias);
  }
};

/// Activations kept for the backward pass of one step. Columns are the
/// batch entries listed in `columns` (indices into the full batch).
template <typename Scalar>
struct LstmStepCache {
  std::vector<Eigen::Index> columns;
  Matrix<Scalar> x, h_prev, c_prev;
  Matrix<Scalar> i, f, g, o;
  Matrix<Scalar> tanh_c;
};

/// As lstm_forward, with the input term W_x x already in `pre`. Lets callers
/// with a small input vocabulary project it once per sequence.
template <typename Scalar>
void lstm_forward_projected(const LstmWeights<Scalar>& w, Matrix<Scalar> pre,
                            const Matrix<Scalar>& x, Matrix<Scalar>& h,
                            Matrix<Scalar>& c, LstmStepCache<Scalar>* cache) {
  const Eigen::Index hs = w.hidden_size();
  pre.noalias() += w.recurrent_weights * h;
  pre.colwise() += w.bias.col(0);

  Matrix<Scalar> i = sigmoid(pre.topRows(hs).array()).matrix();
  Matrix<Scalar> f = sigmoid(pre.middleRows(hs, hs).array()).matrix();
  Matrix<Scalar> g = fast_tanh(pre.middleRows(2 * hs, hs).array()).matrix();
  Matrix<Scalar> o = sigmoid(pre.bottomRows(hs).array()).matrix();

  Matrix<Scalar> c_next = (f.array() * c.array() + i.array() * g.array()).matrix();
  Matrix<Scalar> tanh_c = fast_tanh(c_next.array()).matrix();
  Matrix<Scalar> h_next = (o.array() * tanh_c.array()).matrix();

  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = std::move(h);
    cache->c_prev = std::move(c);
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->g = std::move(g);
    cache->o = std::move(o);
    cache->tanh_c = tanh_c;
  }
  h = std::move(h_next);
  c = std::move(c_next);
}

/// Advances (h, c) in place for the given compact batch.
template <typename Scalar>
void lstm_forward(const LstmWeights<Scalar>& w, const Matrix<Scalar>& x,
                  Matrix<Scalar>& h, Matrix<Scalar>& c,
                  LstmStepCache<Scalar>* cache) {
  lstm_forward_projected<Scalar>(w, w.input_weights * x, x, h, c, cache);
}

/// Back-propagates one step. On entry dh/dc hold the gradient w.r.t. the
/// step's outputs (compact batch); on exit they hold the gradient w.r.t.
/// h_prev/c_prev. Weight gradients are accumulated into grad; the gradient
/// w.r.t. the step input is returned.
template <typename Scalar>
Matrix<Scalar> lstm_backward(const LstmWeights<Scalar>& w,
                             const LstmStepCache<Scalar>& cache,
                             Matrix<Scalar>& dh, Matrix<Scalar>& dc,
                             LstmWeights<Scalar>& grad) {
  const Eigen::Index hs = w.hidden_size();
  const auto one = Scalar(1);
  auto tc = cache.tanh_c.array();
  auto i = cache.i.array();
  auto f = cache.f.array();
  auto g = cache.g.array();
  auto o = cache.o.array();

  Matrix<Scalar> dpre(4 * hs, dh.cols());
  dc.array() += dh.array() * o * (one - tc.square());
  dpre.topRows(hs) = (dc.array() * g * i * (one - i)).matrix();
  dpre.middleRows(hs, hs) =
      (dc.array() * cache.c_prev.array() * f * (one - f)).matrix();
  dpre.middleRows(2 * hs, hs) = (dc.array() * i * (one - g.square())).matrix();
  dpre.bottomRows(hs) = (dh.array() * tc * o * (one - o)).matrix();
  dc.array() *= f;

  grad.input_weights.noalias() += dpre * cache.x.transpose();
  grad.recurrent_weights.noalias() += dpre * cache.h_prev.transpose();
  grad.bias.col(0) += dpre.rowwise().sum();
  dh.noalias() = w.recurrent_weights.transpose() * dpre;
  return w.input_weights.transpose() * dpre;
}

template <typename Scalar>
Matrix<Scalar> gather_columns(const Matrix<Scalar>& m,
                              std::span<const Eigen::Index> columns) {
  Matrix<Scalar> out(m.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = m.col(columns[k]);
  return out;
}

template <typename Scalar>
void scatter_columns(const Matrix<Scalar>& compact,
                     std::span<const Eigen::Index> columns,
                     Matrix<Scalar>& full) {
  for (std::size_t k = 0; k < columns.size(); ++k)
    full.col(columns[k]) = compact.col(static_cast<Eigen::Index>(k));
}

/// Column-wise log-softmax.
template <typename Scalar>
Matrix<Scalar> log_softmax(const Matrix<Scalar>& logits) {
  Matrix<Scalar> out = logits;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const Scalar top = out.col(j).maxCoeff();
    const Scalar lse =
        top + std::log((out.col(j).array() - top).exp().sum());
    out.col(j).array() -= lse;
  }
  return out;
}

}  // namespace zla

#endif  // ZLA_LSTM_HPP_
