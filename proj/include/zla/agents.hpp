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

#ifndef ZLA_AGENTS_HPP_
#define ZLA_AGENTS_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zla/lexicodes.hpp"
#include "zla/lstm.hpp"
#include "zla/rng.hpp"

namespace zla {

enum class DecodeMode { Sample, Greedy };

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Speaker: one-hot input -> initial hidden state, then an LSTM fed its own
/// previous symbol (start-of-sequence first) with a softmax over the a
/// symbols at every step.
template <typename Scalar>
struct SpeakerParams {
  Matrix<Scalar> input_projection;   // h x n; column r-1 is rank r's h_0
  Matrix<Scalar> cell_projection;    // h x n, or empty when c_0 = 0
  LstmWeights<Scalar> lstm;          // e -> h
  Matrix<Scalar> symbol_embeddings;  // e x (a+1); column a is start-of-sequence
  Matrix<Scalar> output_weights;     // a x h
  Matrix<Scalar> output_bias;        // a x 1

  static SpeakerParams zeros(Eigen::Index n, Eigen::Index a, Eigen::Index hidden,
                             Eigen::Index embedding, bool project_cell = false) {
    SpeakerParams p;
    p.input_projection = Matrix<Scalar>::Zero(hidden, n);
    if (project_cell) p.cell_projection = Matrix<Scalar>::Zero(hidden, n);
    p.lstm = LstmWeights<Scalar>(embedding, hidden);
    p.symbol_embeddings = Matrix<Scalar>::Zero(embedding, a + 1);
    p.output_weights = Matrix<Scalar>::Zero(a, hidden);
    p.output_bias = Matrix<Scalar>::Zero(a, 1);
    return p;
  }

  SpeakerParams zeros_like() const {
    return zeros(n(), alphabet_size(), hidden_size(), embedding_size(),
                 projects_cell());
  }

  Eigen::Index n() const { return input_projection.cols(); }
  Eigen::Index alphabet_size() const { return output_weights.rows(); }
  Eigen::Index hidden_size() const { return input_projection.rows(); }
  Eigen::Index embedding_size() const { return symbol_embeddings.rows(); }
  bool projects_cell() const { return cell_projection.size() != 0; }

  template <typename F>
  void visit(F&& f) {
    f("input_projection", input_projection);
    if (projects_cell()) f("cell_projection", cell_projection);
    lstm.visit("lstm.", f);
    f("symbol_embeddings", symbol_embeddings);
    f("output_weights", output_weights);
    f("output_bias", output_bias);
  }
  template <typename F>
  void visit(F&& f) const {
    f("input_projection", input_projection);
    if (projects_cell()) f("cell_projection", cell_projection);
    lstm.visit("lstm.", f);
    f("symbol_embeddings", symbol_embeddings);
    f("output_weights", output_weights);
    f("output_bias", output_bias);
  }

  /// Throws std::invalid_argument on inconsistent shapes or non-finite entries.
  void check() const {
    const auto h = hidden_size();
    const auto e = embedding_size();
    const auto a = alphabet_size();
    bool ok = h > 0 && e > 0 && a >= 2 && n() > 0 &&
              lstm.hidden_size() == h && lstm.input_size() == e &&
              lstm.input_weights.rows() == 4 * h && lstm.bias.rows() == 4 * h &&
              lstm.bias.cols() == 1 && symbol_embeddings.cols() == a + 1 &&
              output_weights.cols() == h && output_bias.rows() == a &&
              output_bias.cols() == 1;
    if (projects_cell())
      ok = ok && cell_projection.rows() == h && cell_projection.cols() == n();
    if (!ok) throw std::invalid_argument("speaker parameters have inconsistent shapes");
    visit([](const std::string& name, const Matrix<Scalar>& m) {
      if (!m.allFinite())
        throw std::invalid_argument("speaker tensor " + name + " is not finite");
    });
  }
};

/// Listener: LSTM over the message symbols (eos included) from a zero state;
/// the state after eos goes through a linear layer to n logits.
template <typename Scalar>
struct ListenerParams {
  Matrix<Scalar> symbol_embeddings;  // e x a
  LstmWeights<Scalar> lstm;          // e -> h
  Matrix<Scalar> output_weights;     // n x h
  Matrix<Scalar> output_bias;        // n x 1

  static ListenerParams zeros(Eigen::Index n, Eigen::Index a, Eigen::Index hidden,
                              Eigen::Index embedding) {
    ListenerParams p;
    p.symbol_embeddings = Matrix<Scalar>::Zero(embedding, a);
    p.lstm = LstmWeights<Scalar>(embedding, hidden);
    p.output_weights = Matrix<Scalar>::Zero(n, hidden);
    p.output_bias = Matrix<Scalar>::Zero(n, 1);
    return p;
  }

  ListenerParams zeros_like() const {
    return zeros(n(), alphabet_size(), hidden_size(), embedding_size());
  }

  Eigen::Index n() const { return output_weights.rows(); }
  Eigen::Index alphabet_size() const { return symbol_embeddings.cols(); }
  Eigen::Index hidden_size() const { return output_weights.cols(); }
  Eigen::Index embedding_size() const { return symbol_embeddings.rows(); }

  template <typename F>
  void visit(F&& f) {
    f("symbol_embeddings", symbol_embeddings);
    lstm.visit("lstm.", f);
    f("output_weights", output_weights);
    f("output_bias", output_bias);
  }
  template <typename F>
  void visit(F&& f) const {
    f("symbol_embeddings", symbol_embeddings);
    lstm.visit("lstm.", f);
    f("output_weights", output_weights);
    f("output_bias", output_bias);
  }

  void check() const {
    const auto h = hidden_size();
    const auto e = embedding_size();
    bool ok = h > 0 && e > 0 && alphabet_size() >= 2 && n() > 0 &&
              lstm.hidden_size() == h && lstm.input_size() == e &&
              lstm.input_weights.rows() == 4 * h && lstm.bias.rows() == 4 * h &&
              lstm.bias.cols() == 1 && output_bias.rows() == n() &&
              output_bias.cols() == 1;
    if (!ok) throw std::invalid_argument("listener parameters have inconsistent shapes");
    visit([](const std::string& name, const Matrix<Scalar>& m) {
      if (!m.allFinite())
        throw std::invalid_argument("listener tensor " + name + " is not finite");
    });
  }
};

/// Every weight matrix ~ U(+-1/sqrt(fan_in)) with fan_in its second
/// dimension (for the embedding tables, the embedding width); biases zero.
/// embedding = 0 selects the hidden size.
template <typename Scalar = double>
SpeakerParams<Scalar> init_speaker(Eigen::Index n, Eigen::Index a,
                                   Eigen::Index hidden, Eigen::Index embedding,
                                   Rng& rng, bool project_cell = false) {
  if (n <= 0 || a < 2 || hidden <= 0 || embedding < 0)
    throw std::invalid_argument("init_speaker: bad dimensions");
  if (embedding == 0) embedding = hidden;
  auto p = SpeakerParams<Scalar>::zeros(n, a, hidden, embedding, project_cell);
  fill_uniform(p.input_projection, n, rng);
  if (project_cell) fill_uniform(p.cell_projection, n, rng);
  p.lstm.initialize(rng);
  fill_uniform(p.symbol_embeddings, embedding, rng);
  fill_uniform(p.output_weights, hidden, rng);
  return p;
}

template <typename Scalar = double>
ListenerParams<Scalar> init_listener(Eigen::Index n, Eigen::Index a,
                                     Eigen::Index hidden, Eigen::Index embedding,
                                     Rng& rng) {
  if (n <= 0 || a < 2 || hidden <= 0 || embedding < 0)
    throw std::invalid_argument("init_listener: bad dimensions");
  if (embedding == 0) embedding = hidden;
  auto p = ListenerParams<Scalar>::zeros(n, a, hidden, embedding);
  fill_uniform(p.symbol_embeddings, embedding, rng);
  p.lstm.initialize(rng);
  fill_uniform(p.output_weights, hidden, rng);
  return p;
}

// ---------------------------------------------------------------------------
// Batched speaker
// ---------------------------------------------------------------------------

/// Output of a batched speaker unroll. Row t of log_probs/entropies is the
/// t-th symbol of each message; the appended eos of a truncated message and
/// rows past a message's end are zero.
template <typename Scalar>
struct SpeakerRollout {
  std::vector<std::size_t> ranks;
  std::size_t max_len = 0;
  std::vector<Message> messages;
  Matrix<Scalar> log_probs;  // max_len x B
  Matrix<Scalar> entropies;  // max_len x B

  // Tape, filled only when recording.
  std::vector<LstmStepCache<Scalar>> steps;
  std::vector<Matrix<Scalar>> hidden;       // h x k per step
  std::vector<Matrix<Scalar>> log_softmax;  // a x k per step
  bool recorded = false;

  std::size_t batch_size() const { return ranks.size(); }
};

namespace detail {

template <typename Scalar>
Symbol sample_column(const Matrix<Scalar>& probs, Eigen::Index col, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const Eigen::Index a = probs.rows();
  for (Eigen::Index s = 0; s < a; ++s) {
    acc += static_cast<double>(probs(s, col));
    if (u < acc) return static_cast<Symbol>(s);
  }
  return static_cast<Symbol>(a - 1);
}

template <typename Scalar>
Symbol argmax_column(const Matrix<Scalar>& log_softmax, Eigen::Index col) {
  Eigen::Index best = 0;
  log_softmax.col(col).maxCoeff(&best);
  return static_cast<Symbol>(best);
}

// Shared unroll. When `forced` is non-null the given messages are replayed
// (teacher forcing) instead of decoding.
template <typename Scalar>
SpeakerRollout<Scalar> speaker_unroll(const SpeakerParams<Scalar>& params,
                                      std::span<const std::size_t> ranks,
                                      std::size_t max_len, DecodeMode mode,
                                      Rng* rng, const std::vector<Message>* forced,
                                      bool record) {
  if (max_len == 0) throw std::invalid_argument("max_len must be positive");
  const auto batch = static_cast<Eigen::Index>(ranks.size());
  const Eigen::Index a = params.alphabet_size();
  const Eigen::Index sos = a;
  for (std::size_t r : ranks)
    if (r == 0 || r > static_cast<std::size_t>(params.n()))
      throw std::invalid_argument("speaker input rank out of range");
  if (mode == DecodeMode::Sample && forced == nullptr && rng == nullptr)
    throw std::invalid_argument("sample mode needs a random stream");
  if (forced != nullptr) {
    if (forced->size() != ranks.size())
      throw std::invalid_argument("forced messages do not match the batch");
    for (const auto& m : *forced) validate(m, Alphabet{static_cast<std::size_t>(a)}, max_len);
  }

  SpeakerRollout<Scalar> out;
  out.ranks.assign(ranks.begin(), ranks.end());
  out.max_len = max_len;
  out.recorded = record;
  out.messages.resize(ranks.size());
  out.log_probs = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(max_len), batch);
  out.entropies = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(max_len), batch);

  const Eigen::Index hs = params.hidden_size();
  Matrix<Scalar> h(hs, batch);
  Matrix<Scalar> c = Matrix<Scalar>::Zero(hs, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const auto col = static_cast<Eigen::Index>(ranks[j] - 1);
    h.col(j) = params.input_projection.col(col);
    if (params.projects_cell()) c.col(j) = params.cell_projection.col(col);
  }

  // input term of every symbol, computed once for the whole rollout
  const Matrix<Scalar> projected = params.lstm.input_weights * params.symbol_embeddings;
  std::vector<char> finished(ranks.size(), 0);
  std::vector<Eigen::Index> active;
  for (std::size_t t = 0; t + 1 < max_len; ++t) {
    active.clear();
    for (Eigen::Index j = 0; j < batch; ++j) {
      if (finished[j]) continue;
      if (forced != nullptr && t >= (*forced)[j].length()) continue;
      active.push_back(j);
    }
    if (active.empty()) break;
    const auto k = static_cast<Eigen::Index>(active.size());

    Matrix<Scalar> x(params.embedding_size(), record ? k : 0);
    Matrix<Scalar> pre(projected.rows(), k);
    for (Eigen::Index q = 0; q < k; ++q) {
      const auto& sofar = out.messages[active[q]].symbols;
      const Eigen::Index in = t == 0 ? sos : sofar.back();
      pre.col(q) = projected.col(in);
      if (record) x.col(q) = params.symbol_embeddings.col(in);
    }
    Matrix<Scalar> hk = gather_columns<Scalar>(h, active);
    Matrix<Scalar> ck = gather_columns<Scalar>(c, active);
    LstmStepCache<Scalar> cache;
    lstm_forward_projected(params.lstm, std::move(pre), x, hk, ck, record ? &cache : nullptr);

    Matrix<Scalar> logits = params.output_weights * hk;
    logits.colwise() += params.output_bias.col(0);
    Matrix<Scalar> logp = log_softmax(logits);
    const Matrix<Scalar> probs = logp.array().exp().matrix();

    for (Eigen::Index q = 0; q < k; ++q) {
      const Eigen::Index j = active[q];
      Symbol s;
      if (forced != nullptr) {
        s = (*forced)[j].symbols[t];
      } else if (mode == DecodeMode::Greedy) {
        s = argmax_column(logp, q);
      } else {
        s = sample_column(probs, q, *rng);
      }
      const Scalar entropy = -(probs.col(q).array() * logp.col(q).array()).sum();
      const auto row = static_cast<Eigen::Index>(t);
      out.log_probs(row, j) = logp(static_cast<Eigen::Index>(s), q);
      out.entropies(row, j) = entropy;
      out.messages[j].symbols.push_back(s);
      if (s == kEos) finished[j] = 1;
    }

    scatter_columns<Scalar>(hk, active, h);
    scatter_columns<Scalar>(ck, active, c);
    if (record) {
      cache.columns = active;
      out.steps.push_back(std::move(cache));
      out.hidden.push_back(std::move(hk));
      out.log_softmax.push_back(std::move(logp));
    }
  }
  // Out of budget: eos is appended without a policy step.
  for (auto& m : out.messages)
    if (m.symbols.empty() || m.symbols.back() != kEos) m.symbols.push_back(kEos);
  return out;
}

}  // namespace detail

template <typename Scalar>
SpeakerRollout<Scalar> speaker_rollout(const SpeakerParams<Scalar>& params,
                                       std::span<const std::size_t> ranks,
                                       std::size_t max_len, DecodeMode mode,
                                       Rng* rng, bool record = false) {
  return detail::speaker_unroll(params, ranks, max_len, mode, rng, nullptr, record);
}

/// Replays known messages through the speaker (always recorded).
template <typename Scalar>
SpeakerRollout<Scalar> speaker_replay(const SpeakerParams<Scalar>& params,
                                      std::span<const std::size_t> ranks,
                                      const std::vector<Message>& messages,
                                      std::size_t max_len) {
  return detail::speaker_unroll(params, ranks, max_len, DecodeMode::Greedy,
                                nullptr, &messages, true);
}

/// Accumulates into grad the gradient of
///   sum_j advantage_weight[j] * log P(m_j) - entropy_weight[j] * sum_t H_jt
/// where H_jt is the entropy of step t's categorical.
template <typename Scalar>
void speaker_backward_batch(const SpeakerParams<Scalar>& params,
                            const SpeakerRollout<Scalar>& rollout,
                            std::span<const Scalar> advantage_weight,
                            std::span<const Scalar> entropy_weight,
                            SpeakerParams<Scalar>& grad) {
  const auto batch = static_cast<Eigen::Index>(rollout.batch_size());
  if (advantage_weight.size() != rollout.batch_size() ||
      entropy_weight.size() != rollout.batch_size())
    throw std::invalid_argument("speaker_backward: weight vectors do not match the batch");
  if (!rollout.recorded)
    throw std::invalid_argument("speaker_backward: rollout has no tape");
  const Eigen::Index a = params.alphabet_size();
  const Eigen::Index hs = params.hidden_size();
  const Eigen::Index sos = a;

  Matrix<Scalar> dh_full = Matrix<Scalar>::Zero(hs, batch);
  Matrix<Scalar> dc_full = Matrix<Scalar>::Zero(hs, batch);
  for (std::size_t t = rollout.steps.size(); t-- > 0;) {
    const auto& cache = rollout.steps[t];
    const auto& logp = rollout.log_softmax[t];
    const auto& cols = cache.columns;
    const auto k = static_cast<Eigen::Index>(cols.size());

    Matrix<Scalar> dlogits(a, k);
    for (Eigen::Index q = 0; q < k; ++q) {
      const Eigen::Index j = cols[q];
      const auto s = static_cast<Eigen::Index>(rollout.messages[j].symbols[t]);
      const Scalar entropy = rollout.entropies(static_cast<Eigen::Index>(t), j);
      auto p = logp.col(q).array().exp();
      dlogits.col(q) = (-advantage_weight[j] * p +
                        entropy_weight[j] * p * (logp.col(q).array() + entropy))
                           .matrix();
      dlogits(s, q) += advantage_weight[j];
    }
    const auto& hk = rollout.hidden[t];
    grad.output_weights.noalias() += dlogits * hk.transpose();
    grad.output_bias.col(0) += dlogits.rowwise().sum();

    Matrix<Scalar> dh = gather_columns<Scalar>(dh_full, cols);
    dh.noalias() += params.output_weights.transpose() * dlogits;
    Matrix<Scalar> dc = gather_columns<Scalar>(dc_full, cols);
    Matrix<Scalar> dx = lstm_backward(params.lstm, cache, dh, dc, grad.lstm);
    scatter_columns<Scalar>(dh, cols, dh_full);
    scatter_columns<Scalar>(dc, cols, dc_full);
    for (Eigen::Index q = 0; q < k; ++q) {
      const auto& symbols = rollout.messages[cols[q]].symbols;
      const Eigen::Index in = t == 0 ? sos : static_cast<Eigen::Index>(symbols[t - 1]);
      grad.symbol_embeddings.col(in) += dx.col(q);
    }
  }
  for (Eigen::Index j = 0; j < batch; ++j) {
    const auto col = static_cast<Eigen::Index>(rollout.ranks[j] - 1);
    grad.input_projection.col(col) += dh_full.col(j);
    if (params.projects_cell()) grad.cell_projection.col(col) += dc_full.col(j);
  }
}

// ---------------------------------------------------------------------------
// Batched listener
// ---------------------------------------------------------------------------

template <typename Scalar>
struct ListenerRollout {
  std::vector<Message> messages;
  Matrix<Scalar> hidden;  // h x B, state after consuming eos
  Matrix<Scalar> logits;  // n x B
  std::vector<LstmStepCache<Scalar>> steps;
};

template <typename Scalar>
ListenerRollout<Scalar> listener_rollout(const ListenerParams<Scalar>& params,
                                         std::vector<Message> messages,
                                         bool record = false) {
  const auto a = static_cast<std::size_t>(params.alphabet_size());
  std::size_t longest = 0;
  for (const auto& m : messages) {
    if (m.symbols.empty() || m.symbols.back() != kEos)
      throw std::invalid_argument("listener input is not eos-terminated");
    for (std::size_t i = 0; i < m.symbols.size(); ++i) {
      if (m.symbols[i] >= a)
        throw std::invalid_argument("symbol " + std::to_string(m.symbols[i]) +
                                    " outside the listener alphabet");
      if (m.symbols[i] == kEos && i + 1 != m.symbols.size())
        throw std::invalid_argument("listener input has an interior eos");
    }
    longest = std::max(longest, m.length());
  }

  const auto batch = static_cast<Eigen::Index>(messages.size());
  const Eigen::Index hs = params.hidden_size();
  ListenerRollout<Scalar> out;
  Matrix<Scalar> h = Matrix<Scalar>::Zero(hs, batch);
  Matrix<Scalar> c = Matrix<Scalar>::Zero(hs, batch);
  const Matrix<Scalar> projected = params.lstm.input_weights * params.symbol_embeddings;
  std::vector<Eigen::Index> active;
  for (std::size_t t = 0; t < longest; ++t) {
    active.clear();
    for (Eigen::Index j = 0; j < batch; ++j)
      if (t < messages[j].length()) active.push_back(j);
    const auto k = static_cast<Eigen::Index>(active.size());
    Matrix<Scalar> x(params.embedding_size(), record ? k : 0);
    Matrix<Scalar> pre(projected.rows(), k);
    for (Eigen::Index q = 0; q < k; ++q) {
      const auto in = static_cast<Eigen::Index>(messages[active[q]].symbols[t]);
      pre.col(q) = projected.col(in);
      if (record) x.col(q) = params.symbol_embeddings.col(in);
    }
    Matrix<Scalar> hk = gather_columns<Scalar>(h, active);
    Matrix<Scalar> ck = gather_columns<Scalar>(c, active);
    LstmStepCache<Scalar> cache;
    lstm_forward_projected(params.lstm, std::move(pre), x, hk, ck, record ? &cache : nullptr);
    scatter_columns<Scalar>(hk, active, h);
    scatter_columns<Scalar>(ck, active, c);
    if (record) {
      cache.columns = active;
      out.steps.push_back(std::move(cache));
    }
  }
  out.logits = params.output_weights * h;
  out.logits.colwise() += params.output_bias.col(0);
  out.hidden = std::move(h);
  out.messages = std::move(messages);
  return out;
}

/// Accumulates into grad the gradient given dL/dlogits (n x B).
template <typename Scalar>
void listener_backward_batch(const ListenerParams<Scalar>& params,
                             const ListenerRollout<Scalar>& rollout,
                             const Matrix<Scalar>& dlogits,
                             ListenerParams<Scalar>& grad) {
  if (dlogits.rows() != params.n() || dlogits.cols() != rollout.logits.cols())
    throw std::invalid_argument("listener_backward: gradient shape mismatch");
  std::size_t longest = 0;
  for (const auto& m : rollout.messages) longest = std::max(longest, m.length());
  if (rollout.steps.size() != longest)
    throw std::invalid_argument("listener_backward: rollout has no tape");

  grad.output_weights.noalias() += dlogits * rollout.hidden.transpose();
  grad.output_bias.col(0) += dlogits.rowwise().sum();
  Matrix<Scalar> dh_full = params.output_weights.transpose() * dlogits;
  Matrix<Scalar> dc_full = Matrix<Scalar>::Zero(dh_full.rows(), dh_full.cols());
  for (std::size_t t = rollout.steps.size(); t-- > 0;) {
    const auto& cache = rollout.steps[t];
    const auto& cols = cache.columns;
    Matrix<Scalar> dh = gather_columns<Scalar>(dh_full, cols);
    Matrix<Scalar> dc = gather_columns<Scalar>(dc_full, cols);
    Matrix<Scalar> dx = lstm_backward(params.lstm, cache, dh, dc, grad.lstm);
    scatter_columns<Scalar>(dh, cols, dh_full);
    scatter_columns<Scalar>(dc, cols, dc_full);
    for (std::size_t q = 0; q < cols.size(); ++q) {
      const auto s = rollout.messages[cols[q]].symbols[t];
      grad.symbol_embeddings.col(static_cast<Eigen::Index>(s)) +=
          dx.col(static_cast<Eigen::Index>(q));
    }
  }
}

/// Per-column cross-entropy -log softmax(logits)[target-1]; if dlogits is
/// non-null it receives weight[j] * (softmax - onehot) per column.
template <typename Scalar>
std::vector<Scalar> cross_entropy(const Matrix<Scalar>& logits,
                                  std::span<const std::size_t> targets,
                                  std::span<const Scalar> weight,
                                  Matrix<Scalar>* dlogits) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.cols())
    throw std::invalid_argument("cross_entropy: target count mismatch");
  Matrix<Scalar> logp = log_softmax(logits);
  std::vector<Scalar> loss(targets.size());
  if (dlogits != nullptr) *dlogits = logp.array().exp().matrix();
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const auto row = static_cast<Eigen::Index>(targets[j] - 1);
    if (targets[j] == 0 || row >= logits.rows())
      throw std::invalid_argument("cross_entropy: target out of range");
    loss[j] = -logp(row, col);
    if (dlogits != nullptr) {
      dlogits->coeffRef(row, col) -= Scalar(1);
      dlogits->col(col) *= weight[j];
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Single-example interface
// ---------------------------------------------------------------------------

template <typename Scalar>
struct SpeakerTrace {
  std::size_t input_rank = 0;
  std::size_t max_len = 0;
  Message message;
  std::vector<Scalar> step_log_probs;
  std::vector<Scalar> step_entropies;

  Scalar log_prob() const {
    Scalar total(0);
    for (Scalar v : step_log_probs) total += v;
    return total;
  }
  Scalar entropy() const {
    Scalar total(0);
    for (Scalar v : step_entropies) total += v;
    return total;
  }
};

template <typename Scalar>
SpeakerTrace<Scalar> speaker_forward(const SpeakerParams<Scalar>& params,
                                     std::size_t input_rank, std::size_t max_len,
                                     DecodeMode mode, Rng* rng = nullptr) {
  const std::size_t ranks[] = {input_rank};
  auto roll = speaker_rollout(params, std::span<const std::size_t>(ranks), max_len,
                              mode, rng, false);
  SpeakerTrace<Scalar> trace;
  trace.input_rank = input_rank;
  trace.max_len = max_len;
  trace.message = std::move(roll.messages[0]);
  for (std::size_t t = 0; t < trace.message.length(); ++t) {
    trace.step_log_probs.push_back(roll.log_probs(static_cast<Eigen::Index>(t), 0));
    trace.step_entropies.push_back(roll.entropies(static_cast<Eigen::Index>(t), 0));
  }
  return trace;
}

/// Gradient of advantage * log P(m) - entropy_coeff * sum_t H_t. The trace
/// must come from these parameters; a replay that disagrees with the logged
/// log-probabilities is rejected.
template <typename Scalar>
SpeakerParams<Scalar> speaker_backward(const SpeakerParams<Scalar>& params,
                                       const SpeakerTrace<Scalar>& trace,
                                       Scalar advantage, Scalar entropy_coeff) {
  if (trace.step_log_probs.size() != trace.message.length() ||
      trace.step_entropies.size() != trace.message.length())
    throw std::invalid_argument("speaker trace length does not match its message");
  const std::size_t ranks[] = {trace.input_rank};
  const std::vector<Message> msgs{trace.message};
  auto roll = speaker_replay(params, std::span<const std::size_t>(ranks), msgs,
                             trace.max_len);
  for (std::size_t t = 0; t < trace.message.length(); ++t) {
    const double replayed = static_cast<double>(roll.log_probs(static_cast<Eigen::Index>(t), 0));
    const double logged = static_cast<double>(trace.step_log_probs[t]);
    const double tol = 1e-6 * (1.0 + std::abs(logged));
    if (!(std::abs(replayed - logged) <= tol))
      throw std::invalid_argument("speaker trace was not produced by these parameters");
  }
  auto grad = params.zeros_like();
  const Scalar adv[] = {advantage};
  const Scalar ent[] = {entropy_coeff};
  speaker_backward_batch(params, roll, std::span<const Scalar>(adv),
                         std::span<const Scalar>(ent), grad);
  return grad;
}

template <typename Scalar>
struct ListenerOutput {
  Vector<Scalar> logits;
  Vector<Scalar> hidden_at_eos;
};

template <typename Scalar>
ListenerOutput<Scalar> listener_forward(const ListenerParams<Scalar>& params,
                                        const Message& message) {
  auto roll = listener_rollout(params, std::vector<Message>{message}, false);
  return {roll.logits.col(0), roll.hidden.col(0)};
}

template <typename Scalar>
struct ListenerGradient {
  Scalar loss;
  ListenerParams<Scalar> grad;
};

/// Cross-entropy against target_rank and its gradient.
template <typename Scalar>
ListenerGradient<Scalar> listener_backward(const ListenerParams<Scalar>& params,
                                           const Message& message,
                                           std::size_t target_rank) {
  if (target_rank == 0 || target_rank > static_cast<std::size_t>(params.n()))
    throw std::invalid_argument("listener target out of range");
  auto roll = listener_rollout(params, std::vector<Message>{message}, true);
  const std::size_t targets[] = {target_rank};
  const Scalar weight[] = {Scalar(1)};
  Matrix<Scalar> dlogits;
  auto loss = cross_entropy(roll.logits, std::span<const std::size_t>(targets),
                            std::span<const Scalar>(weight), &dlogits);
  ListenerGradient<Scalar> out{loss[0], params.zeros_like()};
  listener_backward_batch(params, roll, dlogits, out.grad);
  return out;
}

}  // namespace zla

#endif  // ZLA_AGENTS_HPP_
