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

#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "zla/agents.hpp"

using namespace zla;

namespace {

Message msg(std::initializer_list<Symbol> s) { return Message{std::vector<Symbol>(s)}; }

template <typename Params>
bool identical(const Params& x, const Params& y) {
  std::vector<Matrix<double>> a, b;
  x.visit([&](const std::string&, const Matrix<double>& m) { a.push_back(m); });
  y.visit([&](const std::string&, const Matrix<double>& m) { b.push_back(m); });
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].rows() != b[k].rows() || a[k].cols() != b[k].cols() || a[k] != b[k]) return false;
  return true;
}

template <typename Params>
double max_abs(const Params& p) {
  double m = 0.0;
  p.visit([&](const std::string&, const Matrix<double>& t) {
    if (t.size() > 0) m = std::max(m, t.cwiseAbs().maxCoeff());
  });
  return m;
}

}  // namespace

TEST_SUITE("agents") {

TEST_CASE("initialization bounds, centering and determinism") {
  Rng rng(1);
  const auto sp = init_speaker<double>(100, 5, 100, 0, rng);
  CHECK(sp.input_projection.cwiseAbs().maxCoeff() <= 0.1);
  CHECK(sp.output_weights.cwiseAbs().maxCoeff() <= 0.1);
  CHECK(sp.lstm.recurrent_weights.cwiseAbs().maxCoeff() <= 0.1);
  CHECK(sp.lstm.bias.isZero());
  CHECK(sp.output_bias.isZero());
  CHECK(sp.symbol_embeddings.rows() == 100);
  CHECK(sp.symbol_embeddings.cols() == 6);  // a symbols plus start-of-sequence

  Rng big(2);
  Matrix<double> m(1000, 100);
  fill_uniform(m, 100, big);
  const double mean = m.mean();
  const double se = 0.1 / std::sqrt(3.0) / std::sqrt(double(m.size()));
  CHECK(std::abs(mean) < 3.0 * se);
  CHECK(m.cwiseAbs().maxCoeff() <= 0.1);

  Rng a(9), b(9);
  CHECK(identical(init_speaker<double>(7, 4, 6, 3, a, true), init_speaker<double>(7, 4, 6, 3, b, true)));
  CHECK(identical(init_listener<double>(7, 4, 6, 3, a), init_listener<double>(7, 4, 6, 3, b)));
  CHECK_THROWS_AS(init_speaker<double>(0, 4, 6, 3, a), std::invalid_argument);
}

TEST_CASE("speaker decoding") {
  Rng rng(3);
  const auto sp = init_speaker<double>(20, 4, 8, 0, rng);
  for (std::size_t r = 1; r <= 20; ++r) {
    const auto tr = speaker_forward(sp, r, 6, DecodeMode::Sample, &rng);
    CHECK(tr.message.length() >= 1);
    CHECK(tr.message.length() <= 6);
    CHECK_NOTHROW(validate(tr.message, Alphabet{4}, 6));
    REQUIRE(tr.step_log_probs.size() == tr.message.length());
    for (std::size_t t = 0; t < tr.message.length(); ++t) {
      CHECK(tr.step_log_probs[t] <= 0.0);
      CHECK(tr.step_entropies[t] >= 0.0);
      CHECK(tr.step_entropies[t] <= std::log(4.0) + 1e-12);
    }
  }
  const auto g1 = speaker_forward(sp, 5, 6, DecodeMode::Greedy);
  const auto g2 = speaker_forward(sp, 5, 6, DecodeMode::Greedy);
  CHECK(g1.message == g2.message);
  CHECK(g1.step_log_probs == g2.step_log_probs);
  CHECK_THROWS_AS(speaker_forward(sp, 21, 6, DecodeMode::Greedy), std::invalid_argument);
  CHECK_THROWS_AS(speaker_forward(sp, 1, 6, DecodeMode::Sample), std::invalid_argument);

  // max_len = 1 leaves no policy step: only the forced eos
  const auto forced = speaker_forward(sp, 1, 1, DecodeMode::Greedy);
  CHECK(forced.message == msg({kEos}));
  CHECK(forced.step_log_probs == std::vector<double>{0.0});
}

TEST_CASE("speaker values agree with the scalar oracle") {
  Rng rng(4);
  const auto sp = init_speaker<double>(6, 4, 5, 3, rng, true);
  for (std::size_t r = 1; r <= 6; ++r) {
    const auto tr = speaker_forward(sp, r, 5, DecodeMode::Sample, &rng);
    const auto ref = oracle::speaker_value(sp, r, tr.message, 5);
    for (std::size_t t = 0; t < ref.log_probs.size(); ++t) {
      CHECK(tr.step_log_probs[t] == doctest::Approx(ref.log_probs[t]).epsilon(1e-12));
      CHECK(tr.step_entropies[t] == doctest::Approx(ref.entropies[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("batched rollout matches single-input decoding") {
  Rng rng(5);
  const auto sp = init_speaker<double>(10, 5, 8, 0, rng);
  std::vector<std::size_t> ranks{3, 1, 10, 3, 7};
  const auto roll = speaker_rollout(sp, std::span<const std::size_t>(ranks), 7, DecodeMode::Greedy, nullptr);
  for (std::size_t j = 0; j < ranks.size(); ++j)
    CHECK(roll.messages[j] == speaker_forward(sp, ranks[j], 7, DecodeMode::Greedy).message);
}

TEST_CASE("untrained speaker starts near uniform over symbols") {
  Rng rng(6);
  const std::size_t a = 10;
  const auto sp = init_speaker<double>(1000, a, 250, 0, rng);
  std::vector<double> counts(a, 0.0);
  const std::size_t draws = 100000;
  std::vector<std::size_t> ranks(1000);
  for (std::size_t k = 0; k < draws; k += ranks.size()) {
    for (auto& r : ranks) r = 1 + rng.index(1000);
    const auto roll = speaker_rollout(sp, std::span<const std::size_t>(ranks), 2, DecodeMode::Sample, &rng);
    for (const auto& m : roll.messages) counts[m.symbols[0]] += 1.0;
  }
  double tv = 0.0;
  for (double c : counts) tv += std::abs(c / draws - 1.0 / a);
  CHECK(tv / 2.0 < 0.02);
}

TEST_CASE("hidden states stay inside the unit box") {
  Rng rng(7);
  auto sp = init_speaker<double>(5, 3, 6, 0, rng);
  for (auto* m : {&sp.lstm.input_weights, &sp.lstm.recurrent_weights}) *m *= 40.0;
  const std::vector<std::size_t> ranks{1, 2, 3, 4, 5};
  const auto roll = speaker_rollout(sp, std::span<const std::size_t>(ranks), 12,
                                    DecodeMode::Sample, &rng, true);
  for (const auto& h : roll.hidden) CHECK(h.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("listener forward") {
  Rng rng(8);
  const auto li = init_listener<double>(7, 4, 6, 0, rng);
  const auto out = listener_forward(li, msg({1, 2, 3, kEos}));
  CHECK(out.logits.size() == 7);
  CHECK(out.hidden_at_eos.size() == 6);
  CHECK(out.hidden_at_eos.cwiseAbs().maxCoeff() <= 1.0);
  const auto again = listener_forward(li, msg({1, 2, 3, kEos}));
  CHECK(again.logits == out.logits);
  const auto swapped = listener_forward(li, msg({2, 1, 3, kEos}));
  CHECK((swapped.hidden_at_eos - out.hidden_at_eos).cwiseAbs().maxCoeff() > 1e-6);

  oracle::Vec hidden;
  const auto ref = oracle::listener_logits(li, msg({1, 2, 3, kEos}), &hidden);
  for (long k = 0; k < 7; ++k) CHECK(out.logits(k) == doctest::Approx(ref[k]).epsilon(1e-12));
  for (long k = 0; k < 6; ++k) CHECK(out.hidden_at_eos(k) == doctest::Approx(hidden[k]).epsilon(1e-12));

  CHECK_THROWS_AS(listener_forward(li, msg({4, kEos})), std::invalid_argument);
  CHECK_THROWS_AS(listener_forward(li, msg({1, kEos, 2, kEos})), std::invalid_argument);
  CHECK_THROWS_AS(listener_forward(li, msg({1, 2})), std::invalid_argument);
}

TEST_CASE("listener loss identities") {
  Rng rng(9);
  auto li = init_listener<double>(5, 3, 4, 0, rng);
  li.output_weights.setZero();
  li.output_bias.setZero();
  const auto uniform = listener_backward(li, msg({1, kEos}), 2);
  CHECK(uniform.loss == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  // d loss / d bias = softmax - onehot
  for (long k = 0; k < 5; ++k)
    CHECK(uniform.grad.output_bias(k, 0) == doctest::Approx(0.2 - (k == 1 ? 1.0 : 0.0)));

  Rng r2(10);
  const auto trained = init_listener<double>(5, 3, 4, 0, r2);
  for (std::size_t t = 1; t <= 5; ++t) CHECK(listener_backward(trained, msg({2, 1, kEos}), t).loss >= 0.0);
  CHECK_THROWS_AS(listener_backward(trained, msg({kEos}), 6), std::invalid_argument);
}

TEST_CASE("speaker gradient matches finite differences of the oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const auto sp = init_speaker<double>(5, 3, 4, 0, rng, seed % 2 == 0);
    const std::size_t rank = 1 + rng.index(5);
    const auto tr = speaker_forward(sp, rank, 4, DecodeMode::Sample, &rng);
    const double adv = rng.uniform(-2.0, 2.0);
    const double ent = rng.uniform(0.0, 1.5);
    const auto grad = speaker_backward(sp, tr, adv, ent);
    const auto bad = oracle::check_gradient<SpeakerParams<double>>(
        sp, grad, [&](const SpeakerParams<double>& p) {
          return oracle::speaker_objective(p, rank, tr.message, 4, adv, ent);
        });
    CAPTURE(seed);
    CHECK(bad.empty());
  }
}

TEST_CASE("speaker gradient degenerate cases") {
  Rng rng(12);
  const auto sp = init_speaker<double>(5, 3, 4, 0, rng);
  const auto tr = speaker_forward(sp, 2, 5, DecodeMode::Sample, &rng);
  CHECK(max_abs(speaker_backward(sp, tr, 0.0, 0.0)) == 0.0);

  const auto g1 = speaker_backward(sp, tr, 0.7, 0.0);
  const auto g2 = speaker_backward(sp, tr, 1.4, 0.0);
  std::vector<Matrix<double>> a, b;
  g1.visit([&](const std::string&, const Matrix<double>& m) { a.push_back(m); });
  g2.visit([&](const std::string&, const Matrix<double>& m) { b.push_back(m); });
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK((2.0 * a[k] - b[k]).cwiseAbs().maxCoeff() <= 1e-14);

  Rng other(13);
  const auto stranger = init_speaker<double>(5, 3, 4, 0, other);
  CHECK_THROWS_AS(speaker_backward(stranger, tr, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("listener gradient matches finite differences of the oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(100 + seed);
    const auto li = init_listener<double>(5, 3, 4, 0, rng);
    const auto m = random_typing_message(3, 5, rng);
    const std::size_t target = 1 + rng.index(5);
    const auto res = listener_backward(li, m, target);
    CHECK(res.loss == doctest::Approx(oracle::listener_loss(li, m, target)).epsilon(1e-12));
    const auto bad = oracle::check_gradient<ListenerParams<double>>(
        li, res.grad,
        [&](const ListenerParams<double>& p) { return oracle::listener_loss(p, m, target); });
    CAPTURE(seed);
    CHECK(bad.empty());
  }
}

TEST_CASE("batched backward equals the sum of single-example gradients") {
  Rng rng(21);
  const auto sp = init_speaker<double>(6, 4, 5, 0, rng);
  const std::vector<std::size_t> ranks{2, 6, 2, 1};
  auto roll = speaker_rollout(sp, std::span<const std::size_t>(ranks), 5, DecodeMode::Sample, &rng, true);
  const std::vector<double> adv{0.5, -1.0, 2.0, 0.25};
  const std::vector<double> ent{0.1, 0.2, 0.0, 0.3};
  auto batched = sp.zeros_like();
  speaker_backward_batch(sp, roll, std::span<const double>(adv), std::span<const double>(ent), batched);

  auto summed = sp.zeros_like();
  for (std::size_t j = 0; j < ranks.size(); ++j) {
    SpeakerTrace<double> tr;
    tr.input_rank = ranks[j];
    tr.max_len = 5;
    tr.message = roll.messages[j];
    for (std::size_t t = 0; t < tr.message.length(); ++t) {
      tr.step_log_probs.push_back(roll.log_probs(long(t), long(j)));
      tr.step_entropies.push_back(roll.entropies(long(t), long(j)));
    }
    const auto g = speaker_backward(sp, tr, adv[j], ent[j]);
    std::vector<Matrix<double>*> dst;
    summed.visit([&](const std::string&, Matrix<double>& m) { dst.push_back(&m); });
    std::size_t k = 0;
    g.visit([&](const std::string&, const Matrix<double>& m) { *dst[k++] += m; });
  }
  std::vector<Matrix<double>> a, b;
  batched.visit([&](const std::string&, const Matrix<double>& m) { a.push_back(m); });
  summed.visit([&](const std::string&, const Matrix<double>& m) { b.push_back(m); });
  for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k] - b[k]).cwiseAbs().maxCoeff() <= 1e-12);
}

}  // TEST_SUITE
