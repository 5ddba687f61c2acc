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

#include "zla/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "zla/checkpoint.hpp"
#include "zla/errors.hpp"
#include "zla/io.hpp"

namespace zla {

namespace {

// Examples per forward/backward chunk. Gradients are averaged over the whole
// batch and the baseline is fixed within it, so chunking is exact.
constexpr std::size_t kChunk = 512;

const char* reduction_name(EntropyReduction r) {
  return r == EntropyReduction::Sum ? "sum" : "mean";
}

const char* baseline_name(BaselineMode m) {
  return m == BaselineMode::BatchMean ? "batch_mean" : "per_example";
}

template <typename Params>
bool params_finite(const Params& p) {
  bool ok = true;
  p.visit([&](const std::string&, const Matrix<double>& m) { ok = ok && m.allFinite(); });
  return ok;
}

}  // namespace

void TrainConfig::validate() const {
  if (n == 0 || a < 2 || max_len == 0 || speaker_hidden == 0 ||
      listener_hidden == 0 || episodes == 0 || batches_per_episode == 0 ||
      batch_size == 0)
    throw std::invalid_argument("training counts must be positive (and a >= 2)");
  if (speaker_hidden < listener_hidden)
    throw std::invalid_argument("speaker hidden size must be >= listener hidden size");
  if (!(learning_rate > 0.0) || !(entropy_coeff >= 0.0) || !(length_penalty >= 0.0))
    throw std::invalid_argument("learning rate must be positive, coefficients non-negative");
  if (input_distribution == FrequencyKind::Corpus)
    throw std::invalid_argument("training inputs are power-law or uniform");
  const double capacity = message_space_size(a, max_len);
  if (capacity < static_cast<double>(n)) throw CapacityError(capacity, n);
}

FrequencyModel TrainConfig::input_model() const {
  return input_distribution == FrequencyKind::Uniform ? uniform(n) : power_law(n);
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
  j = nlohmann::json{
      {"n", cfg.n},
      {"a", cfg.a},
      {"max_len", cfg.max_len},
      {"speaker_hidden", cfg.speaker_hidden},
      {"listener_hidden", cfg.listener_hidden},
      {"embedding", cfg.embedding},
      {"learning_rate", cfg.learning_rate},
      {"entropy_coeff", cfg.entropy_coeff},
      {"entropy_reduction", reduction_name(cfg.entropy_reduction)},
      {"length_penalty", cfg.length_penalty},
      {"episodes", cfg.episodes},
      {"batches_per_episode", cfg.batches_per_episode},
      {"batch_size", cfg.batch_size},
      {"seed", cfg.seed},
      {"input_distribution", to_string(cfg.input_distribution)},
      {"baseline_mode", baseline_name(cfg.baseline_mode)},
      {"project_cell", cfg.project_cell},
      {"initial_cell_state", cfg.project_cell ? "projected" : "zero"},
      {"stop_on_success", cfg.stop_on_success},
      {"verbose", cfg.verbose},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
  TrainConfig d;
  cfg.n = j.value("n", d.n);
  cfg.a = j.value("a", d.a);
  cfg.max_len = j.value("max_len", d.max_len);
  cfg.speaker_hidden = j.value("speaker_hidden", d.speaker_hidden);
  cfg.listener_hidden = j.value("listener_hidden", d.listener_hidden);
  cfg.embedding = j.value("embedding", d.embedding);
  cfg.learning_rate = j.value("learning_rate", d.learning_rate);
  cfg.entropy_coeff = j.value("entropy_coeff", d.entropy_coeff);
  const auto reduction = j.value("entropy_reduction", std::string("sum"));
  if (reduction != "sum" && reduction != "mean")
    throw std::invalid_argument("entropy_reduction must be sum or mean");
  cfg.entropy_reduction = reduction == "mean" ? EntropyReduction::Mean : EntropyReduction::Sum;
  cfg.length_penalty = j.value("length_penalty", d.length_penalty);
  cfg.episodes = j.value("episodes", d.episodes);
  cfg.batches_per_episode = j.value("batches_per_episode", d.batches_per_episode);
  cfg.batch_size = j.value("batch_size", d.batch_size);
  cfg.seed = j.value("seed", d.seed);
  const auto dist = j.value("input_distribution", std::string("power_law"));
  if (dist != "power_law" && dist != "uniform")
    throw std::invalid_argument("input_distribution must be power_law or uniform");
  cfg.input_distribution = dist == "uniform" ? FrequencyKind::Uniform : FrequencyKind::PowerLaw;
  const auto baseline = j.value("baseline_mode", std::string("batch_mean"));
  if (baseline != "batch_mean" && baseline != "per_example")
    throw std::invalid_argument("baseline_mode must be batch_mean or per_example");
  cfg.baseline_mode = baseline == "per_example" ? BaselineMode::PerExample : BaselineMode::BatchMean;
  cfg.project_cell = j.value("project_cell", d.project_cell);
  cfg.stop_on_success = j.value("stop_on_success", d.stop_on_success);
  cfg.verbose = j.value("verbose", d.verbose);
}

SurrogateTerms surrogate_terms(double loss, std::size_t message_length,
                               const BaselineState& baseline,
                               double length_penalty) {
  SurrogateTerms terms;
  terms.penalized_loss = loss + length_penalty * static_cast<double>(message_length);
  terms.speaker_advantage = terms.penalized_loss - baseline.mean;
  return terms;
}

BatchResult surrogate_gradients(const SpeakerParams<double>& speaker,
                                const ListenerParams<double>& listener,
                                std::span<const std::size_t> ranks,
                                const TrainConfig& cfg,
                                const BaselineState& baseline, Rng& rng) {
  if (ranks.empty()) throw std::invalid_argument("surrogate_gradients: empty batch");
  BatchResult out{speaker.zeros_like(), listener.zeros_like(), {}, {}, 0.0, 0.0, 0.0};
  const double inv_batch = 1.0 / static_cast<double>(ranks.size());
  double correct = 0.0;
  double length_sum = 0.0;
  for (std::size_t start = 0; start < ranks.size(); start += kChunk) {
    const auto chunk = ranks.subspan(start, std::min(kChunk, ranks.size() - start));
    auto roll = speaker_rollout(speaker, chunk, cfg.max_len, DecodeMode::Sample, &rng, true);
    auto heard = listener_rollout(listener, roll.messages, true);

    const std::vector<double> ce_weight(chunk.size(), inv_batch);
    Matrix<double> dlogits;
    const auto losses = cross_entropy(heard.logits, chunk,
                                      std::span<const double>(ce_weight), &dlogits);
    listener_backward_batch(listener, heard, dlogits, out.listener_grad);

    std::vector<double> adv_weight(chunk.size());
    std::vector<double> ent_weight(chunk.size());
    for (std::size_t j = 0; j < chunk.size(); ++j) {
      const std::size_t length = roll.messages[j].length();
      const auto terms = surrogate_terms(losses[j], length, baseline, cfg.length_penalty);
      adv_weight[j] = terms.speaker_advantage * inv_batch;
      ent_weight[j] = cfg.entropy_coeff * inv_batch;
      if (cfg.entropy_reduction == EntropyReduction::Mean)
        ent_weight[j] /= static_cast<double>(length);
      out.losses.push_back(losses[j]);
      out.penalized_losses.push_back(terms.penalized_loss);
      length_sum += static_cast<double>(length);
      Eigen::Index guess = 0;
      heard.logits.col(static_cast<Eigen::Index>(j)).maxCoeff(&guess);
      if (static_cast<std::size_t>(guess) + 1 == chunk[j]) correct += 1.0;
    }
    speaker_backward_batch(speaker, roll, std::span<const double>(adv_weight),
                           std::span<const double>(ent_weight), out.speaker_grad);
  }
  double loss_sum = 0.0;
  for (double l : out.losses) loss_sum += l;
  out.mean_loss = loss_sum * inv_batch;
  out.mean_length = length_sum * inv_batch;
  out.accuracy = correct * inv_batch;
  return out;
}

Evaluation evaluate(const SpeakerParams<double>& speaker,
                    const ListenerParams<double>& listener, std::size_t max_len) {
  const auto n = static_cast<std::size_t>(speaker.n());
  if (static_cast<std::size_t>(listener.n()) != n)
    throw std::invalid_argument("evaluate: speaker and listener disagree on n");
  Evaluation eval;
  eval.code.alphabet = Alphabet{static_cast<std::size_t>(speaker.alphabet_size())};
  eval.code.max_len = max_len;
  std::size_t correct = 0;
  std::vector<std::size_t> ranks;
  for (std::size_t start = 1; start <= n; start += kChunk) {
    ranks.clear();
    for (std::size_t r = start; r <= std::min(n, start + kChunk - 1); ++r) ranks.push_back(r);
    auto roll = speaker_rollout(speaker, std::span<const std::size_t>(ranks), max_len,
                                DecodeMode::Greedy, nullptr, false);
    auto heard = listener_rollout(listener, roll.messages, false);
    for (std::size_t j = 0; j < ranks.size(); ++j) {
      Eigen::Index guess = 0;
      heard.logits.col(static_cast<Eigen::Index>(j)).maxCoeff(&guess);
      if (static_cast<std::size_t>(guess) + 1 == ranks[j]) ++correct;
    }
    for (auto& m : roll.messages) eval.code.messages.push_back(std::move(m));
  }
  eval.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  eval.distinct = distinct_messages(eval.code);
  return eval;
}

RunRecord train(const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  RunRecord record;
  record.config = cfg;

  const Rng root(cfg.seed);
  Rng init_rng = root.derive(1);
  Rng sample_rng = root.derive(2);
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto a = static_cast<Eigen::Index>(cfg.a);
  const auto emb = static_cast<Eigen::Index>(cfg.embedding);
  record.speaker = init_speaker<double>(n, a, static_cast<Eigen::Index>(cfg.speaker_hidden),
                                        emb, init_rng, cfg.project_cell);
  record.listener = init_listener<double>(n, a, static_cast<Eigen::Index>(cfg.listener_hidden),
                                          emb, init_rng);

  const RankSampler sampler(cfg.input_model());
  AdamState<double> speaker_adam;
  AdamState<double> listener_adam;
  BaselineState baseline;
  std::vector<std::size_t> ranks(cfg.batch_size);

  for (std::size_t ep = 1; ep <= cfg.episodes; ++ep) {
    EpisodeMetrics m{ep, 0.0, 0.0, 0.0};
    for (std::size_t b = 1; b <= cfg.batches_per_episode; ++b) {
      for (auto& r : ranks) r = sampler.draw(sample_rng);
      auto res = surrogate_gradients(record.speaker, record.listener,
                                     std::span<const std::size_t>(ranks), cfg,
                                     baseline, sample_rng);
      if (!std::isfinite(res.mean_loss) || !params_finite(res.speaker_grad) ||
          !params_finite(res.listener_grad)) {
        record.status = {false, "non-finite loss at episode " + std::to_string(ep) +
                                    ", batch " + std::to_string(b)};
        record.evaluation.code.alphabet = Alphabet{cfg.a};
        record.evaluation.code.max_len = cfg.max_len;
        return record;
      }
      if (cfg.baseline_mode == BaselineMode::BatchMean) {
        double sum = 0.0;
        for (double l : res.penalized_losses) sum += l;
        baseline.update(sum / static_cast<double>(res.penalized_losses.size()));
      } else {
        for (double l : res.penalized_losses) baseline.update(l);
      }
      adam_step(speaker_adam, record.speaker, res.speaker_grad, cfg.learning_rate);
      adam_step(listener_adam, record.listener, res.listener_grad, cfg.learning_rate);

      m.loss += res.mean_loss;
      m.mean_length += res.mean_length;
      m.train_accuracy += res.accuracy;
      if (cfg.verbose)
        record.batch_log.push_back(
            {ep, b, res.mean_loss, res.mean_length, res.accuracy, baseline.mean});
    }
    const auto batches = static_cast<double>(cfg.batches_per_episode);
    m.loss /= batches;
    m.mean_length /= batches;
    m.train_accuracy /= batches;
    record.metrics.push_back(m);
    if (progress) progress(m);
    if (cfg.stop_on_success && ep < cfg.episodes &&
        is_success(evaluate(record.speaker, record.listener, cfg.max_len).accuracy))
      break;
  }

  record.evaluation = evaluate(record.speaker, record.listener, cfg.max_len);
  record.status.success = is_success(record.evaluation.accuracy);
  record.status.reason = record.status.success ? "accuracy above 0.99"
                                               : "accuracy at or below 0.99";
  return record;
}

void save_run(const std::filesystem::path& dir, const RunRecord& record) {
  std::filesystem::create_directories(dir);
  nlohmann::json cfg = record.config;
  write_file_atomic(dir / "config.json", cfg.dump(2) + "\n");

  std::ostringstream metrics;
  CsvWriter csv(metrics);
  csv.row({"episode", "loss", "mean_length", "train_accuracy"});
  for (const auto& m : record.metrics)
    csv.row({std::to_string(m.episode), format_double(m.loss),
             format_double(m.mean_length), format_double(m.train_accuracy)});
  write_file_atomic(dir / "metrics.csv", metrics.str());

  if (!record.batch_log.empty()) {
    std::ostringstream batches;
    CsvWriter bcsv(batches);
    bcsv.row({"episode", "batch", "loss", "mean_length", "train_accuracy", "baseline"});
    for (const auto& m : record.batch_log)
      bcsv.row({std::to_string(m.episode), std::to_string(m.batch), format_double(m.loss),
                format_double(m.mean_length), format_double(m.train_accuracy),
                format_double(m.baseline)});
    write_file_atomic(dir / "batches.csv", batches.str());
  }

  std::ostringstream code;
  write_code(code, record.evaluation.code);
  write_file_atomic(dir / "code.tsv", code.str());

  if (record.speaker.n() > 0) {
    TensorBundle bundle;
    append_tensors(bundle, "speaker.", record.speaker);
    append_tensors(bundle, "listener.", record.listener);
    auto tmp = dir / "params.ckpt.tmp";
    save_tensors(tmp, bundle);
    std::filesystem::rename(tmp, dir / "params.ckpt");
  }

  // status goes last: its presence marks the run directory as complete.
  std::ostringstream status;
  status << (record.status.success ? "success" : "failure") << '\n'
         << "accuracy=" << format_double(record.evaluation.accuracy) << '\n'
         << "reason=" << record.status.reason << '\n';
  write_file_atomic(dir / "status", status.str());
}

StoredStatus read_status(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  StoredStatus st;
  std::string line;
  if (!std::getline(in, line) || (line != "success" && line != "failure"))
    throw ParseError("status must start with success or failure", 1);
  st.success = line == "success";
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("accuracy=", 0) == 0) {
      try {
        st.accuracy = std::stod(line.substr(9));
      } catch (const std::exception&) {
        throw ParseError("malformed accuracy", line_no);
      }
    } else if (line.rfind("reason=", 0) == 0) {
      st.reason = line.substr(7);
    }
  }
  return st;
}

}  // namespace zla
