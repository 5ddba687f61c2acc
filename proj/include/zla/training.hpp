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

#ifndef ZLA_TRAINING_HPP_
#define ZLA_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zla/adam.hpp"
#include "zla/agents.hpp"
#include "zla/freqmodel.hpp"
#include "zla/lexicodes.hpp"
#include "zla/rng.hpp"

namespace zla {

enum class EntropyReduction { Sum, Mean };
enum class BaselineMode { BatchMean, PerExample };

struct TrainConfig {
  std::size_t n = 1000;
  std::size_t a = 40;
  std::size_t max_len = 30;
  std::size_t speaker_hidden = 250;
  std::size_t listener_hidden = 100;
  std::size_t embedding = 0;  // 0: each agent uses its hidden size
  double learning_rate = 0.001;
  double entropy_coeff = 1.0;
  EntropyReduction entropy_reduction = EntropyReduction::Sum;
  double length_penalty = 0.0;  // alpha; 0 disables
  std::size_t episodes = 2500;
  std::size_t batches_per_episode = 100;
  std::size_t batch_size = 5120;
  std::uint64_t seed = 1;
  FrequencyKind input_distribution = FrequencyKind::PowerLaw;
  BaselineMode baseline_mode = BaselineMode::BatchMean;
  bool project_cell = false;
  bool stop_on_success = false;  // evaluate after every episode, stop once successful
  bool verbose = false;

  /// Throws std::invalid_argument (bad counts, h_s < h_l) or CapacityError.
  void validate() const;
  FrequencyModel input_model() const;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

/// Cumulative mean of the losses observed so far.
struct BaselineState {
  double mean = 0.0;
  std::uint64_t count = 0;

  void update(double loss) {
    ++count;
    mean += (loss - mean) / static_cast<double>(count);
  }
};

struct SurrogateTerms {
  double listener_scale = 1.0;  // cross-entropy enters the listener as is
  double penalized_loss = 0.0;  // L + alpha * |m|
  double speaker_advantage = 0.0;
};

/// Speaker advantage {L + alpha|m|} - b; the length term never reaches the
/// listener.
SurrogateTerms surrogate_terms(double loss, std::size_t message_length,
                               const BaselineState& baseline,
                               double length_penalty);

struct BatchResult {
  SpeakerParams<double> speaker_grad;
  ListenerParams<double> listener_grad;
  std::vector<double> losses;            // cross-entropy per example
  std::vector<double> penalized_losses;  // what the baseline tracks
  double mean_loss = 0.0;
  double mean_length = 0.0;
  double accuracy = 0.0;
};

/// Samples messages for `ranks`, scores them with the listener and returns
/// batch-averaged gradients of the surrogate objective. The baseline is read,
/// not updated.
BatchResult surrogate_gradients(const SpeakerParams<double>& speaker,
                                const ListenerParams<double>& listener,
                                std::span<const std::size_t> ranks,
                                const TrainConfig& cfg,
                                const BaselineState& baseline, Rng& rng);

struct Evaluation {
  double accuracy = 0.0;
  Code code;
  std::size_t distinct = 0;
};

/// Greedy decoding of every input once, with equal weight.
Evaluation evaluate(const SpeakerParams<double>& speaker,
                    const ListenerParams<double>& listener, std::size_t max_len);

/// More than 99% of inputs recovered (fewer than 10 errors at n = 1000).
inline bool is_success(double accuracy) { return accuracy > 0.99; }

struct EpisodeMetrics {
  std::size_t episode = 0;
  double loss = 0.0;
  double mean_length = 0.0;
  double train_accuracy = 0.0;
};

struct BatchMetrics {
  std::size_t episode = 0;
  std::size_t batch = 0;
  double loss = 0.0;
  double mean_length = 0.0;
  double train_accuracy = 0.0;
  double baseline = 0.0;
};

struct RunStatus {
  bool success = false;
  std::string reason;
};

struct RunRecord {
  TrainConfig config;
  std::vector<EpisodeMetrics> metrics;
  std::vector<BatchMetrics> batch_log;  // only with cfg.verbose
  SpeakerParams<double> speaker;
  ListenerParams<double> listener;
  Evaluation evaluation;
  RunStatus status;
};

using ProgressFn = std::function<void(const EpisodeMetrics&)>;

/// Full schedule. Deterministic in cfg (including cfg.seed). A non-finite loss
/// stops the run and marks it failed instead of throwing.
RunRecord train(const TrainConfig& cfg, const ProgressFn& progress = {});

/// Persists config.json, metrics.csv, code.tsv, params.ckpt and status
/// (plus batches.csv when per-batch metrics were logged).
void save_run(const std::filesystem::path& dir, const RunRecord& record);

struct StoredStatus {
  bool success = false;
  double accuracy = 0.0;
  std::string reason;
};

/// Parses a status file. Throws ParseError on malformed content.
StoredStatus read_status(const std::filesystem::path& path);

}  // namespace zla

#endif  // ZLA_TRAINING_HPP_
