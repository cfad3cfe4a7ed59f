#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "e2eslu/harness/models.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

struct StepLog {
  std::size_t step = 0;
  LossBreakdown loss;
  double lr = 0;
  double token_accuracy = 0;
  double grad_norm = 0;
};

struct DevPoint {
  std::size_t step = 0;
  double irer = 0;
};

struct TrainResult {
  std::vector<StepLog> log;
  std::vector<DevPoint> dev;
  // First evaluated step (counted after the update) at which dev IRER fell to
  // the configured threshold.
  std::optional<std::size_t> steps_to_threshold;
  std::size_t steps_run = 0;
  double seconds = 0;
};

using StepCallback = std::function<void(const StepLog&)>;

/// Generic Adam loop over shuffled minibatches. Dev evaluation needs an
/// SluModel, a vocabulary and a non-empty dev set.
TrainResult train_model(Trainable& model, std::span<const Utterance> train,
                        const TrainConfig& cfg, const WordpieceVocab* vocab = nullptr,
                        std::span<const Utterance> dev = {}, const StepCallback& on_step = {});

/// Transcription-only training of the acoustic model.
TrainResult pretrain_ac(AcousticPretrainModel& model, std::span<const Utterance> train,
                        const TrainConfig& cfg, const StepCallback& on_step = {});

/// End-to-end training on the three-term objective, optionally starting from
/// pretrained acoustic parameters.
TrainResult train_e2e(MultistageModel& model, std::span<const Utterance> train,
                      const TrainConfig& cfg, const WordpieceVocab& vocab,
                      std::span<const Utterance> dev = {},
                      const ParameterStore* pretrained_ac = nullptr,
                      const StepCallback& on_step = {});

TrainResult train_baseline(MultitaskBaseline& model, std::span<const Utterance> train,
                           const TrainConfig& cfg, const WordpieceVocab& vocab,
                           std::span<const Utterance> dev = {}, const StepCallback& on_step = {});

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
