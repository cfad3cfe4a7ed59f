#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "e2eslu/harness/batch.hpp"
#include "e2eslu/harness/config.hpp"
#include "e2eslu/semantic/interpretation.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

struct LossTerms {
  std::optional<Var> intent;
  std::optional<Var> slot;
  Var asr;
  Var total;
  // Teacher-forced transcription logits [B, L, V].
  Var asr_logits;
};

/// Scalar view of a loss step. For the end-to-end objective with unit weights
/// l_e2e is the sum of the three parts.
struct LossBreakdown {
  double l_intent = 0;
  double l_slot = 0;
  double l_asr = 0;
  double l_e2e = 0;
};

LossBreakdown breakdown(const LossTerms& terms);

struct Prediction {
  std::vector<Interpretation> interpretations;
  std::vector<std::vector<int>> pieces;
  std::size_t truncations = 0;
};

class Trainable {
 public:
  virtual ~Trainable() = default;
  virtual std::string kind() const = 0;
  virtual ParameterStore& parameters() = 0;
  virtual const ParameterStore& parameters() const = 0;
  virtual const ModelConfig& config() const = 0;
  virtual LossTerms losses(const ForwardContext& ctx, const Batch& batch,
                           const LossWeights& weights) const = 0;
  // Groups ordered from output to input, for gradual unfreezing.
  virtual std::vector<std::string> unfreeze_order() const = 0;
};

class SluModel : public Trainable {
 public:
  // Greedy transcription followed by intent and slot prediction.
  virtual Prediction predict(const Batch& batch, const WordpieceVocab& vocab) const = 0;
};

/// Acoustic model alone, trained on transcription.
class AcousticPretrainModel final : public Trainable {
 public:
  explicit AcousticPretrainModel(const ModelConfig& cfg);
  std::string kind() const override { return "acoustic"; }
  ParameterStore& parameters() override { return store_; }
  const ParameterStore& parameters() const override { return store_; }
  const ModelConfig& config() const override { return cfg_; }
  LossTerms losses(const ForwardContext& ctx, const Batch& batch,
                   const LossWeights& weights) const override;
  std::vector<std::string> unfreeze_order() const override;
  const AcousticModel& acoustic() const { return ac_; }
  GreedyResult transcribe(const Batch& batch) const;

 private:
  ModelConfig cfg_;
  ParameterStore store_;
  AcousticModel ac_;
};

/// AC -> differentiable interface -> SC.
class MultistageModel final : public SluModel {
 public:
  explicit MultistageModel(const ModelConfig& cfg);
  std::string kind() const override { return "multistage"; }
  ParameterStore& parameters() override { return store_; }
  const ParameterStore& parameters() const override { return store_; }
  const ModelConfig& config() const override { return cfg_; }
  LossTerms losses(const ForwardContext& ctx, const Batch& batch,
                   const LossWeights& weights) const override;
  std::vector<std::string> unfreeze_order() const override;
  Prediction predict(const Batch& batch, const WordpieceVocab& vocab) const override;
  // Understanding of the gold transcripts: the acoustic stage is replaced by
  // peaked posteriors on the reference pieces.
  Prediction predict_from_transcripts(const Batch& batch, const WordpieceVocab& vocab) const;

  const AcousticModel& acoustic() const { return ac_; }
  const SemanticModel& semantic() const { return sc_; }
  InterfaceConfig& interface_config() { return cfg_.iface; }

  // SC forward over posterior logits [B, L, V]; returns (intent logits, slot logits).
  std::pair<Var, Var> understand(const ForwardContext& ctx, Var posteriors,
                                 std::span<const std::uint8_t> step_mask,
                                 std::span<const std::uint8_t> pool_mask) const;

 private:
  ModelConfig cfg_;
  ParameterStore store_;
  AcousticModel ac_;
  SemanticModel sc_;
};

/// Shared conv embedder and encoder-decoder; the intent head reads the
/// time-averaged encoder output and the slot head tags decoder steps.
class MultitaskBaseline final : public SluModel {
 public:
  explicit MultitaskBaseline(const ModelConfig& cfg);
  std::string kind() const override { return "baseline"; }
  ParameterStore& parameters() override { return store_; }
  const ParameterStore& parameters() const override { return store_; }
  const ModelConfig& config() const override { return cfg_; }
  LossTerms losses(const ForwardContext& ctx, const Batch& batch,
                   const LossWeights& weights) const override;
  std::vector<std::string> unfreeze_order() const override;
  Prediction predict(const Batch& batch, const WordpieceVocab& vocab) const override;

 private:
  ModelConfig cfg_;
  ParameterStore store_;
  AcousticModel ac_;
  Linear intent_head_;
  Linear slot_head_;
};

std::unique_ptr<Trainable> make_model(const std::string& kind, const ModelConfig& cfg);

/// Copies tensors whose names exist in both stores (shapes must agree).
/// Returns how many were copied.
std::size_t copy_matching(const ParameterStore& from, ParameterStore& to);

/// Intent pooling mask over [B*L] steps: valid steps whose piece is not
/// special, or all valid steps of a row that has none.
std::vector<std::uint8_t> pooling_mask(std::span<const int> step_pieces,
                                       std::span<const std::uint8_t> step_mask,
                                       std::size_t length);

Interpretation gold_interpretation(const Utterance& u);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
