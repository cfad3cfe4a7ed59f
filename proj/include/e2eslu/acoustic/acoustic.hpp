#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "e2eslu/diffengine/layers.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

struct ACConfig {
  std::size_t feature_dim = 64;
  std::size_t conv_layers = 3;
  std::size_t conv_channels = 64;
  std::size_t kernel = 4;
  std::size_t stride = 2;
  std::size_t model_dim = 64;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t heads = 4;
  std::size_t ff_dim = 128;
  Real dropout = Real(0.1);
  std::size_t max_decode = 48;
  std::size_t vocab_size = 0;

  void validate() const;
  // Shortest input that yields one encoder step.
  std::size_t receptive_field() const;
  // Encoder steps for `frames` input frames (0 if shorter than the receptive field).
  std::size_t output_length(std::size_t frames) const;
};

struct GreedyResult {
  // Per utterance: emitted pieces without BOS/EOS.
  std::vector<std::vector<int>> pieces;
  // Per utterance: one logit row per decoding step (including the EOS step,
  // if EOS was emitted), shape [steps, V].
  std::vector<Tensor> posteriors;
  std::vector<bool> truncated;
};

/// Conv embedder plus transformer encoder-decoder over wordpieces. Parameters
/// live in the caller's store under `prefix`.
class AcousticModel {
 public:
  AcousticModel() = default;
  AcousticModel(ParameterStore& store, const ACConfig& cfg, Rng& rng,
                const std::string& prefix = "ac", bool with_decoder = true);

  const ACConfig& config() const { return cfg_; }

  // features: [B, T, F] -> [B, T', d]. Throws LengthError when T is below the
  // receptive field.
  Var conv_embed(const ForwardContext& ctx, Var features) const;
  // Adds positions and runs the encoder; mask is [B, T'] (empty = all valid).
  Var encode(const ForwardContext& ctx, Var embedded, std::span<const std::uint8_t> mask) const;
  // Decoder over input ids [B*L] (BOS-prefixed). Returns the final hidden
  // states [B, L, d] before the output projection.
  Var decode_hidden(const ForwardContext& ctx, Var memory,
                    std::span<const std::uint8_t> memory_mask, std::span<const int> inputs,
                    std::size_t length, std::span<const std::uint8_t> input_mask) const;
  Var project(Graph& g, Var hidden) const;
  // Teacher-forced logits [B, L, V].
  Var decode_teacher_forced(const ForwardContext& ctx, Var memory,
                            std::span<const std::uint8_t> memory_mask, std::span<const int> inputs,
                            std::size_t length, std::span<const std::uint8_t> input_mask) const;
  // Greedy decoding from BOS for every batch row, recomputing the prefix each step.
  GreedyResult decode_greedy(const ForwardContext& ctx, Var memory,
                             std::span<const std::uint8_t> memory_mask) const;

 private:
  ACConfig cfg_;
  std::vector<Tensor*> conv_kernels_;
  std::vector<Tensor*> conv_biases_;
  Linear conv_projection_;
  bool has_projection_ = false;
  std::vector<EncoderLayer> encoder_;
  LayerNorm encoder_norm_;
  Tensor* token_embedding_ = nullptr;
  std::vector<DecoderLayer> decoder_;
  LayerNorm decoder_norm_;
  Linear output_;
  bool with_decoder_ = true;
};

/// Cross entropy of logits [B, L, V] against targets [B*L], ignoring -1.
/// Length mismatch raises ContractError.
Var asr_loss(Var logits, std::span<const int> targets);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
