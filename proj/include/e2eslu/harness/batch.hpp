#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "e2eslu/acoustic/acoustic.hpp"
#include "e2eslu/synthcorpus/utterance.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

/// A padded minibatch. Piece sequences of n pieces occupy L = max(n) + 1
/// decoder steps: inputs are BOS p1..pn, targets p1..pn EOS.
struct Batch {
  std::size_t size = 0;
  std::size_t frames = 0;
  std::size_t length = 0;
  Tensor features;  // [B, T, F], zero-padded
  std::vector<std::size_t> frame_counts;
  std::vector<std::size_t> piece_counts;
  std::vector<int> decoder_inputs;   // [B*L], PAD after BOS p1..pn
  std::vector<int> decoder_targets;  // [B*L], -1 after p1..pn EOS
  // Slot label per target step (null for EOS), -1 on padding.
  std::vector<int> slot_targets;
  // Slot label per input step (null for BOS), -1 on padding.
  std::vector<int> input_slot_targets;
  std::vector<std::uint8_t> step_mask;     // [B*L], steps 0..n
  std::vector<std::uint8_t> content_mask;  // [B*L], steps 0..n-1 (the pieces)
  std::vector<int> intents;
  std::vector<const Utterance*> source;

  // Encoder-step mask [B*T'] for a conv stack.
  std::vector<std::uint8_t> memory_mask(const ACConfig& cfg) const;
};

/// Pads features to at least `min_frames` frames (use the receptive field).
/// Utterances need features and pieces; intents may be -1 for transcription-only data.
Batch make_batch(std::span<const Utterance* const> utterances, std::size_t feature_dim,
                 std::size_t min_frames);
Batch make_batch(std::span<const Utterance> utterances, std::size_t feature_dim,
                 std::size_t min_frames);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
