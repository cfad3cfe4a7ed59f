#include "e2eslu/harness/batch.hpp"

#include <algorithm>

#include "e2eslu/errors.hpp"
#include "e2eslu/textproc/labels.hpp"
#include "e2eslu/textproc/vocab.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

std::vector<std::uint8_t> Batch::memory_mask(const ACConfig& cfg) const {
  const std::size_t steps = cfg.output_length(frames);
  std::vector<std::uint8_t> mask(size * steps, 0);
  for (std::size_t b = 0; b < size; ++b) {
    const std::size_t valid = std::max<std::size_t>(1, cfg.output_length(frame_counts[b]));
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(b * steps), std::min(valid, steps), 1);
  }
  return mask;
}

Batch make_batch(std::span<const Utterance* const> utterances, std::size_t feature_dim,
                 std::size_t min_frames) {
  if (utterances.empty()) throw DataError("cannot build an empty batch");
  Batch batch;
  batch.size = utterances.size();
  std::size_t max_frames = min_frames;
  std::size_t max_pieces = 0;
  for (const Utterance* u : utterances) {
    if (u->features.empty()) throw DataError("utterance " + u->id + " has no features");
    if (u->features.cols != feature_dim) {
      throw DataError("utterance " + u->id + " has " + std::to_string(u->features.cols) +
                      " feature columns, expected " + std::to_string(feature_dim));
    }
    if (u->pieces.empty()) throw DataError("utterance " + u->id + " has no pieces");
    max_frames = std::max(max_frames, u->features.rows);
    max_pieces = std::max(max_pieces, u->pieces.size());
  }
  const std::size_t B = batch.size;
  const std::size_t T = max_frames;
  const std::size_t L = max_pieces + 1;
  batch.frames = T;
  batch.length = L;
  batch.features = Tensor(Shape{B, T, feature_dim});
  batch.decoder_inputs.assign(B * L, kPadId);
  batch.decoder_targets.assign(B * L, -1);
  batch.slot_targets.assign(B * L, -1);
  batch.input_slot_targets.assign(B * L, -1);
  batch.step_mask.assign(B * L, 0);
  batch.content_mask.assign(B * L, 0);
  for (std::size_t b = 0; b < B; ++b) {
    const Utterance& u = *utterances[b];
    batch.source.push_back(&u);
    batch.frame_counts.push_back(u.features.rows);
    batch.piece_counts.push_back(u.pieces.size());
    batch.intents.push_back(u.intent);
    Real* dst = batch.features.data() + b * T * feature_dim;
    std::transform(u.features.data.begin(), u.features.data.end(), dst,
                   [](float v) { return static_cast<Real>(v); });
    const bool labelled = u.piece_labels.size() == u.pieces.size();
    const std::size_t n = u.pieces.size();
    const std::size_t row = b * L;
    batch.decoder_inputs[row] = kBosId;
    batch.input_slot_targets[row] = kNullSlot;
    for (std::size_t t = 0; t < n; ++t) {
      batch.decoder_inputs[row + t + 1] = u.pieces[t];
      batch.decoder_targets[row + t] = u.pieces[t];
      batch.content_mask[row + t] = 1;
      if (labelled) {
        batch.slot_targets[row + t] = u.piece_labels[t];
        batch.input_slot_targets[row + t + 1] = u.piece_labels[t];
      }
    }
    batch.decoder_targets[row + n] = kEosId;
    batch.slot_targets[row + n] = kNullSlot;
    for (std::size_t t = 0; t <= n; ++t) batch.step_mask[row + t] = 1;
  }
  return batch;
}

Batch make_batch(std::span<const Utterance> utterances, std::size_t feature_dim,
                 std::size_t min_frames) {
  std::vector<const Utterance*> ptrs;
  ptrs.reserve(utterances.size());
  for (const auto& u : utterances) ptrs.push_back(&u);
  return make_batch(ptrs, feature_dim, min_frames);
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
