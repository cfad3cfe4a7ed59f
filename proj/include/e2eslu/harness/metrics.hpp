#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "e2eslu/semantic/interpretation.hpp"

namespace e2eslu {

struct EvalCounts {
  std::size_t utterances = 0;
  std::size_t gold_slots = 0;
  std::size_t intent_errors = 0;
  std::size_t slot_substitutions = 0;
  std::size_t slot_deletions = 0;
  std::size_t slot_insertions = 0;
  std::size_t interpretation_errors = 0;
  std::size_t truncations = 0;

  std::size_t slot_errors() const { return slot_substitutions + slot_deletions + slot_insertions; }
};

struct EvalReport {
  double icer = 0;
  double ser = 0;
  double irer = 0;
  EvalCounts counts;
};

struct SlotEdits {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t total() const { return substitutions + deletions + insertions; }
};

/// Minimal order-preserving edit alignment of predicted against gold slots,
/// exact (label, value) matches only. Among alignments of minimal cost the one
/// with the most substitutions is reported.
SlotEdits align_slots(std::span<const SlotValue> gold, std::span<const SlotValue> predicted);

/// Scores predictions against gold. SER is slot edits over gold slot count and
/// is 0 when there are no gold slots and no predictions. Empty input raises
/// DataError; size mismatch raises ContractError.
EvalReport score(std::span<const Interpretation> gold, std::span<const Interpretation> predicted);

}  // namespace e2eslu
