#pragma once

#include <span>
#include <string>
#include <vector>

#include "e2eslu/textproc/vocab.hpp"

namespace e2eslu {

struct SlotValue {
  int label = 0;
  std::string value;

  bool operator==(const SlotValue&) const = default;
};

/// Intent plus ordered (slot label, slot value) pairs; the exact-match unit
/// scored by the interpretation error rate.
struct Interpretation {
  int intent = -1;
  std::vector<SlotValue> slots;

  bool operator==(const Interpretation&) const = default;
};

/// Builds an interpretation from per-piece slot tags. Maximal runs of the same
/// non-null label become one slot whose value is the detokenized run; special
/// pieces never enter a value and break runs. Two adjacent slots with the same
/// label are indistinguishable here and merge into one.
Interpretation assemble_interpretation(std::span<const int> pieces, std::span<const int> labels,
                                       int intent, const WordpieceVocab& vocab);

}  // namespace e2eslu
