#include "e2eslu/semantic/interpretation.hpp"

#include "e2eslu/errors.hpp"
#include "e2eslu/textproc/labels.hpp"

namespace e2eslu {

Interpretation assemble_interpretation(std::span<const int> pieces, std::span<const int> labels,
                                       int intent, const WordpieceVocab& vocab) {
  if (pieces.size() != labels.size()) {
    throw ContractError("assemble_interpretation: " + std::to_string(pieces.size()) +
                        " pieces vs " + std::to_string(labels.size()) + " labels");
  }
  Interpretation out;
  out.intent = intent;
  std::vector<int> run;
  int run_label = kNullSlot;
  auto flush = [&] {
    if (run_label != kNullSlot && !run.empty()) {
      std::string value = vocab.detokenize(run);
      if (!value.empty()) out.slots.push_back({run_label, std::move(value)});
    }
    run.clear();
    run_label = kNullSlot;
  };
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const bool special = pieces[i] == kPadId || pieces[i] == kBosId || pieces[i] == kEosId;
    const int label = special ? kNullSlot : labels[i];
    if (label != run_label) flush();
    if (label == kNullSlot) continue;
    run_label = label;
    run.push_back(pieces[i]);
  }
  flush();
  return out;
}

}  // namespace e2eslu
