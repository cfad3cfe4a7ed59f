#include "e2eslu/harness/metrics.hpp"

#include <algorithm>

#include "e2eslu/errors.hpp"

namespace e2eslu {

SlotEdits align_slots(std::span<const SlotValue> gold, std::span<const SlotValue> predicted) {
  const std::size_t n = gold.size();
  const std::size_t m = predicted.size();
  struct Cell {
    std::size_t cost = 0;
    std::size_t subs = 0;
    std::size_t dels = 0;
    std::size_t ins = 0;
  };
  auto better = [](const Cell& a, const Cell& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.subs > b.subs;
  };
  std::vector<Cell> table((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> Cell& { return table[i * (m + 1) + j]; };
  for (std::size_t i = 1; i <= n; ++i) at(i, 0) = {i, 0, i, 0};
  for (std::size_t j = 1; j <= m; ++j) at(0, j) = {j, 0, 0, j};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      Cell diag = at(i - 1, j - 1);
      if (!(gold[i - 1] == predicted[j - 1])) {
        ++diag.cost;
        ++diag.subs;
      }
      Cell del = at(i - 1, j);
      ++del.cost;
      ++del.dels;
      Cell ins = at(i, j - 1);
      ++ins.cost;
      ++ins.ins;
      Cell best = diag;
      if (better(del, best)) best = del;
      if (better(ins, best)) best = ins;
      at(i, j) = best;
    }
  }
  const Cell& c = at(n, m);
  return {c.subs, c.dels, c.ins};
}

EvalReport score(std::span<const Interpretation> gold, std::span<const Interpretation> predicted) {
  if (gold.empty()) throw DataError("cannot score an empty test set");
  if (gold.size() != predicted.size()) {
    throw ContractError("gold and predicted interpretation counts differ");
  }
  EvalReport r;
  auto& c = r.counts;
  c.utterances = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i];
    const auto& p = predicted[i];
    c.gold_slots += g.slots.size();
    if (g.intent != p.intent) ++c.intent_errors;
    const SlotEdits e = align_slots(g.slots, p.slots);
    c.slot_substitutions += e.substitutions;
    c.slot_deletions += e.deletions;
    c.slot_insertions += e.insertions;
    if (!(g == p)) ++c.interpretation_errors;
  }
  const double n = static_cast<double>(c.utterances);
  r.icer = static_cast<double>(c.intent_errors) / n;
  r.irer = static_cast<double>(c.interpretation_errors) / n;
  if (c.gold_slots > 0) {
    r.ser = static_cast<double>(c.slot_errors()) / static_cast<double>(c.gold_slots);
  } else {
    r.ser = c.slot_errors() == 0 ? 0.0 : static_cast<double>(c.slot_errors());
  }
  return r;
}

}  // namespace e2eslu
