#include "e2eslu/harness/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "e2eslu/errors.hpp"
#include "e2eslu/harness/evaluate.hpp"
#include "e2eslu/interface/embedders.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fixed(double v, int digits, bool sign) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), sign ? "%+.*f" : "%.*f", digits, v);
  return buf;
}

std::string relative(double reference, double value) {
  if (reference == 0) return value == 0 ? "+0.0" : "n/a";
  return fixed(100.0 * (reference - value) / reference, 1, true);
}

}  // namespace

std::vector<std::vector<std::string>> BenchTable::delta_cells() const {
  const InterfaceRow* ref = nullptr;
  for (const auto& r : rows) {
    if (r.name == "matmul") ref = &r;
  }
  if (!ref) throw ConfigError("benchmark table lacks the matmul reference row");
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    if (&r == ref) {
      cells.push_back({"---", "---", "---", "---"});
      continue;
    }
    cells.push_back({fixed(r.ms_per_batch - ref->ms_per_batch, 1, true) + " ms",
                     relative(ref->icer, r.icer), relative(ref->irer, r.irer),
                     relative(ref->h_irer, r.h_irer)});
  }
  return cells;
}

std::string BenchTable::format() const {
  const auto cells = delta_cells();
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %12s %8s %8s %8s\n", "Interface", "Speed", "ICER",
                "IRER", "h-IRER");
  out << line;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::snprintf(line, sizeof(line), "%-10s %12s %8s %8s %8s\n", rows[i].name.c_str(),
                  cells[i][0].c_str(), cells[i][1].c_str(), cells[i][2].c_str(),
                  cells[i][3].c_str());
    out << line;
  }
  out << "reference deltas (published, GPU): topk +10 ms +5.1 +2.7 +1.5; "
         "gumbel -16 ms +7.2 +4.3 +2.4\n";
  return out.str();
}

nlohmann::json BenchTable::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  const auto cells = delta_cells();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    j.push_back({{"interface", r.name},
                 {"ms_per_batch", r.ms_per_batch},
                 {"icer", r.icer},
                 {"irer", r.irer},
                 {"h_irer", r.h_irer},
                 {"delta", cells[i]}});
  }
  return j;
}

InterfaceRow measure_interface(const SluModel& model, std::span<const Utterance> test,
                               std::span<const Utterance> hard, const WordpieceVocab& vocab,
                               std::size_t repeats, std::size_t batch_size) {
  if (test.empty()) throw DataError("benchmark needs a non-empty test set");
  InterfaceRow row;
  row.name = interface_name(model.config().iface.kind);
  const auto& ac = model.config().ac;
  Batch batch = make_batch(test.first(std::min(batch_size, test.size())), ac.feature_dim,
                           ac.receptive_field());
  std::vector<double> times;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
    const auto t0 = Clock::now();
    (void)model.predict(batch, vocab);
    times.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  row.ms_per_batch = median(times);
  const EvalReport reg = evaluate(model, test, vocab).report;
  row.icer = reg.icer;
  row.irer = reg.irer;
  row.h_irer = hard.empty() ? 0.0 : evaluate(model, hard, vocab).report.irer;
  return row;
}

BenchTable benchmark_interfaces(const std::map<std::string, const SluModel*>& models,
                                std::span<const Utterance> test, std::span<const Utterance> hard,
                                const WordpieceVocab& vocab, std::size_t repeats) {
  BenchTable table;
  for (const char* name : {"matmul", "topk", "gumbel"}) {
    auto it = models.find(name);
    if (it == models.end() || !it->second) {
      throw ConfigError(std::string("missing checkpoint for interface ") + name);
    }
    table.rows.push_back(measure_interface(*it->second, test, hard, vocab, repeats));
    table.rows.back().name = name;
  }
  return table;
}

TokenCost per_token_interface_cost(std::size_t vocab, std::size_t dim, std::size_t tokens,
                                   std::size_t k, std::size_t repeats, std::uint64_t seed) {
  Rng rng(seed);
  Tensor logits(Shape{tokens, vocab});
  for (auto& v : logits.values()) v = static_cast<Real>(rng.normal(0, 1));
  Tensor table(Shape{vocab, dim});
  for (auto& v : table.values()) v = static_cast<Real>(rng.normal(0, 0.02));
  auto time_ns = [&](auto&& fn) {
    std::vector<double> t;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
      Graph g(false);
      Var x = g.constant(logits);
      Var tb = g.parameter(table);
      const auto t0 = Clock::now();
      fn(x, tb);
      t.push_back(std::chrono::duration<double, std::nano>(Clock::now() - t0).count() /
                  static_cast<double>(tokens));
    }
    return median(t);
  };
  TokenCost c;
  c.vocab = vocab;
  c.dim = dim;
  c.tokens = tokens;
  c.gumbel_ns = time_ns([](Var x, Var tb) { (void)argmax_embed(x, tb); });
  c.matmul_ns = time_ns([](Var x, Var tb) { (void)matmul_embed(x, tb); });
  c.topk_ns = time_ns([k](Var x, Var tb) { (void)topk_embed(x, tb, k); });
  return c;
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
