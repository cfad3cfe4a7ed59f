#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "criteria.hpp"
#include "e2eslu/harness/bench.hpp"
#include "e2eslu/harness/evaluate.hpp"
#include "e2eslu/harness/experiment.hpp"
#include "e2eslu/harness/trainer.hpp"

namespace acceptance {

using namespace e2eslu;

namespace {

// Task-learning run.
constexpr std::size_t kLearnSteps = 11000;
constexpr double kLearnBudgetSeconds = 1800;
constexpr double kRegularIrerLimit = 0.05;
constexpr double kHardIrerLimit = 0.30;

// Comparison runs, per seed.
constexpr int kSeeds = 5;
constexpr std::size_t kCompareSteps = 2000;
constexpr std::size_t kPretrainSteps = 1500;
constexpr std::size_t kTranscriptionCorpus = 3000;
constexpr std::size_t kEvalEvery = 100;
constexpr double kDevThreshold = 0.5;
constexpr std::size_t kDevSubset = 100;
constexpr std::size_t kHardSubset = 300;

// Benchmark runs.
constexpr std::size_t kBenchSteps = 1500;

ModelConfig config_for(const SyntheticData& d, InterfaceKind kind, std::uint64_t seed) {
  ModelConfig m;
  fit_to_inventory(m, d.vocab.size(), d.intents.size(), d.slots.size());
  m.iface.kind = kind;
  m.seed = seed;
  return m;
}

template <class T>
double median(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? static_cast<double>(v[n / 2]) : 0.5 * (static_cast<double>(v[n / 2 - 1]) + v[n / 2]);
}

std::span<const Utterance> first(const std::vector<Utterance>& v, std::size_t n) {
  return std::span<const Utterance>(v).first(std::min(n, v.size()));
}

}  // namespace

Outcome learns_task() {
  const SyntheticData data = make_synthetic_data(DataConfig{});
  MultistageModel model(config_for(data, InterfaceKind::kGumbel, 1));
  TrainConfig t;
  t.steps = kLearnSteps;
  t.max_seconds = kLearnBudgetSeconds;
  t.schedule = LrSchedule::kSlantedTriangular;
  t.seed = 1;
  const TrainResult r = train_e2e(model, data.train, t, data.vocab);
  const EvalReport test = evaluate(model, data.test, data.vocab).report;
  const EvalReport hard = evaluate(model, data.hard, data.vocab).report;
  std::ostringstream d;
  d << "trained " << r.steps_run << "/" << kLearnSteps << " steps in " << r.seconds << " s (budget "
    << kLearnBudgetSeconds << " s), vocabulary " << data.vocab.size() << "\n"
    << "  test (" << data.test.size() << "): ICER " << test.icer << " SER " << test.ser << " IRER "
    << test.irer << " (limit " << kRegularIrerLimit << ")\n"
    << "  hard (" << data.hard.size() << "): ICER " << hard.icer << " SER " << hard.ser << " IRER "
    << hard.irer << " (limit " << kHardIrerLimit << ")";
  const bool pass = test.irer <= kRegularIrerLimit && hard.irer <= kHardIrerLimit &&
                    r.seconds <= kLearnBudgetSeconds + 1;
  return {pass, d.str()};
}

Outcome comparisons() {
  const DataConfig dc;
  const SyntheticData data = make_synthetic_data(dc);
  const auto transcripts = make_transcription_corpus(dc, data.vocab, kTranscriptionCorpus, 1234);
  const auto dev = first(data.dev, kDevSubset);
  const auto hard = first(data.hard, kHardSubset);
  std::vector<double> ms_hard, bl_hard;
  std::vector<double> random_steps, pretrained_steps;
  std::ostringstream d;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    TrainConfig t;
    t.steps = kCompareSteps;
    t.seed = seed;
    t.eval_every = kEvalEvery;
    t.dev_irer_threshold = kDevThreshold;

    MultistageModel ms(config_for(data, InterfaceKind::kGumbel, seed));
    const auto rr = train_e2e(ms, data.train, t, data.vocab, dev);
    ms_hard.push_back(evaluate(ms, hard, data.vocab).report.irer);
    random_steps.push_back(rr.steps_to_threshold ? static_cast<double>(*rr.steps_to_threshold)
                                                 : static_cast<double>(kCompareSteps + kEvalEvery));

    TrainConfig tb = t;
    tb.eval_every = 0;
    MultitaskBaseline bl(config_for(data, InterfaceKind::kGumbel, seed));
    train_baseline(bl, data.train, tb, data.vocab);
    bl_hard.push_back(evaluate(bl, hard, data.vocab).report.irer);

    TrainConfig tp = tb;
    tp.steps = kPretrainSteps;
    AcousticPretrainModel ac(config_for(data, InterfaceKind::kGumbel, seed + 100));
    pretrain_ac(ac, transcripts, tp);
    MultistageModel warm(config_for(data, InterfaceKind::kGumbel, seed));
    TrainConfig tw = t;
    tw.stop_at_threshold = true;
    const auto rw = train_e2e(warm, data.train, tw, data.vocab, dev, &ac.parameters());
    pretrained_steps.push_back(rw.steps_to_threshold ? static_cast<double>(*rw.steps_to_threshold)
                                                     : static_cast<double>(kCompareSteps + kEvalEvery));
    char line[200];
    std::snprintf(line, sizeof(line),
                  "  seed %d: hard IRER multistage %.3f baseline %.3f; steps to dev IRER <= %.2f "
                  "random %.0f pretrained %.0f\n",
                  s, ms_hard.back(), bl_hard.back(), kDevThreshold, random_steps.back(),
                  pretrained_steps.back());
    d << line;
  }
  const double mh = median(ms_hard), bh = median(bl_hard);
  const double rs = median(random_steps), ps = median(pretrained_steps);
  d << "  median hard IRER multistage " << mh << " vs baseline " << bh << "\n"
    << "  median steps to threshold pretrained " << ps << " vs random " << rs
    << " (unreached counts as " << kCompareSteps + kEvalEvery << ")";
  return {mh < bh && ps < rs, d.str()};
}

Outcome benchmark() {
  DataConfig dc;
  dc.train_size = 2000;
  const SyntheticData data = make_synthetic_data(dc);
  std::map<std::string, std::unique_ptr<MultistageModel>> owned;
  std::map<std::string, const SluModel*> models;
  for (auto kind : {InterfaceKind::kMatMul, InterfaceKind::kTopK, InterfaceKind::kGumbel}) {
    auto m = std::make_unique<MultistageModel>(config_for(data, kind, 3));
    TrainConfig t;
    t.steps = kBenchSteps;
    t.seed = 3;
    train_e2e(*m, data.train, t, data.vocab);
    models[interface_name(kind)] = m.get();
    owned[interface_name(kind)] = std::move(m);
  }
  const BenchTable table = benchmark_interfaces(models, first(data.test, 200), first(data.hard, 200), data.vocab);
  const TokenCost cost = per_token_interface_cost();
  bool cells_ok = true;
  const auto cells = table.delta_cells();
  cells_ok = cells.size() == 3;
  for (const auto& row : cells) cells_ok = cells_ok && row.size() == 4;
  std::ostringstream d;
  d << table.format() << "\n"
    << "per-token interface cost at V=" << cost.vocab << ", d=" << cost.dim << ": gumbel "
    << cost.gumbel_ns << " ns, matmul " << cost.matmul_ns << " ns, topk " << cost.topk_ns << " ns";
  return {cells_ok && cost.gumbel_ns < cost.matmul_ns, d.str()};
}

}  // namespace acceptance
