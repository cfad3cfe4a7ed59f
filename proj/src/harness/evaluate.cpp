#include "e2eslu/harness/evaluate.hpp"

#include <algorithm>
#include <functional>

#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

namespace {

EvalResult run_eval(const ModelConfig& cfg, std::span<const Utterance> test, std::size_t batch_size,
                    const std::function<Prediction(const Batch&)>& predict) {
  if (test.empty()) throw DataError("cannot evaluate on an empty test set");
  const auto& ac = cfg.ac;
  EvalResult r;
  std::size_t truncations = 0;
  for (std::size_t begin = 0; begin < test.size(); begin += batch_size) {
    const std::size_t end = std::min(test.size(), begin + batch_size);
    Batch batch = make_batch(test.subspan(begin, end - begin), ac.feature_dim, ac.receptive_field());
    Prediction p = predict(batch);
    truncations += p.truncations;
    for (auto& in : p.interpretations) r.predicted.push_back(std::move(in));
    for (std::size_t i = begin; i < end; ++i) r.gold.push_back(gold_interpretation(test[i]));
  }
  r.report = score(r.gold, r.predicted);
  r.report.counts.truncations = truncations;
  return r;
}

}  // namespace

EvalResult evaluate(const SluModel& model, std::span<const Utterance> test,
                    const WordpieceVocab& vocab, std::size_t batch_size) {
  return run_eval(model.config(), test, batch_size,
                  [&](const Batch& b) { return model.predict(b, vocab); });
}

EvalResult evaluate_oracle(const MultistageModel& model, std::span<const Utterance> test,
                           const WordpieceVocab& vocab, std::size_t batch_size) {
  return run_eval(model.config(), test, batch_size,
                  [&](const Batch& b) { return model.predict_from_transcripts(b, vocab); });
}

double token_accuracy(const Tensor& logits, const Batch& batch) {
  const std::vector<int> best = argmax_rows(logits);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < batch.decoder_targets.size(); ++i) {
    if (batch.decoder_targets[i] < 0) continue;
    ++total;
    if (best[i] == batch.decoder_targets[i]) ++correct;
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

double teacher_forced_accuracy(const Trainable& model, std::span<const Utterance> data,
                               std::size_t batch_size) {
  if (data.empty()) throw DataError("cannot measure accuracy on an empty set");
  const auto& ac = model.config().ac;
  double weighted = 0;
  std::size_t steps = 0;
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(data.size(), begin + batch_size);
    Batch batch = make_batch(data.subspan(begin, end - begin), ac.feature_dim, ac.receptive_field());
    Graph g(false);
    Rng rng(0);
    ForwardContext ctx{g, rng, false, 0};
    LossTerms t = model.losses(ctx, batch, LossWeights{});
    std::size_t n = 0;
    for (int target : batch.decoder_targets) n += target >= 0 ? 1 : 0;
    weighted += token_accuracy(t.asr_logits.value(), batch) * static_cast<double>(n);
    steps += n;
  }
  return weighted / static_cast<double>(steps);
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
