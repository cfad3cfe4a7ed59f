#pragma once

#include <span>
#include <vector>

#include "e2eslu/harness/metrics.hpp"
#include "e2eslu/harness/models.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

struct EvalResult {
  EvalReport report;
  std::vector<Interpretation> gold;
  std::vector<Interpretation> predicted;
};

/// Greedy-decodes every utterance and scores the interpretations. Empty test
/// sets raise DataError.
EvalResult evaluate(const SluModel& model, std::span<const Utterance> test,
                    const WordpieceVocab& vocab, std::size_t batch_size = 32);

/// Same scoring with gold transcripts fed to the understanding stage.
EvalResult evaluate_oracle(const MultistageModel& model, std::span<const Utterance> test,
                           const WordpieceVocab& vocab, std::size_t batch_size = 32);

/// Fraction of valid decoder steps whose teacher-forced argmax is the target.
double token_accuracy(const Tensor& logits, const Batch& batch);
double teacher_forced_accuracy(const Trainable& model, std::span<const Utterance> data,
                               std::size_t batch_size = 32);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
