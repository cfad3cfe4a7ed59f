#pragma once

#include <cstdint>
#include <vector>

#include "e2eslu/synthcorpus/features.hpp"
#include "e2eslu/synthcorpus/grammar.hpp"
#include "e2eslu/textproc/labels.hpp"
#include "e2eslu/textproc/vocab.hpp"

namespace e2eslu {

struct DataConfig {
  std::uint64_t seed = 7;
  std::size_t train_size = 3000;
  std::size_t dev_size = 300;
  std::size_t test_size = 500;
  // Held-out pass with novel open-slot values, filtered into the hard set.
  std::size_t pool_size = 1500;
  std::size_t lexicon_size = 300;
  std::size_t vocab_max = 160;
  std::size_t feature_dim = 64;
  std::size_t min_frames = 10;
  std::size_t max_frames = 16;
  double noise = 0.1;
};

struct SyntheticData {
  Grammar grammar;
  WordpieceVocab vocab;
  IntentSet intents;
  SlotLabelSet slots;
  std::vector<Utterance> train, dev, test, hard;
};

/// Voice-assistant grammar corpus split into train/dev/test, plus a hard set
/// from a novel-value pool. The vocabulary is built from the regular corpus.
SyntheticData make_synthetic_data(const DataConfig& cfg);

/// Extra transcription corpus from the same grammar and renderer settings,
/// independent of the SLU splits (different seed stream).
std::vector<Utterance> make_transcription_corpus(const DataConfig& cfg,
                                                 const WordpieceVocab& vocab, std::size_t n,
                                                 std::uint64_t seed);

}  // namespace e2eslu
