#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "e2eslu/synthcorpus/utterance.hpp"

namespace e2eslu {

struct DatasetSplit {
  std::vector<Utterance> train, dev, test;
};

/// Seeded shuffle, then train gets round(n * f0), dev round(n * f1) and test
/// the remainder. Fractions must be positive and sum to 1.
DatasetSplit split_dataset(std::vector<Utterance> corpus, std::array<double, 3> fractions,
                           std::uint64_t seed);

// Adjacent word pairs inside each utterance, keyed as "w1 <US> w2".
std::unordered_set<std::string> word_bigrams(std::span<const Utterance> utterances);

/// Pool utterances containing at least one word bigram that never occurs in
/// train or dev. Order of the pool is preserved.
std::vector<Utterance> build_hard_split(std::span<const Utterance> pool,
                                        std::span<const Utterance> train,
                                        std::span<const Utterance> dev);

}  // namespace e2eslu
