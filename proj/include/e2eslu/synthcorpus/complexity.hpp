#pragma once

#include <span>
#include <string>
#include <vector>

namespace e2eslu {

struct EntropyReport {
  // per_n[i] is the entropy in bits of the (i+1)-gram distribution.
  std::vector<double> per_n;
  double average = 0;
};

/// Shannon entropy (base 2) of the empirical word n-gram distribution for
/// n = 1..n_max, n-grams taken within sentences, plus the mean over n. An
/// order with no n-grams at all contributes 0.
EntropyReport ngram_entropy(std::span<const std::vector<std::string>> sentences,
                            std::size_t n_max = 3);

}  // namespace e2eslu
