#include "e2eslu/synthcorpus/complexity.hpp"

#include <cmath>
#include <unordered_map>

#include "e2eslu/errors.hpp"

namespace e2eslu {

EntropyReport ngram_entropy(std::span<const std::vector<std::string>> sentences,
                            std::size_t n_max) {
  if (n_max < 1) throw ConfigError("ngram_entropy: n_max must be at least 1");
  if (sentences.empty()) throw DataError("ngram_entropy: empty corpus");
  EntropyReport r;
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::unordered_map<std::string, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& s : sentences) {
      for (std::size_t i = 0; i + n <= s.size(); ++i) {
        std::string key = s[i];
        for (std::size_t j = 1; j < n; ++j) key += '\x1f' + s[i + j];
        ++counts[key];
        ++total;
      }
    }
    double h = 0;
    for (const auto& [key, c] : counts) {
      const double p = static_cast<double>(c) / static_cast<double>(total);
      h -= p * std::log2(p);
    }
    r.per_n.push_back(h);
  }
  double s = 0;
  for (double h : r.per_n) s += h;
  r.average = s / static_cast<double>(r.per_n.size());
  return r;
}

}  // namespace e2eslu
