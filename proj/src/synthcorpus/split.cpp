#include "e2eslu/synthcorpus/split.hpp"

#include <cmath>
#include <numeric>

#include "e2eslu/diffengine/rng.hpp"
#include "e2eslu/errors.hpp"

namespace e2eslu {

namespace {
std::string bigram_key(const std::string& a, const std::string& b) { return a + '\x1f' + b; }
}  // namespace

DatasetSplit split_dataset(std::vector<Utterance> corpus, std::array<double, 3> fractions,
                           std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f > 0)) throw ConfigError("split fractions must be positive");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto n = static_cast<double>(corpus.size());
  const std::size_t n_train = static_cast<std::size_t>(std::llround(n * fractions[0]));
  const std::size_t n_dev =
      std::min(corpus.size() - n_train, static_cast<std::size_t>(std::llround(n * fractions[1])));
  DatasetSplit s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = i < n_train ? s.train : (i < n_train + n_dev ? s.dev : s.test);
    dst.push_back(std::move(corpus[order[i]]));
  }
  return s;
}

std::unordered_set<std::string> word_bigrams(std::span<const Utterance> utterances) {
  std::unordered_set<std::string> out;
  for (const auto& u : utterances) {
    for (std::size_t i = 0; i + 1 < u.words.size(); ++i) out.insert(bigram_key(u.words[i], u.words[i + 1]));
  }
  return out;
}

std::vector<Utterance> build_hard_split(std::span<const Utterance> pool,
                                        std::span<const Utterance> train,
                                        std::span<const Utterance> dev) {
  auto seen = word_bigrams(train);
  seen.merge(word_bigrams(dev));
  std::vector<Utterance> out;
  for (const auto& u : pool) {
    for (std::size_t i = 0; i + 1 < u.words.size(); ++i) {
      if (!seen.count(bigram_key(u.words[i], u.words[i + 1]))) {
        out.push_back(u);
        break;
      }
    }
  }
  return out;
}

}  // namespace e2eslu
