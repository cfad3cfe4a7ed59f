#include "e2eslu/synthcorpus/corpus.hpp"

#include "e2eslu/errors.hpp"

namespace e2eslu {

void annotate(Utterance& u, const WordpieceVocab& vocab) {
  TokenizedWords t = tokenize_words(vocab, u.words);
  std::vector<WordSpan> spans;
  spans.reserve(u.slots.size());
  for (const auto& s : u.slots) spans.push_back({s.label, s.start_word, s.end_word});
  u.piece_labels = project_slot_labels(spans, t.piece_word, u.words.size());
  u.pieces = std::move(t.pieces);
  u.piece_word = std::move(t.piece_word);
}

void annotate(std::vector<Utterance>& utterances, const WordpieceVocab& vocab) {
  for (auto& u : utterances) annotate(u, vocab);
}

void render_all(std::vector<Utterance>& utterances, const FeatureRenderer& renderer,
                std::uint64_t seed) {
  const Rng root(seed ^ 0xfea7u);
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    Rng r = root.derive(i);
    utterances[i].features = renderer.render(utterances[i].pieces, r());
  }
}

std::vector<Utterance> generate_corpus(const Grammar& grammar, std::size_t n, std::uint64_t seed,
                                       const WordpieceVocab& vocab,
                                       const FeatureRenderer& renderer, ValueSource source,
                                       const std::string& id_prefix) {
  if (renderer.vocab_size() != vocab.size()) {
    throw ConfigError("feature renderer and vocabulary sizes differ");
  }
  auto utts = generate_utterances(grammar, n, seed, source, id_prefix);
  annotate(utts, vocab);
  render_all(utts, renderer, seed);
  return utts;
}

std::vector<std::vector<std::string>> word_sequences(std::span<const Utterance> utterances) {
  std::vector<std::vector<std::string>> out;
  out.reserve(utterances.size());
  for (const auto& u : utterances) out.push_back(u.words);
  return out;
}

}  // namespace e2eslu
