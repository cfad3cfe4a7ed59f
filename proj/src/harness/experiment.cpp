#include "e2eslu/harness/experiment.hpp"

#include "e2eslu/diffengine/rng.hpp"
#include "e2eslu/synthcorpus/corpus.hpp"
#include "e2eslu/synthcorpus/split.hpp"

namespace e2eslu {

namespace {

FeatureRenderer renderer_for(const DataConfig& cfg, std::size_t vocab_size) {
  FeatureRendererConfig rc;
  rc.feature_dim = cfg.feature_dim;
  rc.min_frames = cfg.min_frames;
  rc.max_frames = cfg.max_frames;
  rc.noise = cfg.noise;
  rc.seed = mix_seed(cfg.seed ^ 0xfea7ULL);
  return FeatureRenderer(vocab_size, rc);
}

}  // namespace

SyntheticData make_synthetic_data(const DataConfig& cfg) {
  SyntheticData d;
  d.grammar = voice_assistant_grammar(cfg.seed, cfg.lexicon_size);
  d.intents = d.grammar.intent_set();
  d.slots = d.grammar.slot_labels();
  const std::size_t n = cfg.train_size + cfg.dev_size + cfg.test_size;
  auto corpus = generate_utterances(d.grammar, n, mix_seed(cfg.seed + 1));
  d.vocab = WordpieceVocab::build(word_sequences(corpus), cfg.vocab_max);
  annotate(corpus, d.vocab);
  const FeatureRenderer renderer = renderer_for(cfg, d.vocab.size());
  render_all(corpus, renderer, mix_seed(cfg.seed + 2));
  const double total = static_cast<double>(n);
  auto split = split_dataset(std::move(corpus),
                             {cfg.train_size / total, cfg.dev_size / total, cfg.test_size / total},
                             mix_seed(cfg.seed + 3));
  d.train = std::move(split.train);
  d.dev = std::move(split.dev);
  d.test = std::move(split.test);
  if (cfg.pool_size > 0) {
    auto pool = generate_utterances(d.grammar, cfg.pool_size, mix_seed(cfg.seed + 4),
                                    ValueSource::kNovel, "pool");
    annotate(pool, d.vocab);
    render_all(pool, renderer, mix_seed(cfg.seed + 5));
    d.hard = build_hard_split(pool, d.train, d.dev);
  }
  return d;
}

std::vector<Utterance> make_transcription_corpus(const DataConfig& cfg,
                                                 const WordpieceVocab& vocab, std::size_t n,
                                                 std::uint64_t seed) {
  const Grammar grammar = voice_assistant_grammar(cfg.seed, cfg.lexicon_size);
  auto corpus = generate_utterances(grammar, n, mix_seed(seed ^ 0xac0157ULL), ValueSource::kLexicon,
                                    "asr");
  annotate(corpus, vocab);
  render_all(corpus, renderer_for(cfg, vocab.size()), mix_seed(seed ^ 0x5eedULL));
  return corpus;
}

}  // namespace e2eslu
