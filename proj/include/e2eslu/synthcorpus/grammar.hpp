#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "e2eslu/diffengine/rng.hpp"
#include "e2eslu/synthcorpus/utterance.hpp"
#include "e2eslu/textproc/labels.hpp"

namespace e2eslu {

// Produces made-up multi-syllable words, e.g. "kalo mire".
struct OpenValueGenerator {
  std::vector<std::string> syllables;
  std::size_t min_syllables = 2;
  std::size_t max_syllables = 3;
  std::size_t min_words = 1;
  std::size_t max_words = 2;

  std::string generate(Rng& rng) const;
};

struct SlotType {
  std::string name;
  // Values used by regular generation passes.
  std::vector<std::string> lexicon;
  // Present for open slot types: novel values for held-out passes.
  std::optional<OpenValueGenerator> open;
};

struct IntentSpec {
  std::string name;
  // Space-separated words; "{slot}" marks a placeholder.
  std::vector<std::string> templates;
};

struct Grammar {
  std::vector<IntentSpec> intents;
  std::vector<SlotType> slot_types;
  std::vector<std::string> carrier_prefixes;
  std::vector<std::string> carrier_suffixes;
  double carrier_probability = 0.25;

  // Placeholders must name declared slot types, every intent needs a
  // template, and no template may put two placeholders of the same type
  // next to each other. Throws DataError.
  void validate() const;

  IntentSet intent_set() const;
  SlotLabelSet slot_labels() const;
};

enum class ValueSource {
  kLexicon,  // open and closed slots draw from their lexicons
  kNovel,    // open slots draw fresh values absent from their lexicons
};

/// Samples `n` utterances (words, intent, gold slots); deterministic per
/// (grammar, n, seed, source). Utterance i depends only on (seed, i).
std::vector<Utterance> generate_utterances(const Grammar& grammar, std::size_t n,
                                           std::uint64_t seed,
                                           ValueSource source = ValueSource::kLexicon,
                                           const std::string& id_prefix = "utt");

/// Voice-assistant style grammar: 10 intents, 9 slot types (5 open), with
/// open lexicons of `lexicon_size` values drawn from `seed`.
Grammar voice_assistant_grammar(std::uint64_t seed, std::size_t lexicon_size = 40);

/// Two-template grammar with a tiny lexicon (low complexity reference).
Grammar two_template_grammar();

}  // namespace e2eslu
