#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "e2eslu/synthcorpus/features.hpp"
#include "e2eslu/synthcorpus/grammar.hpp"
#include "e2eslu/textproc/vocab.hpp"

namespace e2eslu {

// Fills pieces, piece_word and piece_labels from words and gold slots.
void annotate(Utterance& u, const WordpieceVocab& vocab);
void annotate(std::vector<Utterance>& utterances, const WordpieceVocab& vocab);

// Renders features for every utterance; utterance i uses a seed derived from (seed, i).
void render_all(std::vector<Utterance>& utterances, const FeatureRenderer& renderer,
                std::uint64_t seed);

/// Generates, annotates and renders `n` utterances with a fixed vocabulary.
std::vector<Utterance> generate_corpus(const Grammar& grammar, std::size_t n, std::uint64_t seed,
                                       const WordpieceVocab& vocab,
                                       const FeatureRenderer& renderer,
                                       ValueSource source = ValueSource::kLexicon,
                                       const std::string& id_prefix = "utt");

std::vector<std::vector<std::string>> word_sequences(std::span<const Utterance> utterances);

}  // namespace e2eslu
