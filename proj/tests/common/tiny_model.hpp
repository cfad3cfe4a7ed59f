#pragma once

// Small model dimensions and a two-utterance batch for fast checks.

#include <string>
#include <vector>

#include "e2eslu/harness/config.hpp"
#include "e2eslu/synthcorpus/utterance.hpp"

namespace tiny {

using namespace e2eslu;

// Tiny model dimensions for composite checks.
inline ModelConfig config() {
  ModelConfig m;
  m.ac.feature_dim = 5;
  m.ac.conv_channels = 6;
  m.ac.model_dim = 8;
  m.ac.encoder_layers = 1;
  m.ac.decoder_layers = 1;
  m.ac.heads = 2;
  m.ac.ff_dim = 12;
  m.ac.dropout = 0;
  m.ac.max_decode = 6;
  m.ac.vocab_size = 11;
  m.sc.model_dim = 8;
  m.sc.layers = 4;
  m.sc.heads = 2;
  m.sc.ff_dim = 12;
  m.sc.dropout = 0;
  m.sc.vocab_size = 11;
  m.sc.intents = 3;
  m.sc.slot_labels = 4;
  m.iface.kind = InterfaceKind::kMatMul;
  m.iface.k = 4;
  m.seed = 5;
  return m;
}

// Two utterances with features long enough for the conv stack.
inline std::vector<Utterance> utterances(const ModelConfig& m) {
  Rng rng(77);
  std::vector<Utterance> us(2);
  const std::size_t frames[2] = {24, 31};
  const std::vector<std::vector<int>> pieces = {{4, 5, 6}, {7, 8, 9, 10, 4}};
  const std::vector<std::vector<int>> labels = {{0, 1, 1}, {2, 0, 3, 3, 0}};
  for (std::size_t i = 0; i < 2; ++i) {
    us[i].id = "u" + std::to_string(i);
    us[i].pieces = pieces[i];
    us[i].piece_labels = labels[i];
    us[i].intent = static_cast<int>(i + 1);
    us[i].features.rows = frames[i];
    us[i].features.cols = m.ac.feature_dim;
    for (std::size_t j = 0; j < frames[i] * m.ac.feature_dim; ++j) {
      us[i].features.data.push_back(static_cast<float>(rng.normal(0, 1)));
    }
  }
  return us;
}

}  // namespace tiny
