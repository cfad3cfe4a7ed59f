#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace e2eslu {

// Row-major [rows x cols] acoustic feature frames (32-bit, as stored on disk).
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  bool empty() const noexcept { return rows == 0; }
  const float* row(std::size_t r) const { return data.data() + r * cols; }
  bool operator==(const FeatureMatrix&) const = default;
};

struct GoldSlot {
  int label = 0;
  std::string value;
  // Word span [start_word, end_word).
  std::size_t start_word = 0;
  std::size_t end_word = 0;

  bool operator==(const GoldSlot&) const = default;
};

/// One SLU example. `pieces`, `piece_word` and `piece_labels` are derived from
/// `words` and `slots` with a vocabulary and always have equal length.
struct Utterance {
  std::string id;
  std::vector<std::string> words;
  int intent = -1;
  std::vector<GoldSlot> slots;

  std::vector<int> pieces;
  std::vector<std::size_t> piece_word;
  std::vector<int> piece_labels;

  FeatureMatrix features;
  std::string features_path;
};

}  // namespace e2eslu
