#include "e2eslu/textproc/labels.hpp"

#include <algorithm>
#include <fstream>

#include "e2eslu/errors.hpp"

namespace e2eslu {

NameSet::NameSet(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw DataError("empty label name");
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[j] == names_[i]) throw DataError("duplicate label name '" + names_[i] + "'");
    }
  }
}

const std::string& NameSet::name(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= names_.size()) {
    throw IndexError("label id " + std::to_string(id) + " out of range");
  }
  return names_[static_cast<std::size_t>(id)];
}

std::optional<int> NameSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

int NameSet::id(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw DataError("unknown label '" + std::string(name) + "'");
}

void NameSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& n : names_) out << n << '\n';
}

std::vector<std::string> NameSet::read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

IntentSet::IntentSet(std::vector<std::string> names) : NameSet(std::move(names)) {
  if (names_.empty()) throw DataError("intent set must not be empty");
}

IntentSet IntentSet::load(const std::filesystem::path& path) { return IntentSet(read_lines(path)); }

SlotLabelSet SlotLabelSet::from_labels(std::vector<std::string> labels) {
  labels.insert(labels.begin(), std::string(kNullSlotName));
  return SlotLabelSet(std::move(labels));
}

SlotLabelSet SlotLabelSet::load(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.empty() || lines[0] != kNullSlotName) {
    throw FormatError("slot label file must start with '" + std::string(kNullSlotName) + "'");
  }
  return SlotLabelSet(std::move(lines));
}

std::vector<int> project_slot_labels(std::span<const WordSpan> spans,
                                     std::span<const std::size_t> piece_word,
                                     std::size_t word_count) {
  std::vector<int> word_label(word_count, kNullSlot);
  std::vector<char> taken(word_count, 0);
  for (const auto& s : spans) {
    if (s.start_word >= s.end_word || s.end_word > word_count) {
      throw DataError("slot span [" + std::to_string(s.start_word) + "," +
                      std::to_string(s.end_word) + ") invalid for " + std::to_string(word_count) +
                      " words");
    }
    if (s.label == kNullSlot) throw DataError("slot span with the null label");
    for (std::size_t w = s.start_word; w < s.end_word; ++w) {
      if (taken[w]) throw DataError("overlapping slot spans at word " + std::to_string(w));
      taken[w] = 1;
      word_label[w] = s.label;
    }
  }
  std::vector<int> labels(piece_word.size(), kNullSlot);
  for (std::size_t i = 0; i < piece_word.size(); ++i) {
    if (piece_word[i] == kNoWord) continue;
    if (piece_word[i] >= word_count) throw DataError("piece aligned to a word out of range");
    labels[i] = word_label[piece_word[i]];
  }
  return labels;
}

}  // namespace e2eslu
