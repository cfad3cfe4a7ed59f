#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace e2eslu {

inline constexpr int kNullSlot = 0;
inline constexpr std::string_view kNullSlotName = "null";

// Ordered set of unique names with dense ids.
class NameSet {
 public:
  NameSet() = default;
  explicit NameSet(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(int id) const;
  std::optional<int> find(std::string_view name) const;
  // Throws DataError for unknown names.
  int id(std::string_view name) const;
  const std::vector<std::string>& names() const noexcept { return names_; }

  void save(const std::filesystem::path& path) const;

 protected:
  static std::vector<std::string> read_lines(const std::filesystem::path& path);

  std::vector<std::string> names_;
};

/// Intent classes (N_IC of them).
class IntentSet : public NameSet {
 public:
  IntentSet() = default;
  explicit IntentSet(std::vector<std::string> names);
  static IntentSet load(const std::filesystem::path& path);
};

/// Slot labels with the null label fixed at id 0 (N_SL includes it).
class SlotLabelSet : public NameSet {
 public:
  SlotLabelSet() : NameSet({std::string(kNullSlotName)}) {}
  // `labels` excludes the null label, which is prepended.
  static SlotLabelSet from_labels(std::vector<std::string> labels);
  static SlotLabelSet load(const std::filesystem::path& path);

 private:
  explicit SlotLabelSet(std::vector<std::string> all) : NameSet(std::move(all)) {}
};

// Slot over words [start_word, end_word).
struct WordSpan {
  int label = kNullSlot;
  std::size_t start_word = 0;
  std::size_t end_word = 0;
};

inline constexpr std::size_t kNoWord = static_cast<std::size_t>(-1);

/// Per-piece slot label ids: every piece of a slot's words gets that slot's
/// label, everything else (including pieces whose word index is kNoWord, used
/// for BOS/EOS) gets null. Overlapping or out-of-range spans raise DataError.
std::vector<int> project_slot_labels(std::span<const WordSpan> spans,
                                     std::span<const std::size_t> piece_word,
                                     std::size_t word_count);

}  // namespace e2eslu
