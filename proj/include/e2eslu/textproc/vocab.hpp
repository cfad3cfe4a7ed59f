#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace e2eslu {

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;
inline constexpr int kSpecialCount = 4;
inline constexpr std::string_view kContinuationPrefix = "##";

/// Wordpiece inventory. Ids are dense; ids 0-3 are [PAD], [UNK], [BOS], [EOS].
/// Pieces that continue a word carry the "##" prefix.
class WordpieceVocab {
 public:
  WordpieceVocab();
  // Validates special tokens at ids 0-3 and uniqueness of every piece.
  explicit WordpieceVocab(std::vector<std::string> pieces);

  /// Frequency-ranked substring inventory. Every single character is added in
  /// the position form(s) it occurs in (word-initial plain, otherwise "##"),
  /// then the most frequent longer substrings until `max_size` pieces exist.
  /// Ties are broken lexicographically, so the result depends only on the
  /// multiset of words.
  static WordpieceVocab build(std::span<const std::vector<std::string>> corpus,
                              std::size_t max_size, std::size_t max_piece_chars = 16);

  static WordpieceVocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const noexcept { return pieces_.size(); }
  const std::string& piece(int id) const;
  std::optional<int> find(std::string_view piece) const;
  const std::vector<std::string>& pieces() const noexcept { return pieces_; }

  static bool is_special(int id) noexcept { return id >= 0 && id < kSpecialCount; }

  /// Greedy longest-match-first segmentation of one lowercase word. Returns
  /// [UNK] when some position cannot be matched; never empty for a non-empty word.
  std::vector<int> tokenize(std::string_view word) const;

  /// Renders ids back to text: "##" pieces join the previous piece, other
  /// pieces are separated by one space, and [PAD]/[BOS]/[EOS] are dropped.
  std::string detokenize(std::span<const int> ids) const;

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
};

struct TokenizedWords {
  std::vector<int> pieces;
  // Word index of every piece.
  std::vector<std::size_t> piece_word;
};

TokenizedWords tokenize_words(const WordpieceVocab& vocab, std::span<const std::string> words);

// Byte offsets of UTF-8 code point starts in `s`, plus s.size() at the end.
std::vector<std::size_t> utf8_boundaries(std::string_view s);

std::string to_lower_ascii(std::string_view s);

}  // namespace e2eslu
