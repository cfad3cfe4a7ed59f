#include "e2eslu/textproc/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "e2eslu/errors.hpp"

namespace e2eslu {

namespace {
const std::vector<std::string> kSpecialPieces = {"[PAD]", "[UNK]", "[BOS]", "[EOS]"};

std::string continuation(std::string_view s) { return std::string(kContinuationPrefix) + std::string(s); }
}  // namespace

std::vector<std::size_t> utf8_boundaries(std::string_view s) {
  std::vector<std::size_t> b;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if ((c & 0xC0) != 0x80) b.push_back(i);
  }
  b.push_back(s.size());
  return b;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

WordpieceVocab::WordpieceVocab() : WordpieceVocab(kSpecialPieces) {}

WordpieceVocab::WordpieceVocab(std::vector<std::string> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.size() < kSpecialCount ||
      !std::equal(kSpecialPieces.begin(), kSpecialPieces.end(), pieces_.begin())) {
    throw FormatError("vocabulary must start with [PAD], [UNK], [BOS], [EOS]");
  }
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].empty() || pieces_[i] == kContinuationPrefix) {
      throw FormatError("empty wordpiece at id " + std::to_string(i));
    }
    if (!index_.emplace(pieces_[i], static_cast<int>(i)).second) {
      throw FormatError("duplicate wordpiece '" + pieces_[i] + "'");
    }
  }
}

WordpieceVocab WordpieceVocab::build(std::span<const std::vector<std::string>> corpus,
                                     std::size_t max_size, std::size_t max_piece_chars) {
  if (corpus.empty()) throw DataError("build_vocab: empty corpus");
  std::map<std::string, std::size_t> word_freq;
  for (const auto& sentence : corpus) {
    for (const auto& w : sentence) {
      if (!w.empty()) ++word_freq[w];
    }
  }
  if (word_freq.empty()) throw DataError("build_vocab: corpus has no words");

  std::set<std::string> chars;
  std::map<std::string, std::size_t> counts;
  for (const auto& [word, freq] : word_freq) {
    const auto b = utf8_boundaries(word);
    const std::size_t n = b.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string_view ch(word.data() + b[i], b[i + 1] - b[i]);
      chars.insert(i == 0 ? std::string(ch) : continuation(ch));
      for (std::size_t j = i + 2; j <= std::min(n, i + max_piece_chars); ++j) {
        const std::string_view sub(word.data() + b[i], b[j] - b[i]);
        counts[i == 0 ? std::string(sub) : continuation(sub)] += freq;
      }
    }
  }
  if (max_size < chars.size() + kSpecialCount) {
    throw ConfigError("build_vocab: max_size " + std::to_string(max_size) + " below " +
                      std::to_string(chars.size()) + " characters + 4 specials");
  }
  std::vector<std::string> pieces = kSpecialPieces;
  pieces.insert(pieces.end(), chars.begin(), chars.end());

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [piece, count] : ranked) {
    if (pieces.size() >= max_size) break;
    pieces.push_back(piece);
  }
  return WordpieceVocab(std::move(pieces));
}

WordpieceVocab WordpieceVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocabulary file " + path.string());
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pieces.push_back(line);
  }
  return WordpieceVocab(std::move(pieces));
}

void WordpieceVocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write vocabulary file " + path.string());
  for (const auto& p : pieces_) out << p << '\n';
}

const std::string& WordpieceVocab::piece(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= pieces_.size()) {
    throw IndexError("wordpiece id " + std::to_string(id) + " outside vocabulary of " +
                     std::to_string(pieces_.size()));
  }
  return pieces_[static_cast<std::size_t>(id)];
}

std::optional<int> WordpieceVocab::find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> WordpieceVocab::tokenize(std::string_view word) const {
  std::vector<int> out;
  if (word.empty()) return out;
  const auto b = utf8_boundaries(word);
  const std::size_t n = b.size() - 1;
  std::size_t start = 0;
  std::string key;
  while (start < n) {
    int match = -1;
    std::size_t match_end = start;
    for (std::size_t end = n; end > start; --end) {
      const std::string_view sub(word.data() + b[start], b[end] - b[start]);
      key = start == 0 ? std::string(sub) : continuation(sub);
      if (auto it = index_.find(key); it != index_.end()) {
        match = it->second;
        match_end = end;
        break;
      }
    }
    if (match < 0) return {kUnkId};
    out.push_back(match);
    start = match_end;
  }
  return out;
}

std::string WordpieceVocab::detokenize(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    const std::string& p = piece(id);
    if (p.size() > kContinuationPrefix.size() && p.starts_with(kContinuationPrefix)) {
      out += p.substr(kContinuationPrefix.size());
    } else {
      if (!out.empty()) out += ' ';
      out += p;
    }
  }
  return out;
}

TokenizedWords tokenize_words(const WordpieceVocab& vocab, std::span<const std::string> words) {
  TokenizedWords t;
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (int id : vocab.tokenize(words[w])) {
      t.pieces.push_back(id);
      t.piece_word.push_back(w);
    }
  }
  return t;
}

}  // namespace e2eslu
