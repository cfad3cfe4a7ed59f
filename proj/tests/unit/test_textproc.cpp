#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "e2eslu/diffengine/rng.hpp"
#include "e2eslu/errors.hpp"
#include "e2eslu/synthcorpus/grammar.hpp"
#include "e2eslu/textproc/labels.hpp"
#include "e2eslu/textproc/vocab.hpp"

using namespace e2eslu;

namespace {

WordpieceVocab small_vocab() {
  return WordpieceVocab({"[PAD]", "[UNK]", "[BOS]", "[EOS]", "play", "p", "l", "a", "y", "##l",
                         "##a", "##y", "##ing", "##s", "s", "o", "n", "g", "##o", "##n", "##g",
                         "song"});
}

// Greedy longest-prefix match, written out independently.
std::vector<int> reference_tokenize(const WordpieceVocab& v, const std::string& word) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < word.size()) {
    int found = -1;
    std::size_t len = 0;
    for (std::size_t end = word.size(); end > pos; --end) {
      std::string cand = (pos == 0 ? "" : "##") + word.substr(pos, end - pos);
      if (auto id = v.find(cand)) {
        found = *id;
        len = end - pos;
        break;
      }
    }
    if (found < 0) return {kUnkId};
    out.push_back(found);
    pos += len;
  }
  return out;
}

std::string join(const std::vector<std::string>& w) {
  std::string s;
  for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
  return s;
}

}  // namespace

TEST(Vocab, SpecialIds) {
  WordpieceVocab v;
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.piece(kPadId), "[PAD]");
  EXPECT_EQ(v.piece(kEosId), "[EOS]");
  EXPECT_TRUE(WordpieceVocab::is_special(kBosId));
  EXPECT_FALSE(WordpieceVocab::is_special(4));
  EXPECT_THROW(v.piece(4), IndexError);
}

TEST(Vocab, ConstructorValidates) {
  EXPECT_THROW(WordpieceVocab({"[UNK]", "[PAD]", "[BOS]", "[EOS]"}), FormatError);
  EXPECT_THROW(WordpieceVocab({"[PAD]", "[UNK]", "[BOS]", "[EOS]", "a", "a"}), FormatError);
  EXPECT_THROW(WordpieceVocab({"[PAD]", "[UNK]", "[BOS]", "[EOS]", ""}), FormatError);
}

TEST(Vocab, LongestMatchExamples) {
  auto v = small_vocab();
  EXPECT_EQ(v.tokenize("playing"), (std::vector<int>{4, 12}));
  EXPECT_EQ(v.tokenize("plays"), (std::vector<int>{4, 13}));
  EXPECT_EQ(v.tokenize("song"), (std::vector<int>{21}));
  EXPECT_EQ(v.tokenize("songs"), (std::vector<int>{21, 13}));
  EXPECT_EQ(v.tokenize("pay"), (std::vector<int>{5, 10, 11}));
  EXPECT_EQ(v.tokenize("xyz"), (std::vector<int>{kUnkId}));
  EXPECT_EQ(v.tokenize("px"), (std::vector<int>{kUnkId}));
}

TEST(Vocab, DetokenizeJoinsContinuations) {
  auto v = small_vocab();
  EXPECT_EQ(v.detokenize(std::vector<int>{kBosId, 4, 12, 21, 13, kEosId, kPadId}), "playing songs");
  EXPECT_EQ(v.detokenize(std::vector<int>{4, kUnkId}), "play [UNK]");
  EXPECT_EQ(v.detokenize(std::vector<int>{}), "");
}

TEST(Vocab, BuildCoversEveryCharacter) {
  std::vector<std::vector<std::string>> corpus = {{"play", "some", "jazz"}, {"stop", "the", "music"}};
  auto v = WordpieceVocab::build(corpus, 60);
  EXPECT_LE(v.size(), 60u);
  for (const auto& s : corpus) {
    for (const auto& w : s) {
      auto ids = v.tokenize(w);
      EXPECT_EQ(std::count(ids.begin(), ids.end(), kUnkId), 0) << w;
      EXPECT_EQ(v.detokenize(ids), w);
    }
  }
  EXPECT_THROW(WordpieceVocab::build(corpus, 5), ConfigError);
  EXPECT_THROW(WordpieceVocab::build({}, 50), DataError);
}

TEST(Vocab, BuildIsOrderIndependent) {
  std::vector<std::vector<std::string>> a = {{"red", "green"}, {"blue", "red"}};
  std::vector<std::vector<std::string>> b = {{"red", "blue"}, {"green", "red"}};
  EXPECT_EQ(WordpieceVocab::build(a, 30).pieces(), WordpieceVocab::build(b, 30).pieces());
}

TEST(Vocab, MatchesReferenceTokenizerOnGrammarWords) {
  Grammar g = voice_assistant_grammar(3, 40);
  auto us = generate_utterances(g, 400, 5);
  std::vector<std::vector<std::string>> corpus;
  for (const auto& u : us) corpus.push_back(u.words);
  auto v = WordpieceVocab::build(corpus, 160);
  auto novel = generate_utterances(g, 200, 9, ValueSource::kNovel);
  for (const auto& u : novel) {
    for (const auto& w : u.words) EXPECT_EQ(v.tokenize(w), reference_tokenize(v, w)) << w;
  }
}

TEST(Vocab, RoundTripThousandSentences) {
  Grammar g = voice_assistant_grammar(11, 40);
  auto us = generate_utterances(g, 1000, 12);
  std::vector<std::vector<std::string>> corpus;
  for (const auto& u : us) corpus.push_back(u.words);
  auto v = WordpieceVocab::build(corpus, 200);
  for (const auto& u : us) {
    auto t = tokenize_words(v, u.words);
    ASSERT_EQ(v.detokenize(t.pieces), join(u.words));
    ASSERT_EQ(t.pieces.size(), t.piece_word.size());
    for (std::size_t i = 1; i < t.piece_word.size(); ++i) {
      EXPECT_LE(t.piece_word[i - 1], t.piece_word[i]);
      const bool cont = v.piece(t.pieces[i]).starts_with(kContinuationPrefix);
      EXPECT_EQ(cont, t.piece_word[i] == t.piece_word[i - 1]);
    }
  }
}

TEST(Vocab, SaveLoad) {
  auto v = small_vocab();
  auto path = std::filesystem::temp_directory_path() / "e2eslu_vocab_test.txt";
  v.save(path);
  EXPECT_EQ(WordpieceVocab::load(path).pieces(), v.pieces());
  std::filesystem::remove(path);
  EXPECT_THROW(WordpieceVocab::load(path), FormatError);
}

TEST(Utf8, Boundaries) {
  EXPECT_EQ(utf8_boundaries("ab"), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(utf8_boundaries("\xc3\xa9t\xc3\xa9"), (std::vector<std::size_t>{0, 2, 3, 5}));
  EXPECT_EQ(utf8_boundaries(""), (std::vector<std::size_t>{0}));
  EXPECT_EQ(to_lower_ascii("PlAy Jazz"), "play jazz");
}

TEST(Labels, NameSet) {
  IntentSet s({"play", "stop"});
  EXPECT_EQ(s.id("stop"), 1);
  EXPECT_FALSE(s.find("pause").has_value());
  EXPECT_THROW(s.id("pause"), DataError);
  EXPECT_THROW(s.name(2), IndexError);
  EXPECT_THROW(IntentSet({"a", "a"}), DataError);
  EXPECT_THROW(IntentSet(std::vector<std::string>{}), DataError);
}

TEST(Labels, SlotSetHasNullFirst) {
  auto s = SlotLabelSet::from_labels({"artist", "song"});
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.name(kNullSlot), "null");
  EXPECT_EQ(s.id("song"), 2);
}

TEST(Labels, ProjectSpans) {
  // words: play(0) some(1) miles(2) davis(3); pieces map onto words.
  std::vector<std::size_t> pw = {kNoWord, 0, 1, 2, 2, 3, kNoWord};
  std::vector<WordSpan> spans = {{2, 2, 4}};
  EXPECT_EQ(project_slot_labels(spans, pw, 4), (std::vector<int>{0, 0, 0, 2, 2, 2, 0}));
  EXPECT_EQ(project_slot_labels({}, pw, 4), (std::vector<int>(7, 0)));
}

TEST(Labels, ProjectRejectsBadSpans) {
  std::vector<std::size_t> pw = {0, 1, 2};
  std::vector<WordSpan> overlap = {{1, 0, 2}, {2, 1, 3}};
  EXPECT_THROW(project_slot_labels(overlap, pw, 3), DataError);
  std::vector<WordSpan> out_of_range = {{1, 2, 4}};
  EXPECT_THROW(project_slot_labels(out_of_range, pw, 3), DataError);
  std::vector<WordSpan> empty = {{1, 2, 2}};
  EXPECT_THROW(project_slot_labels(empty, pw, 3), DataError);
  std::vector<WordSpan> null_label = {{kNullSlot, 0, 1}};
  EXPECT_THROW(project_slot_labels(null_label, pw, 3), DataError);
  std::vector<std::size_t> bad_pw = {0, 5};
  EXPECT_THROW(project_slot_labels({}, bad_pw, 3), DataError);
}
