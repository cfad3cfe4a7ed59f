#include "e2eslu/synthcorpus/dataset_io.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "e2eslu/errors.hpp"
#include "e2eslu/synthcorpus/corpus.hpp"

namespace e2eslu {

namespace {

using nlohmann::json;

constexpr char kFeatMagic[5] = {'F', 'E', 'A', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError(std::string("truncated ") + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string join_words(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string s;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) s += ' ';
    s += words[i];
  }
  return s;
}

std::vector<std::string> split_whitespace(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

Utterance parse_record(const json& j, const std::filesystem::path& base_dir,
                       const IntentSet& intents, const SlotLabelSet& slots, bool load_features) {
  if (!j.is_object()) throw FormatError("dataset record is not a JSON object");
  for (const char* key : {"id", "words", "intent", "slots"}) {
    if (!j.contains(key)) throw FormatError(std::string("dataset record missing '") + key + "'");
  }
  if (!j["id"].is_string() || !j["words"].is_array() || !j["intent"].is_string() ||
      !j["slots"].is_array()) {
    throw FormatError("dataset record has fields of the wrong type");
  }
  Utterance u;
  u.id = j["id"].get<std::string>();
  for (const auto& w : j["words"]) {
    if (!w.is_string()) throw FormatError("non-string word in record " + u.id);
    u.words.push_back(to_lower_ascii(w.get<std::string>()));
  }
  if (u.words.empty()) throw DataError("record " + u.id + " has no words");
  u.intent = intents.id(j["intent"].get<std::string>());
  for (const auto& s : j["slots"]) {
    if (!s.is_object() || !s.contains("label") || !s.contains("value") ||
        !s.contains("start_word") || !s.contains("end_word") || !s["label"].is_string() ||
        !s["value"].is_string() || !s["start_word"].is_number_unsigned() ||
        !s["end_word"].is_number_unsigned()) {
      throw FormatError("malformed slot in record " + u.id);
    }
    GoldSlot g;
    g.label = slots.id(s["label"].get<std::string>());
    if (g.label == kNullSlot) throw DataError("record " + u.id + " uses the null label as a slot");
    g.value = to_lower_ascii(s["value"].get<std::string>());
    g.start_word = s["start_word"].get<std::size_t>();
    g.end_word = s["end_word"].get<std::size_t>();
    if (g.start_word >= g.end_word || g.end_word > u.words.size() ||
        join_words(u.words, g.start_word, g.end_word) != g.value) {
      throw DataError("slot value '" + g.value + "' does not match words of record " + u.id);
    }
    u.slots.push_back(std::move(g));
  }
  if (j.contains("features_path")) {
    if (!j["features_path"].is_string()) throw FormatError("features_path must be a string");
    u.features_path = j["features_path"].get<std::string>();
    if (load_features) u.features = read_feat1(base_dir / u.features_path);
  }
  return u;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw FormatError("unterminated quote in CSV line");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

void write_feat1(std::ostream& out, const FeatureMatrix& m) {
  if (m.data.size() != m.rows * m.cols) throw DataError("feature matrix size mismatch");
  out.write(kFeatMagic, sizeof(kFeatMagic));
  put_u32(out, static_cast<std::uint32_t>(m.rows));
  put_u32(out, static_cast<std::uint32_t>(m.cols));
  for (float v : m.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

void write_feat1(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_feat1(out, m);
}

FeatureMatrix read_feat1(std::istream& in) {
  char magic[sizeof(kFeatMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kFeatMagic, sizeof(magic)) != 0) {
    throw FormatError("not a FEAT1 file (bad magic)");
  }
  FeatureMatrix m;
  m.rows = get_u32(in, "FEAT1 header");
  m.cols = get_u32(in, "FEAT1 header");
  if (m.rows == 0 || m.cols == 0) throw FormatError("FEAT1 file with an empty matrix");
  const std::size_t n = m.rows * m.cols;
  if (n > (std::size_t{1} << 30)) throw FormatError("FEAT1 matrix implausibly large");
  std::vector<unsigned char> raw(n * 4);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw FormatError("truncated FEAT1 data");
  }
  m.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                               (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                               (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                               (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
    m.data[i] = std::bit_cast<float>(bits);
  }
  return m;
}

FeatureMatrix read_feat1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open feature file " + path.string());
  return read_feat1(in);
}

void write_jsonl(const std::filesystem::path& path, std::span<const Utterance> utterances,
                 const IntentSet& intents, const SlotLabelSet& slots,
                 const std::filesystem::path& features_dir) {
  const auto base = path.parent_path();
  bool made_dir = false;
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& u : utterances) {
    json j;
    j["id"] = u.id;
    j["words"] = u.words;
    j["intent"] = intents.name(u.intent);
    json sl = json::array();
    for (const auto& s : u.slots) {
      sl.push_back({{"label", slots.name(s.label)},
                    {"value", s.value},
                    {"start_word", s.start_word},
                    {"end_word", s.end_word}});
    }
    j["slots"] = std::move(sl);
    if (!u.features.empty()) {
      if (!made_dir) {
        std::filesystem::create_directories(base / features_dir);
        made_dir = true;
      }
      const auto rel = features_dir / (u.id + ".feat");
      write_feat1(base / rel, u.features);
      j["features_path"] = rel.generic_string();
    } else if (!u.features_path.empty()) {
      j["features_path"] = u.features_path;
    }
    out << j.dump() << '\n';
  }
}

std::vector<Utterance> read_jsonl(std::istream& in, const std::filesystem::path& base_dir,
                                  const IntentSet& intents, const SlotLabelSet& slots,
                                  const WordpieceVocab* vocab, bool load_features) {
  std::vector<Utterance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    Utterance u = parse_record(j, base_dir, intents, slots, load_features);
    if (vocab) annotate(u, *vocab);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<Utterance> read_jsonl(const std::filesystem::path& path, const IntentSet& intents,
                                  const SlotLabelSet& slots, const WordpieceVocab* vocab,
                                  bool load_features) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  return read_jsonl(in, path.parent_path(), intents, slots, vocab, load_features);
}

DatasetInventory DatasetInventory::load(const std::filesystem::path& dir) {
  return {WordpieceVocab::load(dir / "vocab.txt"), IntentSet::load(dir / "intents.txt"),
          SlotLabelSet::load(dir / "slots.txt")};
}

void DatasetInventory::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  vocab.save(dir / "vocab.txt");
  intents.save(dir / "intents.txt");
  slots.save(dir / "slots.txt");
}

FscDataset read_fsc_csv(const std::filesystem::path& csv_path,
                        const std::filesystem::path& features_root,
                        const IntentSet* known_intents, bool load_features) {
  std::ifstream in(csv_path);
  if (!in) throw FormatError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty FSC CSV");
  const auto header = parse_csv_line(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw FormatError("FSC CSV lacks column '" + name + "'");
  };
  const std::size_t c_path = column("path");
  const std::size_t c_text = column("transcription");
  const std::size_t c_action = column("action");
  const std::size_t c_object = column("object");
  const std::size_t c_location = column("location");

  std::vector<std::string> intent_names;
  if (known_intents) intent_names = known_intents->names();
  FscDataset ds;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = parse_csv_line(line);
    if (f.size() != header.size()) {
      throw FormatError("FSC CSV row " + std::to_string(row + 1) + " has " +
                        std::to_string(f.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    Utterance u;
    u.id = "fsc-" + std::to_string(row++);
    std::string text;
    for (char c : to_lower_ascii(f[c_text])) {
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == ' ') text += c;
      else text += ' ';
    }
    u.words = split_whitespace(text);
    if (u.words.empty()) throw DataError("FSC row " + u.id + " has an empty transcription");
    const std::string intent = f[c_action] + "|" + f[c_object] + "|" + f[c_location];
    auto it = std::find(intent_names.begin(), intent_names.end(), intent);
    if (it == intent_names.end()) {
      if (known_intents) throw DataError("FSC intent '" + intent + "' not in the known intent set");
      intent_names.push_back(intent);
      it = intent_names.end() - 1;
    }
    u.intent = static_cast<int>(it - intent_names.begin());
    auto feat = std::filesystem::path(f[c_path]).replace_extension(".feat");
    u.features_path = feat.generic_string();
    if (load_features) u.features = read_feat1(features_root / feat);
    ds.utterances.push_back(std::move(u));
  }
  if (intent_names.empty()) throw DataError("FSC CSV has no rows");
  ds.intents = IntentSet(std::move(intent_names));
  return ds;
}

}  // namespace e2eslu
