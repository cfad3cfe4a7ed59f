#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "e2eslu/synthcorpus/utterance.hpp"
#include "e2eslu/textproc/labels.hpp"
#include "e2eslu/textproc/vocab.hpp"

namespace e2eslu {

// FEAT1: "FEAT1", u32 rows, u32 cols, rows*cols little-endian float32, row-major.
void write_feat1(std::ostream& out, const FeatureMatrix& m);
void write_feat1(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feat1(std::istream& in);
FeatureMatrix read_feat1(const std::filesystem::path& path);

/// Writes one JSON object per line. When an utterance carries features they
/// are stored as FEAT1 files under `features_dir` (relative to the JSONL
/// file's directory) and referenced by "features_path".
void write_jsonl(const std::filesystem::path& path, std::span<const Utterance> utterances,
                 const IntentSet& intents, const SlotLabelSet& slots,
                 const std::filesystem::path& features_dir = "features");

/// Reads a JSONL dataset. Malformed lines raise FormatError; unknown intent
/// or slot names and slot values inconsistent with the words raise DataError.
/// Words are lowercased. Pieces and labels are filled when `vocab` is given.
std::vector<Utterance> read_jsonl(const std::filesystem::path& path, const IntentSet& intents,
                                  const SlotLabelSet& slots, const WordpieceVocab* vocab = nullptr,
                                  bool load_features = true);
std::vector<Utterance> read_jsonl(std::istream& in, const std::filesystem::path& base_dir,
                                  const IntentSet& intents, const SlotLabelSet& slots,
                                  const WordpieceVocab* vocab = nullptr, bool load_features = true);

/// vocab.txt, intents.txt and slots.txt of a data directory.
struct DatasetInventory {
  WordpieceVocab vocab;
  IntentSet intents;
  SlotLabelSet slots;

  static DatasetInventory load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
};

struct FscDataset {
  std::vector<Utterance> utterances;
  IntentSet intents;
};

/// Fluent Speech Commands style CSV with columns path, transcription, action,
/// object, location (others ignored). The (action, object, location) triple
/// becomes one intent "action|object|location"; there are no slots. Features
/// are read from `features_root / path` with the extension replaced by
/// ".feat". Pass `known_intents` to map a test CSV onto training intents.
FscDataset read_fsc_csv(const std::filesystem::path& csv_path,
                        const std::filesystem::path& features_root,
                        const IntentSet* known_intents = nullptr, bool load_features = true);

}  // namespace e2eslu
