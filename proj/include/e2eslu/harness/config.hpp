#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "e2eslu/acoustic/acoustic.hpp"
#include "e2eslu/interface/embedders.hpp"
#include "e2eslu/semantic/semantic.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

struct ModelConfig {
  ACConfig ac;
  SCConfig sc;
  InterfaceConfig iface;
  std::uint64_t seed = 1;
};

enum class LrSchedule { kConstant, kSlantedTriangular };

struct LossWeights {
  Real intent = 1;
  Real slot = 1;
  Real asr = 1;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t steps = 2000;
  double lr = 1e-3;
  LrSchedule schedule = LrSchedule::kConstant;
  double cut_fraction = 0.1;
  double lr_ratio = 32;
  // Steps between unfreezing the next parameter group; 0 trains everything.
  std::size_t unfreeze_interval = 0;
  double clip_norm = 1.0;
  LossWeights weights;
  std::size_t log_every = 100;
  // Dev evaluation cadence (0 = never) and an optional early-stop threshold.
  std::size_t eval_every = 0;
  double dev_irer_threshold = -1;
  bool stop_at_threshold = false;
  // Wall-clock budget in seconds; 0 means unlimited.
  double max_seconds = 0;
  std::uint64_t seed = 1;
  bool verbose = false;

  void validate() const;
  double lr_at(std::size_t step) const;
};

// Sets vocabulary, intent and slot label counts of both stages.
void fit_to_inventory(ModelConfig& model, std::size_t vocab_size, std::size_t intents,
                      std::size_t slot_labels);

/// Reads keys of a flat JSON object into the configs; unknown keys raise
/// ConfigError. Absent keys keep their current values.
void apply_flat_config(const nlohmann::json& flat, ModelConfig& model, TrainConfig* train);
nlohmann::json to_flat_config(const ModelConfig& model, const TrainConfig* train);
nlohmann::json read_config_file(const std::filesystem::path& path);

/// FNV-1a over the canonical serialization of a config document.
std::uint64_t config_hash(const nlohmann::json& config);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
