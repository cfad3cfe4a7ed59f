#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "e2eslu/harness/models.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, Tensor> tensors;
  nlohmann::json config;
};

// "E2ESLU1", u32 version, u32 count, then per tensor: u16 name length, name,
// u8 rank, rank x u32 dims, little-endian float32 data. A UTF-8 JSON config
// follows the tensors.
void write_checkpoint(std::ostream& out, const ParameterStore& store, const nlohmann::json& config);
void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store,
                     const nlohmann::json& config);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Config document stored with a model: its flat config plus "model_kind".
nlohmann::json model_document(const Trainable& model, const TrainConfig* train = nullptr);
void save_model(const std::filesystem::path& path, const Trainable& model,
                const TrainConfig* train = nullptr);
/// Rebuilds the model named by the checkpoint's "model_kind" and fills every
/// parameter; missing or misshapen tensors raise FormatError.
std::unique_ptr<Trainable> load_model(const std::filesystem::path& path);
void restore_parameters(const Checkpoint& ckpt, ParameterStore& store);

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
