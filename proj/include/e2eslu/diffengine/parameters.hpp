#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "e2eslu/diffengine/rng.hpp"
#include "e2eslu/diffengine/tensor.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

enum class Init {
  kZeros,
  kOnes,
  // Uniform in +-sqrt(6 / (fan_in + fan_out)).
  kXavierUniform,
  // N(0, 0.02), used for embedding tables.
  kEmbeddingNormal,
};

struct NamedParameter {
  std::string name;
  Tensor tensor;
  // Group label used by unfreezing schedules ("ac", "sc", "head", ...).
  std::string group;
  bool frozen = false;
};

/// Owns every trainable tensor of a model under a unique name. Entries are
/// heap-allocated so that layer objects may keep stable pointers to them.
class ParameterStore {
 public:
  Tensor& add(std::string name, Shape shape, Init init, Rng& rng, std::string group = {},
              std::size_t fan_in = 0, std::size_t fan_out = 0);

  Tensor& get(std::string_view name);
  const Tensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<std::unique_ptr<NamedParameter>>& entries() noexcept { return entries_; }
  const std::vector<std::unique_ptr<NamedParameter>>& entries() const noexcept { return entries_; }

  std::size_t scalar_count() const;
  void zero_grad();
  std::vector<Tensor*> tensors();

 private:
  std::vector<std::unique_ptr<NamedParameter>> entries_;
};

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
