#include "e2eslu/diffengine/parameters.hpp"

#include <cmath>

#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

Tensor& ParameterStore::add(std::string name, Shape shape, Init init, Rng& rng, std::string group,
                            std::size_t fan_in, std::size_t fan_out) {
  if (contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  Tensor t(shape);
  switch (init) {
    case Init::kZeros:
      break;
    case Init::kOnes:
      for (auto& v : t.values()) v = Real(1);
      break;
    case Init::kXavierUniform: {
      if (fan_in == 0) fan_in = shape.size() >= 2 ? numel(shape) / shape.back() : shape[0];
      if (fan_out == 0) fan_out = shape.back();
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (auto& v : t.values()) v = static_cast<Real>(rng.uniform(-bound, bound));
      break;
    }
    case Init::kEmbeddingNormal:
      for (auto& v : t.values()) v = static_cast<Real>(rng.normal(0.0, 0.02));
      break;
  }
  t.set_requires_grad(true);
  auto entry = std::make_unique<NamedParameter>();
  entry->name = std::move(name);
  entry->tensor = std::move(t);
  entry->group = std::move(group);
  entries_.push_back(std::move(entry));
  return entries_.back()->tensor;
}

Tensor& ParameterStore::get(std::string_view name) {
  for (auto& e : entries_) {
    if (e->name == name) return e->tensor;
  }
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

const Tensor& ParameterStore::get(std::string_view name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

bool ParameterStore::contains(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e->name == name) return true;
  }
  return false;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e->tensor.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e->tensor.zero_grad();
}

std::vector<Tensor*> ParameterStore::tensors() {
  std::vector<Tensor*> out;
  out.reserve(entries_.size());
  for (auto& e : entries_) out.push_back(&e->tensor);
  return out;
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
