#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "e2eslu/diffengine/real.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of reals with an optional gradient buffer.
///
/// Tensors are plain values: copying a tensor copies its data. Autodiff
/// identity lives in `Graph`, which refers to parameter tensors by address.
/// A tensor that does not require gradients never accumulates one.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0));
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor scalar(Real value) { return Tensor(Shape{}, std::vector<Real>{value}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  // Extent of axis `axis`; negative values count from the back.
  std::size_t dim(int axis) const;

  Real* data() noexcept { return data_.data(); }
  const Real* data() const noexcept { return data_.data(); }
  std::span<Real> values() noexcept { return data_; }
  std::span<const Real> values() const noexcept { return data_; }
  std::vector<Real>& storage() noexcept { return data_; }
  const std::vector<Real>& storage() const noexcept { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }
  Real& at(std::size_t row, std::size_t col) { return data_[row * shape_.back() + col]; }
  Real at(std::size_t row, std::size_t col) const { return data_[row * shape_.back() + col]; }

  // Value of a single-element tensor.
  Real item() const;

  bool requires_grad() const noexcept { return requires_grad_; }
  void set_requires_grad(bool flag);

  bool has_grad() const noexcept { return !grad_.empty(); }
  std::span<const Real> grad() const noexcept { return grad_; }
  // Adds `delta` into the gradient buffer, allocating it on first use.
  // No-op unless the tensor requires gradients.
  void accumulate_grad(std::span<const Real> delta);
  // Allocates a zero gradient buffer if absent.
  void ensure_grad();
  void zero_grad();
  void clear_grad() { grad_.clear(); grad_.shrink_to_fit(); }
  std::span<Real> grad_mut() noexcept { return grad_; }

  // Same data under a different shape with equal element count.
  Tensor reshaped(Shape shape) const;

 private:
  Shape shape_;
  std::vector<Real> data_;
  std::vector<Real> grad_;
  bool requires_grad_ = false;
};

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
