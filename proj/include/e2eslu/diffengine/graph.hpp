#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "e2eslu/diffengine/tensor.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

class Graph;

/// Handle to a value recorded on a Graph.
struct Var {
  Graph* graph = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
};

/// View handed to an adjoint rule during the reverse sweep.
class AdjointContext {
 public:
  AdjointContext(Graph& graph, std::uint32_t node) : graph_(graph), node_(node) {}

  const Tensor& out() const;
  std::span<const Real> out_grad() const;
  std::size_t inputs() const;
  const Tensor& in(std::size_t i) const;
  bool needs(std::size_t i) const;
  // Gradient accumulator of input i, zero-initialized on first access.
  std::span<Real> in_grad(std::size_t i);

 private:
  Graph& graph_;
  std::uint32_t node_;
};

using Adjoint = std::function<void(AdjointContext&)>;

/// Dynamic tape. Operations append nodes in execution order, so the node list
/// is topologically sorted by construction; `backward` replays adjoint rules
/// in reverse. A graph is confined to the thread that builds it.
class Graph {
 public:
  // With record_gradients=false no adjoints are kept (inference mode).
  explicit Graph(bool record_gradients = true);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf bound to an external tensor; if the tensor requires gradients,
  // backward accumulates into its grad buffer. Repeated calls with the same
  // tensor return the same node.
  Var parameter(Tensor& tensor);
  Var constant(Tensor value);
  // Owned leaf that requires gradients; read its gradient with grad().
  Var variable(Tensor value);

  // Appends an operation result. The adjoint is dropped when gradients are
  // not recorded or no input needs them.
  Var record(Tensor value, std::span<const Var> inputs, Adjoint adjoint);
  Var record(Tensor value, std::initializer_list<Var> inputs, Adjoint adjoint) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(adjoint));
  }

  const Tensor& value(Var v) const;
  bool needs_grad(Var v) const;
  // Gradient of the last backward pass; empty if none reached this node.
  std::span<const Real> grad(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and propagates to every ancestor. Gradients of
  // bound parameters are added to whatever they already hold.
  void backward(Var loss);

  bool recording() const noexcept { return recording_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend class AdjointContext;

  struct Node {
    Tensor owned;
    Tensor* external = nullptr;
    std::vector<std::uint32_t> inputs;
    Adjoint adjoint;
    bool needs_grad = false;
    std::vector<Real> grad;
  };

  const Tensor& node_value(const Node& n) const { return n.external ? *n.external : n.owned; }
  std::vector<Real>& grad_buffer(std::uint32_t id);

  std::deque<Node> nodes_;
  std::unordered_map<const Tensor*, std::uint32_t> bound_;
  bool recording_;
};

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
