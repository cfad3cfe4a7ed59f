#include "e2eslu/diffengine/graph.hpp"

#include "e2eslu/errors.hpp"

namespace e2eslu::inline E2ESLU_PRECISION_NS {

const Tensor& Var::value() const {
  if (!graph) throw ContractError("use of an unbound Var");
  return graph->value(*this);
}

const Tensor& AdjointContext::out() const { return graph_.node_value(graph_.nodes_[node_]); }

std::span<const Real> AdjointContext::out_grad() const { return graph_.nodes_[node_].grad; }

std::size_t AdjointContext::inputs() const { return graph_.nodes_[node_].inputs.size(); }

const Tensor& AdjointContext::in(std::size_t i) const {
  return graph_.node_value(graph_.nodes_[graph_.nodes_[node_].inputs.at(i)]);
}

bool AdjointContext::needs(std::size_t i) const {
  return graph_.nodes_[graph_.nodes_[node_].inputs.at(i)].needs_grad;
}

std::span<Real> AdjointContext::in_grad(std::size_t i) {
  const std::uint32_t id = graph_.nodes_[node_].inputs.at(i);
  if (!graph_.nodes_[id].needs_grad) return {};
  return graph_.grad_buffer(id);
}

Graph::Graph(bool record_gradients) : recording_(record_gradients) {}

Var Graph::parameter(Tensor& tensor) {
  if (auto it = bound_.find(&tensor); it != bound_.end()) return Var{this, it->second};
  Node n;
  n.external = &tensor;
  n.needs_grad = recording_ && tensor.requires_grad();
  nodes_.push_back(std::move(n));
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  bound_.emplace(&tensor, id);
  return Var{this, id};
}

Var Graph::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::variable(Tensor value) {
  Node n;
  n.owned = std::move(value);
  n.needs_grad = recording_;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::record(Tensor value, std::span<const Var> inputs, Adjoint adjoint) {
  Node n;
  n.owned = std::move(value);
  if (recording_) {
    for (const Var& v : inputs) {
      if (v.graph != this) throw ContractError("operation mixes values from different graphs");
      n.needs_grad = n.needs_grad || nodes_[v.id].needs_grad;
    }
    if (n.needs_grad) {
      n.inputs.reserve(inputs.size());
      for (const Var& v : inputs) n.inputs.push_back(v.id);
      n.adjoint = std::move(adjoint);
    }
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Graph::value(Var v) const {
  if (v.graph != this || v.id >= nodes_.size()) throw ContractError("Var does not belong to graph");
  return node_value(nodes_[v.id]);
}

bool Graph::needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }

std::span<const Real> Graph::grad(Var v) const { return nodes_.at(v.id).grad; }

std::vector<Real>& Graph::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(node_value(n).size(), Real(0));
  return n.grad;
}

void Graph::backward(Var loss) {
  if (loss.graph != this) throw ContractError("loss does not belong to graph");
  const Tensor& lv = value(loss);
  if (lv.size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " + shape_string(lv.shape()));
  }
  if (!recording_) throw ContractError("backward on a graph that does not record gradients");

  std::vector<char> reachable(loss.id + 1, 0);
  reachable[loss.id] = 1;
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    if (!reachable[i]) continue;
    for (auto in : nodes_[i].inputs) reachable[in] = 1;
  }

  grad_buffer(loss.id)[0] += Real(1);
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!reachable[i] || !n.needs_grad) continue;
    if (n.adjoint && !n.grad.empty()) {
      AdjointContext ctx(*this, i);
      n.adjoint(ctx);
    }
  }
  for (std::uint32_t i = 0; i <= loss.id; ++i) {
    Node& n = nodes_[i];
    if (!reachable[i] || !n.external || !n.needs_grad) continue;
    if (n.grad.empty()) {
      n.external->ensure_grad();
    } else {
      n.external->accumulate_grad(n.grad);
    }
  }
}

}  // namespace e2eslu::inline E2ESLU_PRECISION_NS
