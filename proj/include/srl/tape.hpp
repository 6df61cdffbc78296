#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "srl/errors.hpp"
#include "srl/tensor.hpp"

namespace srl {

// A learned tensor with its gradient accumulator. Frozen parameters still
// receive gradients but are skipped by the optimizer.
struct Parameter {
  Parameter(std::string name, Tensor value, bool trainable = true)
      : name(std::move(name)),
        value(std::move(value)),
        grad(this->value.shape()),
        trainable(trainable) {}

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable;
};

// Owns parameters at stable addresses, in insertion order.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore& other) { *this = other; }
  ParameterStore& operator=(const ParameterStore& other) {
    if (this == &other) return *this;
    params_.clear();
    index_.clear();
    for (const Parameter& p : other.params_) {
      Parameter& copy = add(p.name, p.value, p.trainable);
      copy.grad = p.grad;
    }
    return *this;
  }
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& add(const std::string& name, Tensor value, bool trainable = true) {
    if (index_.count(name)) throw ArgumentError("duplicate parameter " + name);
    index_[name] = params_.size();
    return params_.emplace_back(name, std::move(value), trainable);
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  Parameter& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ArgumentError("no parameter named " + name);
    return params_[it->second];
  }
  const Parameter& get(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->get(name);
  }

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad() {
    for (Parameter& p : params_) p.zero_grad();
  }

 private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

using NodeId = std::size_t;

// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  NodeId id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
};

// Records forward values in evaluation order; backward() walks the record in
// reverse. Node ids are assigned in creation order, so inputs always precede
// their consumers.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, NodeId)>;

  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    std::vector<NodeId> inputs;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var record(Tensor value, std::vector<NodeId> inputs, BackwardFn backward) {
    for (NodeId in : inputs) {
      if (in >= nodes_.size()) throw ArgumentError("tape input out of order");
    }
    nodes_.push_back(Node{std::move(value), Tensor(), false, std::move(inputs),
                          std::move(backward)});
    return Var{this, nodes_.size() - 1};
  }

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const Tensor& value(NodeId id) const { return nodes_[id].value; }

  // Gradient slot of a node, materialized as zeros on first access.
  Tensor& grad(NodeId id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
      n.grad = Tensor(n.value.shape());
      n.has_grad = true;
    }
    return n.grad;
  }

  bool has_grad(NodeId id) const { return nodes_[id].has_grad; }

  // Gradient of the last backward pass w.r.t. a node; zeros if the node was
  // not reachable from the loss.
  Tensor gradient(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.has_grad ? n.grad : Tensor(n.value.shape());
  }

  // Leaf node bound to a parameter. Repeated calls within one tape return the
  // same node so uses accumulate before a single flush.
  Var param(Parameter& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Var{this, it->second};
    Parameter* target = &p;
    Var v = record(p.value, {}, [target](Tape& t, NodeId self) {
      target->grad += t.nodes_[self].grad;
    });
    param_nodes_[target] = v.id;
    return v;
  }

  void backward(Var loss) {
    if (loss.tape != this) throw ArgumentError("loss belongs to another tape");
    if (value(loss.id).size() != 1) {
      throw ArgumentError("backward needs a scalar loss, got shape " +
                          shape_string(value(loss.id).shape()));
    }
    for (Node& n : nodes_) {
      n.has_grad = false;
      n.grad = Tensor();
    }
    grad(loss.id).fill(1.0);
    for (NodeId id = loss.id + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (n.has_grad && n.backward) n.backward(*this, id);
    }
  }

 private:
  std::vector<Node> nodes_;
  std::map<const Parameter*, NodeId> param_nodes_;
};

inline const Tensor& Var::value() const { return tape->value(id); }

}  // namespace srl
