#include "vistrip/autodiff.hpp"

namespace vistrip {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

const Tensor& BackwardContext::out_value() const { return tape_.nodes_[node_].value; }
const Tensor& BackwardContext::out_grad() const { return tape_.nodes_[node_].grad; }

const Tensor& BackwardContext::parent_value(std::size_t i) const {
  return tape_.nodes_[tape_.nodes_[node_].parents.at(i)].value;
}

Tensor* BackwardContext::parent_grad(std::size_t i) {
  const std::size_t p = tape_.nodes_[node_].parents.at(i);
  if (!tape_.nodes_[p].requires_grad) return nullptr;
  return &tape_.ensure_grad(p);
}

Var Tape::leaf(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<Var> parents, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  n.parents.reserve(parents.size());
  for (const Var& p : parents) {
    if (p.tape() != this) throw Error("Tape::record: parent belongs to a different tape");
    n.parents.push_back(p.id());
    n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::ensure_grad(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.grad_allocated) {
    n.grad = Tensor(n.value.shape());
    n.grad_allocated = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(std::size_t id) { return ensure_grad(id); }

void Tape::backward(Var root) {
  if (root.tape() != this) throw Error("Tape::backward: root belongs to a different tape");
  const Tensor& rv = nodes_[root.id()].value;
  if (rv.size() != 1) {
    throw ShapeError("backward: root must be a scalar, got shape " + to_string(rv.shape()));
  }
  ensure_grad(root.id())[0] = 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.grad_allocated || !n.backward) continue;
    BackwardContext ctx(*this, i);
    n.backward(ctx);
  }
}

void Tape::note_branch_pattern(std::uint64_t hash) {
  branch_signature_ ^= hash + 0x9e3779b97f4a7c15ULL + (branch_signature_ << 6) +
                       (branch_signature_ >> 2);
}

}  // namespace vistrip
