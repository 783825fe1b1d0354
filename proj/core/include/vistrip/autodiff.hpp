#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "vistrip/tensor.hpp"

namespace vistrip {

class Tape;

/// Handle to a value recorded on a Tape (a differentiable tensor).
///
/// Cheap to copy; valid as long as the owning tape is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  /// Accumulated adjoint; zeros if backward never reached this node.
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Handed to a node's local-adjoint closure during the reverse sweep.
class BackwardContext {
 public:
  const Tensor& out_value() const;
  const Tensor& out_grad() const;
  const Tensor& parent_value(std::size_t i) const;
  /// Gradient slot of parent `i`, or nullptr when that parent needs no gradient.
  Tensor* parent_grad(std::size_t i);

 private:
  friend class Tape;
  BackwardContext(Tape& tape, std::size_t node) : tape_(tape), node_(node) {}
  Tape& tape_;
  std::size_t node_;
};

/// Records operations in forward order and replays their adjoints in reverse.
///
/// A tape is single-threaded. Separate tapes share nothing and may be used
/// from separate threads.
class Tape {
 public:
  using BackwardFn = std::function<void(BackwardContext&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable input.
  Var leaf(Tensor value);
  /// Input that never receives a gradient.
  Var constant(Tensor value);
  /// Output of an operation. `fn` is dropped when no parent needs a gradient.
  Var record(Tensor value, std::vector<Var> parents, BackwardFn fn);

  /// Reverse sweep from a one-element root. Throws ShapeError for non-scalar roots.
  void backward(Var root);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Non-smooth ops fold their branch pattern in here; finite-difference
  /// checks use it to detect stencils that straddle a kink.
  void note_branch_pattern(std::uint64_t hash);
  std::uint64_t branch_signature() const { return branch_signature_; }

 private:
  friend class BackwardContext;

  struct Node {
    Tensor value;
    Tensor grad;
    bool grad_allocated = false;
    bool requires_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
  };

  Tensor& ensure_grad(std::size_t id);

  std::vector<Node> nodes_;
  std::uint64_t branch_signature_ = 0x9e3779b97f4a7c15ULL;
};

/// Mixes a sequence of branch decisions into a 64-bit hash.
class BranchHasher {
 public:
  void add(bool bit) {
    word_ = (word_ << 1) | static_cast<std::uint64_t>(bit);
    if (++bits_ == 64) flush();
  }
  std::uint64_t finish() {
    flush();
    return hash_;
  }

 private:
  void flush() {
    hash_ ^= word_ + 0x9e3779b97f4a7c15ULL + (hash_ << 6) + (hash_ >> 2);
    word_ = 0;
    bits_ = 0;
  }
  std::uint64_t hash_ = 1469598103934665603ULL;
  std::uint64_t word_ = 0;
  int bits_ = 0;
};

}  // namespace vistrip
