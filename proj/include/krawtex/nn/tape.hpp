#pragma once

#include "krawtex/nn/tensor.hpp"

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <limits>

namespace krawtex::nn {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;

  bool valid() const noexcept { return id != kNone; }
};

/// Reverse-mode recorder. Every op appends a node holding its value and a
/// closure that pushes the node's gradient to its inputs.
class Tape {
public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  /// With `track_parameters` false, parameters enter as constants and no
  /// closures are kept.
  explicit Tape(bool track_parameters = true) : track_(track_parameters) {}

  Var constant(Tensor value);
  /// Leaf bound to a parameter. Buffers are rejected; frozen parameters do
  /// receive a gradient in Parameter::grad.
  Var parameter(Parameter& param);
  /// Appends an op result. The node needs a gradient iff any input does.
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Tensor value, const std::vector<Var>& inputs, Backward backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  /// Gradient of the node currently being processed by backward().
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }
  /// Adds `delta` into the gradient of `v`; no-op when `v` needs none.
  void accumulate(Var v, Tensor delta);
  /// Returns the gradient buffer of `v`, zero-allocated on first use.
  Tensor* grad_buffer(Var v);

  /// Seeds d(root)/d(root) = 1 (root must hold one value), runs the
  /// closures in reverse order and adds leaf gradients into Parameter::grad.
  void backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };

  Var push(Node node);
  const Node& node(Var v) const;

  std::deque<Node> nodes_;
  bool track_ = true;
};

} // namespace krawtex::nn
