#include "krawtex/nn/tape.hpp"

#include <stdexcept>

namespace krawtex::nn {

Var Tape::push(Node node)
{
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const
{
  if (!v.valid() || v.id >= nodes_.size())
    throw std::out_of_range("tape: invalid variable");
  return nodes_[v.id];
}

Var Tape::constant(Tensor value)
{
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Parameter& param)
{
  if (param.role == ParamRole::Buffer)
    throw std::invalid_argument("tape: buffer '" + param.name + "' cannot enter the graph");
  Node n;
  n.value = param.value;
  n.requires_grad = track_;
  n.param = track_ ? &param : nullptr;
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backward backward)
{
  bool needs = false;
  for (Var v : inputs)
    needs = needs || (v.valid() && node(v).requires_grad);
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs)
    n.backward = std::move(backward);
  return push(std::move(n));
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, Backward backward)
{
  bool needs = false;
  for (Var v : inputs)
    needs = needs || (v.valid() && node(v).requires_grad);
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs)
    n.backward = std::move(backward);
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const
{
  return node(v).value;
}

bool Tape::requires_grad(Var v) const
{
  return node(v).requires_grad;
}

Tensor* Tape::grad_buffer(Var v)
{
  Node& n = nodes_.at(v.id);
  if (!n.requires_grad)
    return nullptr;
  if (n.grad.empty())
    n.grad = Tensor(n.value.shape());
  return &n.grad;
}

void Tape::accumulate(Var v, Tensor delta)
{
  Node& n = nodes_.at(v.id);
  if (!n.requires_grad)
    return;
  if (n.grad.empty())
    n.grad = std::move(delta);
  else
    n.grad.add(delta);
}

void Tape::backward(Var root)
{
  const Node& r = node(root);
  if (r.value.size() != 1)
    throw std::invalid_argument("tape: backward needs a scalar root, got " + r.value.shape().str());
  if (!r.requires_grad)
    return;
  grad_buffer(root)->fill(1.0);

  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.empty())
      continue;
    if (n.backward)
      n.backward(*this, id);
    if (n.param) {
      if (n.param->grad.empty())
        n.param->grad = std::move(n.grad);
      else
        n.param->grad.add(n.grad);
    }
  }
}

} // namespace krawtex::nn
