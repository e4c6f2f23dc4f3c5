#include "krawtex/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace krawtex::nn {

std::string Shape::str() const
{
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.count(), fill)
{
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
    throw std::invalid_argument("tensor: negative extent " + shape.str());
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values))
{
  if (data_.size() != shape.count())
    throw std::invalid_argument("tensor: " + std::to_string(data_.size()) + " values for shape " +
                                shape.str());
}

void Tensor::fill(double v)
{
  std::fill(data_.begin(), data_.end(), v);
}

bool Tensor::all_finite() const noexcept
{
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::add(const Tensor& other)
{
  if (!(other.shape_ == shape_))
    throw std::invalid_argument("tensor add: " + shape_.str() + " vs " + other.shape_.str());
  for (std::size_t i = 0; i < data_.size(); ++i)
    data_[i] += other.data_[i];
}

Parameter& ParameterStore::add(std::string name, Tensor value, ParamRole role)
{
  if (index_.count(name))
    throw std::invalid_argument("parameter '" + name + "' registered twice");
  index_.emplace(name, params_.size());
  params_.push_back(Parameter{std::move(name), std::move(value), role, {}});
  return params_.back();
}

Parameter* ParameterStore::find(const std::string& name)
{
  const auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

const Parameter* ParameterStore::find(const std::string& name) const
{
  const auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

Parameter& ParameterStore::get(const std::string& name)
{
  Parameter* p = find(name);
  if (!p)
    throw std::out_of_range("no parameter named '" + name + "'");
  return *p;
}

void ParameterStore::zero_grad()
{
  for (auto& p : params_)
    p.grad = Tensor();
}

std::size_t ParameterStore::trainable_scalars() const
{
  std::size_t n = 0;
  for (const auto& p : params_)
    if (p.trainable())
      n += p.value.size();
  return n;
}

} // namespace krawtex::nn
