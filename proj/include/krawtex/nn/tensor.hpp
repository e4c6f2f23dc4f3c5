#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace krawtex::nn {

/// NCHW extents. Convolution kernels reuse the layout as (out, in, kh, kw).
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t count() const noexcept
  {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Dense row-major NCHW array of doubles.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  double& at(int n, int c, int y, int x) noexcept { return data_[offset(n, c, y, x)]; }
  double at(int n, int c, int y, int x) const noexcept { return data_[offset(n, c, y, x)]; }

  double* plane(int n, int c) noexcept { return data_.data() + offset(n, c, 0, 0); }
  const double* plane(int n, int c) const noexcept { return data_.data() + offset(n, c, 0, 0); }

  void fill(double v);
  bool all_finite() const noexcept;
  /// Adds `other` elementwise; shapes must match.
  void add(const Tensor& other);

private:
  std::size_t offset(int n, int c, int y, int x) const noexcept
  {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  Shape shape_{};
  std::vector<double> data_;
};

/// Raised when a forward or backward pass produces NaN or Inf.
class TrainingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ParamRole {
  /// Updated by the optimizer.
  Trainable,
  /// Enters the graph and receives a gradient, but is never updated.
  Frozen,
  /// State that is not part of the graph (batch-norm running statistics).
  Buffer,
};

struct Parameter {
  std::string name;
  Tensor value;
  ParamRole role = ParamRole::Trainable;
  Tensor grad;
  /// Multiplies the optimizer step size for this parameter.
  double lr_scale = 1.0;

  bool trainable() const noexcept { return role == ParamRole::Trainable; }
};

/// Named parameters with stable addresses, kept in registration order.
class ParameterStore {
public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& add(std::string name, Tensor value, ParamRole role = ParamRole::Trainable);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  Parameter& get(const std::string& name);

  std::deque<Parameter>& all() noexcept { return params_; }
  const std::deque<Parameter>& all() const noexcept { return params_; }

  void zero_grad();
  std::size_t trainable_scalars() const;

private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

} // namespace krawtex::nn
