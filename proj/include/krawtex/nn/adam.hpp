#pragma once

#include "krawtex/nn/tensor.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>

namespace krawtex::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamMoments {
  Tensor first;
  Tensor second;
};

/// Bias-corrected Adam over the trainable parameters of one store.
class Adam {
public:
  /// Zero moments for every trainable parameter currently in `store`.
  explicit Adam(const ParameterStore& store);

  /// Advances the step counter and updates every trainable parameter from
  /// Parameter::grad (an empty grad counts as zero). Frozen parameters and
  /// buffers are never touched.
  void step(ParameterStore& store, const AdamConfig& config);

  std::uint64_t steps() const noexcept { return steps_; }
  void set_steps(std::uint64_t steps) noexcept { steps_ = steps; }

  AdamMoments& moments(const std::string& name);
  const AdamMoments& moments(const std::string& name) const;
  std::size_t size() const noexcept { return moments_.size(); }

private:
  std::unordered_map<std::string, AdamMoments> moments_;
  std::uint64_t steps_ = 0;
};

} // namespace krawtex::nn
