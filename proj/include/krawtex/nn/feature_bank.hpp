#pragma once

#include "krawtex/dataio.hpp"
#include "krawtex/nn/layers.hpp"

#include <cstdint>
#include <vector>

namespace krawtex::nn {

/// Fixed feature pyramid for the perceptual loss: three 3x3 conv + SiLU
/// stages (8, 16, 32 channels) with 2x2 average pooling between them.
/// Weights are drawn once from a seed, or loaded from a file, and never
/// trained.
class FeatureBank {
public:
  explicit FeatureBank(std::uint64_t seed);
  /// Stages from entries `feature.stage<i>.weight` / `.bias`, i = 0, 1, ...
  explicit FeatureBank(const CheckpointFile& file);
  FeatureBank(const FeatureBank&) = delete;
  FeatureBank& operator=(const FeatureBank&) = delete;

  std::vector<Var> features(Tape& t, Var x);
  std::vector<Tensor> features(const Tensor& x);

  /// sum_i mean((phi_i(pred) - phi_i(target))^2); `target` is a constant.
  Var loss(Tape& t, Var pred, const Tensor& target);
  double loss(const Tensor& pred, const Tensor& target);

  std::size_t stage_count() const noexcept { return stages_.size(); }
  ParameterStore& params() noexcept { return store_; }
  const ParameterStore& params() const noexcept { return store_; }

private:
  ParameterStore store_;
  std::vector<ConvLayer> stages_;
};

} // namespace krawtex::nn
