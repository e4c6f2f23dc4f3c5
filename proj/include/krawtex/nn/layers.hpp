#pragma once

#include "krawtex/nn/ops.hpp"

#include <random>
#include <string>

namespace krawtex::nn {

using Rng = std::mt19937_64;

enum class Init {
  /// N(0, 2 / fan_in).
  He,
  Zero,
};

struct ConvLayer {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;
  ConvGeometry geometry;

  Var operator()(Tape& t, Var x) const;
  int in_channels() const { return weight->value.shape().c; }
  int out_channels() const { return weight->value.shape().n; }
};

/// Registers `<name>.weight` (out, in, k, k) and `<name>.bias` with same
/// padding at the given stride.
ConvLayer add_conv(ParameterStore& store, const std::string& name, int in, int out, int kernel, Rng& rng,
                   Init init = Init::He, int stride = 1);

struct BatchNormLayer {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;
  BatchNormState state;

  Var operator()(Tape& t, Var x, bool training) const;
};

/// Registers `<name>.gamma`, `<name>.beta` and the running-mean/var buffers.
BatchNormLayer add_batch_norm(ParameterStore& store, const std::string& name, int channels);

} // namespace krawtex::nn
