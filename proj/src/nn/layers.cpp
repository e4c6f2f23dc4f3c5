#include "krawtex/nn/layers.hpp"

#include <cmath>

namespace krawtex::nn {

Var ConvLayer::operator()(Tape& t, Var x) const
{
  return conv2d(t, x, t.parameter(*weight), bias ? t.parameter(*bias) : Var{}, geometry);
}

ConvLayer add_conv(ParameterStore& store, const std::string& name, int in, int out, int kernel, Rng& rng,
                   Init init, int stride)
{
  Tensor w({out, in, kernel, kernel});
  if (init == Init::He) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (in * kernel * kernel)));
    for (double& v : w.values())
      v = dist(rng);
  }
  ConvLayer layer;
  layer.weight = &store.add(name + ".weight", std::move(w));
  layer.bias = &store.add(name + ".bias", Tensor({1, out, 1, 1}));
  layer.geometry = ConvGeometry::same(kernel, kernel, stride);
  return layer;
}

Var BatchNormLayer::operator()(Tape& t, Var x, bool training) const
{
  return batch_norm(t, x, t.parameter(*gamma), t.parameter(*beta), state, training);
}

BatchNormLayer add_batch_norm(ParameterStore& store, const std::string& name, int channels)
{
  BatchNormLayer layer;
  layer.gamma = &store.add(name + ".gamma", Tensor({1, channels, 1, 1}, 1.0));
  layer.beta = &store.add(name + ".beta", Tensor({1, channels, 1, 1}));
  layer.state.running_mean = &store.add(name + ".running_mean", Tensor({1, channels, 1, 1}), ParamRole::Buffer);
  layer.state.running_var = &store.add(name + ".running_var", Tensor({1, channels, 1, 1}, 1.0), ParamRole::Buffer);
  return layer;
}

} // namespace krawtex::nn
