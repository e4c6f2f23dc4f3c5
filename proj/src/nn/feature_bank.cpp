#include "krawtex/nn/feature_bank.hpp"

#include <stdexcept>
#include <string>

namespace krawtex::nn {

namespace {

std::string stage_name(std::size_t i)
{
  return "feature.stage" + std::to_string(i);
}

Tensor from_entry(const CheckpointEntry& e)
{
  if (e.dims.size() != 4)
    throw FormatError("feature bank: entry '" + e.name + "' must have rank 4");
  const Shape s{static_cast<int>(e.dims[0]), static_cast<int>(e.dims[1]), static_cast<int>(e.dims[2]),
                static_cast<int>(e.dims[3])};
  return Tensor(s, std::vector<double>(e.values.begin(), e.values.end()));
}

} // namespace

FeatureBank::FeatureBank(std::uint64_t seed)
{
  Rng rng(seed);
  const int channels[] = {1, 8, 16, 32};
  for (std::size_t i = 0; i < 3; ++i) {
    ConvLayer layer = add_conv(store_, stage_name(i), channels[i], channels[i + 1], 3, rng);
    layer.weight->role = ParamRole::Frozen;
    layer.bias->role = ParamRole::Frozen;
    stages_.push_back(layer);
  }
}

FeatureBank::FeatureBank(const CheckpointFile& file)
{
  for (std::size_t i = 0;; ++i) {
    const CheckpointEntry* w = file.find(stage_name(i) + ".weight");
    const CheckpointEntry* b = file.find(stage_name(i) + ".bias");
    if (!w)
      break;
    Tensor weight = from_entry(*w);
    const int out = weight.shape().n;
    const int kh = weight.shape().h;
    const int kw = weight.shape().w;
    const int expected_in = i == 0 ? 1 : stages_.back().out_channels();
    if (weight.shape().c != expected_in)
      throw FormatError("feature bank: stage " + std::to_string(i) + " expects " + std::to_string(expected_in) +
                        " input channels");
    ConvLayer layer;
    layer.weight = &store_.add(stage_name(i) + ".weight", std::move(weight), ParamRole::Frozen);
    Tensor bias({1, out, 1, 1});
    if (b) {
      if (b->values.size() != static_cast<std::size_t>(out))
        throw FormatError("feature bank: bias size mismatch at stage " + std::to_string(i));
      for (int o = 0; o < out; ++o)
        bias[o] = b->values[o];
    }
    layer.bias = &store_.add(stage_name(i) + ".bias", std::move(bias), ParamRole::Frozen);
    layer.geometry = ConvGeometry::same(kh, kw);
    stages_.push_back(layer);
  }
  if (stages_.empty())
    throw FormatError("feature bank: no 'feature.stage0.weight' entry");
}

std::vector<Var> FeatureBank::features(Tape& t, Var x)
{
  std::vector<Var> out;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (i > 0)
      x = avg_pool2(t, x);
    x = silu(t, stages_[i](t, x));
    out.push_back(x);
  }
  return out;
}

std::vector<Tensor> FeatureBank::features(const Tensor& x)
{
  Tape t(false);
  std::vector<Tensor> out;
  for (Var v : features(t, t.constant(x)))
    out.push_back(t.value(v));
  return out;
}

Var FeatureBank::loss(Tape& t, Var pred, const Tensor& target)
{
  const std::vector<Tensor> reference = features(target);
  const std::vector<Var> current = features(t, pred);
  std::vector<std::pair<Var, double>> terms;
  for (std::size_t i = 0; i < current.size(); ++i)
    terms.emplace_back(mse_loss(t, current[i], reference[i]), 1.0);
  return weighted_sum(t, terms);
}

double FeatureBank::loss(const Tensor& pred, const Tensor& target)
{
  Tape t(false);
  return t.value(loss(t, t.constant(pred), target))[0];
}

} // namespace krawtex::nn
