#include "krawtex/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace krawtex::nn {

void AdamConfig::validate() const
{
  if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0))
    throw std::invalid_argument("adam: need lr > 0, 0 <= beta < 1, eps > 0");
}

Adam::Adam(const ParameterStore& store)
{
  for (const Parameter& p : store.all())
    if (p.trainable())
      moments_.emplace(p.name, AdamMoments{Tensor(p.value.shape()), Tensor(p.value.shape())});
}

void Adam::step(ParameterStore& store, const AdamConfig& config)
{
  config.validate();
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correct1 = 1.0 - std::pow(config.beta1, t);
  const double correct2 = 1.0 - std::pow(config.beta2, t);
  for (Parameter& p : store.all()) {
    if (!p.trainable())
      continue;
    AdamMoments& m = moments(p.name);
    const bool has_grad = !p.grad.empty();
    if (has_grad && !p.grad.all_finite())
      throw TrainingError("adam: non-finite gradient in '" + p.name + "'");
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = has_grad ? p.grad[i] : 0.0;
      m.first[i] = config.beta1 * m.first[i] + (1.0 - config.beta1) * g;
      m.second[i] = config.beta2 * m.second[i] + (1.0 - config.beta2) * g * g;
      const double mhat = m.first[i] / correct1;
      const double vhat = m.second[i] / correct2;
      p.value[i] -= p.lr_scale * config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

AdamMoments& Adam::moments(const std::string& name)
{
  const auto it = moments_.find(name);
  if (it == moments_.end())
    throw std::out_of_range("adam: no moments for '" + name + "'");
  return it->second;
}

const AdamMoments& Adam::moments(const std::string& name) const
{
  const auto it = moments_.find(name);
  if (it == moments_.end())
    throw std::out_of_range("adam: no moments for '" + name + "'");
  return it->second;
}

} // namespace krawtex::nn
