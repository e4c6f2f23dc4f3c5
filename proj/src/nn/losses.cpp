#include "krawtex/nn/losses.hpp"

#include "krawtex/nn/ops.hpp"

namespace krawtex::nn {

double smooth_l1_loss(const Tensor& pred, const Tensor& target)
{
  Tape t(false);
  return t.value(smooth_l1_loss(t, t.constant(pred), target))[0];
}

double mse_loss(const Tensor& pred, const Tensor& target)
{
  Tape t(false);
  return t.value(mse_loss(t, t.constant(pred), target))[0];
}

GanLosses gan_losses(double d_real, double d_fake)
{
  Tape t(false);
  const Var real = t.constant(Tensor({1, 1, 1, 1}, d_real));
  const Var fake = t.constant(Tensor({1, 1, 1, 1}, d_fake));
  return {t.value(discriminator_gan_loss(t, real, fake))[0], t.value(generator_gan_loss(t, fake))[0]};
}

} // namespace krawtex::nn
