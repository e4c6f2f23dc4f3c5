#pragma once

#include "krawtex/nn/tensor.hpp"

namespace krawtex::nn {

/// Value-only forms of the training losses; the tape versions live in ops.hpp.
double smooth_l1_loss(const Tensor& pred, const Tensor& target);
double mse_loss(const Tensor& pred, const Tensor& target);

struct GanLosses {
  double discriminator = 0.0;
  double generator = 0.0;
};

/// Scores are clamped to [1e-7, 1 - 1e-7] before the logs.
GanLosses gan_losses(double d_real, double d_fake);

struct LossParts {
  double feature = 0.0;
  double smooth_l1 = 0.0;
  double mse = 0.0;
  double gan = 0.0;
};

struct LossWeights {
  double feature = 0.5;
  double smooth_l1 = 1.0;
  double mse = 0.04;
  double gan = 0.05;

  double total(const LossParts& parts) const
  {
    return feature * parts.feature + smooth_l1 * parts.smooth_l1 + mse * parts.mse + gan * parts.gan;
  }
};

} // namespace krawtex::nn
