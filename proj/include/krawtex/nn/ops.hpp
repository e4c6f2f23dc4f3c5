#pragma once

#include "krawtex/nn/conv.hpp"
#include "krawtex/nn/tape.hpp"

#include <utility>
#include <vector>

namespace krawtex::nn {

/// Differentiable ops. Each returns a new Var on the same tape.

/// `bias` may be an invalid Var for a bias-free convolution.
Var conv2d(Tape& t, Var input, Var weight, Var bias, const ConvGeometry& geometry);

Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double factor);

Var silu(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
/// Elementwise clamp; the gradient passes where lo <= x <= hi.
Var clamp(Tape& t, Var x, double lo, double hi);

/// x (n,c,h,w) times gate (n,c,1,1), broadcast over space.
Var mul_channels(Tape& t, Var x, Var gate);

Var concat_channels(Tape& t, const std::vector<Var>& parts);
/// Channels [begin, end).
Var slice_channels(Tape& t, Var x, int begin, int end);

/// 2x2 mean, stride 2. Spatial extents must be even.
Var avg_pool2(Tape& t, Var x);
/// Nearest-neighbour x2.
Var upsample2(Tape& t, Var x);
/// Mean over space, (n,c,h,w) -> (n,c,1,1).
Var global_avg_pool(Tape& t, Var x);

struct BatchNormState {
  Parameter* running_mean = nullptr;
  Parameter* running_var = nullptr;
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Per-channel normalization. Training mode uses batch statistics and
/// updates the running buffers; evaluation mode uses the running buffers.
Var batch_norm(Tape& t, Var x, Var gamma, Var beta, const BatchNormState& state, bool training);

/// Mean over all elements of 0.5 l^2 (|l| < 1) or |l| - 0.5, l = pred - target.
Var smooth_l1_loss(Tape& t, Var pred, const Tensor& target);
/// Mean over all elements of (pred - target)^2.
Var mse_loss(Tape& t, Var pred, const Tensor& target);
/// Sum of x * weights; used to reduce a tensor to a scalar probe.
Var dot(Tape& t, Var x, const Tensor& weights);
/// Sum of w_i * s_i over scalar Vars.
Var weighted_sum(Tape& t, const std::vector<std::pair<Var, double>>& terms);

inline constexpr double kScoreClamp = 1e-7;

/// Batch mean of -log d_fake, d clamped to [1e-7, 1 - 1e-7].
Var generator_gan_loss(Tape& t, Var d_fake);
/// Batch mean of -[log d_real + log(1 - d_fake)], same clamp.
Var discriminator_gan_loss(Tape& t, Var d_real, Var d_fake);

} // namespace krawtex::nn
