#pragma once

#include "krawtex/nn/tensor.hpp"

namespace krawtex::nn {

/// Stride and explicit zero padding of a 2-D cross-correlation.
struct ConvGeometry {
  int stride = 1;
  int pad_top = 0;
  int pad_left = 0;
  int pad_bottom = 0;
  int pad_right = 0;

  /// Output size equals input size at stride 1. Even kernels put the extra
  /// row/column of padding at the bottom/right.
  static ConvGeometry same(int kh, int kw, int stride = 1);
  static ConvGeometry valid(int stride = 1) { return ConvGeometry{stride, 0, 0, 0, 0}; }

  int out_rows(int in_rows, int kh) const;
  int out_cols(int in_cols, int kw) const;
};

/// y[n,o] = b[o] + sum_{i,ky,kx} w[o,i,ky,kx] x[n,i,oy*s+ky-pt,ox*s+kx-pl].
/// `weight` is (out, in, kh, kw); `bias` is empty or holds `out` values.
Tensor conv2d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias,
                      const ConvGeometry& geometry);

struct ConvGrads {
  Tensor input;
  Tensor weight;
  Tensor bias;
};

/// Gradients of conv2d_forward. `grad_input` is skipped (left empty) when
/// `need_input_grad` is false.
ConvGrads conv2d_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_output,
                          const ConvGeometry& geometry, bool need_input_grad = true);

} // namespace krawtex::nn
