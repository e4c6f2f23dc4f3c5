#include "krawtex/nn/conv.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace krawtex::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Strided = Eigen::OuterStride<>;

// Upper bound on the im2col scratch, in doubles.
constexpr std::size_t kScratchBudget = std::size_t{1} << 20;

struct Layout {
  int batch, in_ch, rows, cols;
  int out_ch, kh, kw;
  int out_rows, out_cols;
  int patch;  // in_ch * kh * kw
  int tile_rows;
};

Layout make_layout(const Tensor& input, const Tensor& weight, const ConvGeometry& g)
{
  const Shape& xs = input.shape();
  const Shape& ws = weight.shape();
  if (g.stride < 1)
    throw std::invalid_argument("conv2d: stride must be >= 1");
  if (ws.c != xs.c)
    throw std::invalid_argument("conv2d: input has " + std::to_string(xs.c) +
                                " channels, kernel expects " + std::to_string(ws.c));
  if (ws.n < 1 || ws.h < 1 || ws.w < 1)
    throw std::invalid_argument("conv2d: empty kernel " + ws.str());
  Layout l{xs.n, xs.c, xs.h, xs.w, ws.n, ws.h, ws.w, 0, 0, 0, 0};
  l.out_rows = g.out_rows(xs.h, ws.h);
  l.out_cols = g.out_cols(xs.w, ws.w);
  l.patch = l.in_ch * l.kh * l.kw;
  const std::size_t row_cost = static_cast<std::size_t>(l.patch) * l.out_cols;
  l.tile_rows = static_cast<int>(std::clamp<std::size_t>(kScratchBudget / std::max<std::size_t>(row_cost, 1), 1,
                                                         static_cast<std::size_t>(l.out_rows)));
  return l;
}

void im2col(const Tensor& input, int n, const Layout& l, const ConvGeometry& g, int oy0, int oy1,
            double* cols)
{
  const int span = (oy1 - oy0) * l.out_cols;
  for (int ic = 0; ic < l.in_ch; ++ic) {
    const double* src = input.plane(n, ic);
    for (int ky = 0; ky < l.kh; ++ky)
      for (int kx = 0; kx < l.kw; ++kx) {
        double* row = cols + static_cast<std::size_t>((ic * l.kh + ky) * l.kw + kx) * span;
        for (int oy = oy0; oy < oy1; ++oy) {
          double* dst = row + static_cast<std::size_t>(oy - oy0) * l.out_cols;
          const int iy = oy * g.stride + ky - g.pad_top;
          if (iy < 0 || iy >= l.rows) {
            std::fill(dst, dst + l.out_cols, 0.0);
            continue;
          }
          const double* line = src + static_cast<std::size_t>(iy) * l.cols;
          for (int ox = 0; ox < l.out_cols; ++ox) {
            const int ix = ox * g.stride + kx - g.pad_left;
            dst[ox] = (ix >= 0 && ix < l.cols) ? line[ix] : 0.0;
          }
        }
      }
  }
}

void col2im_add(const double* cols, int n, const Layout& l, const ConvGeometry& g, int oy0, int oy1,
                Tensor& grad_input)
{
  const int span = (oy1 - oy0) * l.out_cols;
  for (int ic = 0; ic < l.in_ch; ++ic) {
    double* dst = grad_input.plane(n, ic);
    for (int ky = 0; ky < l.kh; ++ky)
      for (int kx = 0; kx < l.kw; ++kx) {
        const double* row = cols + static_cast<std::size_t>((ic * l.kh + ky) * l.kw + kx) * span;
        for (int oy = oy0; oy < oy1; ++oy) {
          const int iy = oy * g.stride + ky - g.pad_top;
          if (iy < 0 || iy >= l.rows)
            continue;
          const double* src = row + static_cast<std::size_t>(oy - oy0) * l.out_cols;
          double* line = dst + static_cast<std::size_t>(iy) * l.cols;
          for (int ox = 0; ox < l.out_cols; ++ox) {
            const int ix = ox * g.stride + kx - g.pad_left;
            if (ix >= 0 && ix < l.cols)
              line[ix] += src[ox];
          }
        }
      }
  }
}


// Output positions whose tap lands inside the input: lo <= o < hi.
std::pair<int, int> valid_range(int out_extent, int in_extent, int stride, int offset)
{
  // in = o * stride + offset must satisfy 0 <= in < in_extent.
  int lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  int hi = in_extent - 1 - offset < 0 ? 0 : (in_extent - 1 - offset) / stride + 1;
  return {std::min(lo, out_extent), std::clamp(hi, 0, out_extent)};
}

// Tap-major path for layers with fewer outputs than inputs: one GEMM of the
// (out * taps) x in weight matrix with the input plane stack, then a
// shifted accumulation. Scratch is out*taps*H*W instead of in*taps*out_size.
bool use_tap_major(const Layout& l)
{
  const std::size_t scratch = static_cast<std::size_t>(l.out_ch) * l.kh * l.kw * l.rows * l.cols;
  return l.out_ch < l.in_ch && scratch <= (std::size_t{1} << 24);
}

RowMat tap_major_weight(const Tensor& weight, const Layout& l)
{
  const int taps = l.kh * l.kw;
  RowMat wp(l.out_ch * taps, l.in_ch);
  for (int o = 0; o < l.out_ch; ++o)
    for (int c = 0; c < l.in_ch; ++c)
      for (int k = 0; k < taps; ++k)
        wp(o * taps + k, c) = weight[(static_cast<std::size_t>(o) * l.in_ch + c) * taps + k];
  return wp;
}

// For each (o, tap) row of `z` (laid out over input pixels) and each output
// pixel, calls f(out_index, z_index).
template <class F>
void for_each_tap(const Layout& l, const ConvGeometry& g, F&& f)
{
  const int taps = l.kh * l.kw;
  for (int o = 0; o < l.out_ch; ++o)
    for (int ky = 0; ky < l.kh; ++ky) {
      const auto [oy_lo, oy_hi] = valid_range(l.out_rows, l.rows, g.stride, ky - g.pad_top);
      for (int kx = 0; kx < l.kw; ++kx) {
        const auto [ox_lo, ox_hi] = valid_range(l.out_cols, l.cols, g.stride, kx - g.pad_left);
        const std::size_t zrow = static_cast<std::size_t>(o * taps + ky * l.kw + kx) * l.rows * l.cols;
        for (int oy = oy_lo; oy < oy_hi; ++oy) {
          const int iy = oy * g.stride + ky - g.pad_top;
          const std::size_t out_base = (static_cast<std::size_t>(o) * l.out_rows + oy) * l.out_cols;
          const std::size_t z_base = zrow + static_cast<std::size_t>(iy) * l.cols - g.pad_left + kx;
          f(out_base, z_base, ox_lo, ox_hi);
        }
      }
    }
}

} // namespace

ConvGeometry ConvGeometry::same(int kh, int kw, int stride)
{
  ConvGeometry g;
  g.stride = stride;
  g.pad_top = (kh - 1) / 2;
  g.pad_bottom = kh - 1 - g.pad_top;
  g.pad_left = (kw - 1) / 2;
  g.pad_right = kw - 1 - g.pad_left;
  return g;
}

int ConvGeometry::out_rows(int in_rows, int kh) const
{
  const int span = in_rows + pad_top + pad_bottom - kh;
  if (span < 0)
    throw std::invalid_argument("conv2d: kernel taller than padded input");
  return span / stride + 1;
}

int ConvGeometry::out_cols(int in_cols, int kw) const
{
  const int span = in_cols + pad_left + pad_right - kw;
  if (span < 0)
    throw std::invalid_argument("conv2d: kernel wider than padded input");
  return span / stride + 1;
}

Tensor conv2d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias,
                      const ConvGeometry& geometry)
{
  const Layout l = make_layout(input, weight, geometry);
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(l.out_ch))
    throw std::invalid_argument("conv2d: bias has " + std::to_string(bias.size()) + " values for " +
                                std::to_string(l.out_ch) + " outputs");

  Tensor out({l.batch, l.out_ch, l.out_rows, l.out_cols});
  const int plane = l.out_rows * l.out_cols;

  if (use_tap_major(l)) {
    const RowMat wp = tap_major_weight(weight, l);
    const int in_plane = l.rows * l.cols;
    RowMat z(wp.rows(), in_plane);
    for (int n = 0; n < l.batch; ++n) {
      Eigen::Map<const RowMat> x(input.plane(n, 0), l.in_ch, in_plane);
      z.noalias() = wp * x;
      double* dst = out.plane(n, 0);
      const double* zp = z.data();
      const int s = geometry.stride;
      for_each_tap(l, geometry, [&](std::size_t ob, std::size_t zb, int lo, int hi) {
        for (int ox = lo; ox < hi; ++ox)
          dst[ob + ox] += zp[zb + static_cast<std::size_t>(ox) * s];
      });
    }
  }
  else {
  Eigen::Map<const RowMat> w(weight.data(), l.out_ch, l.patch);
  std::vector<double> scratch(static_cast<std::size_t>(l.patch) * l.tile_rows * l.out_cols);

  for (int n = 0; n < l.batch; ++n)
    for (int oy0 = 0; oy0 < l.out_rows; oy0 += l.tile_rows) {
      const int oy1 = std::min(l.out_rows, oy0 + l.tile_rows);
      const int span = (oy1 - oy0) * l.out_cols;
      im2col(input, n, l, geometry, oy0, oy1, scratch.data());
      Eigen::Map<const RowMat> cols(scratch.data(), l.patch, span);
      Eigen::Map<RowMat, 0, Strided> tile(out.plane(n, 0) + static_cast<std::size_t>(oy0) * l.out_cols,
                                          l.out_ch, span, Strided(plane));
      tile.noalias() = w * cols;
    }
  }

  if (!bias.empty())
    for (int n = 0; n < l.batch; ++n)
      for (int o = 0; o < l.out_ch; ++o) {
        double* p = out.plane(n, o);
        for (int i = 0; i < plane; ++i)
          p[i] += bias[o];
      }
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_output,
                          const ConvGeometry& geometry, bool need_input_grad)
{
  const Layout l = make_layout(input, weight, geometry);
  const Shape expected{l.batch, l.out_ch, l.out_rows, l.out_cols};
  if (!(grad_output.shape() == expected))
    throw std::invalid_argument("conv2d backward: grad_output " + grad_output.shape().str() +
                                ", forward produced " + expected.str());

  ConvGrads grads;
  grads.weight = Tensor(weight.shape());
  grads.bias = Tensor({1, l.out_ch, 1, 1});
  if (need_input_grad)
    grads.input = Tensor(input.shape());

  const int plane = l.out_rows * l.out_cols;
  for (int n = 0; n < l.batch; ++n)
    for (int o = 0; o < l.out_ch; ++o) {
      const double* g = grad_output.plane(n, o);
      double s = 0.0;
      for (int i = 0; i < plane; ++i)
        s += g[i];
      grads.bias[o] += s;
    }

  if (use_tap_major(l)) {
    const RowMat wp = tap_major_weight(weight, l);
    const int in_plane = l.rows * l.cols;
    const int taps = l.kh * l.kw;
    RowMat gs(wp.rows(), in_plane);
    RowMat gwp = RowMat::Zero(wp.rows(), wp.cols());
    for (int n = 0; n < l.batch; ++n) {
      gs.setZero();
      const double* src = grad_output.plane(n, 0);
      double* gp = gs.data();
      const int s = geometry.stride;
      for_each_tap(l, geometry, [&](std::size_t ob, std::size_t zb, int lo, int hi) {
        for (int ox = lo; ox < hi; ++ox)
          gp[zb + static_cast<std::size_t>(ox) * s] = src[ob + ox];
      });
      Eigen::Map<const RowMat> x(input.plane(n, 0), l.in_ch, in_plane);
      gwp.noalias() += gs * x.transpose();
      if (need_input_grad) {
        Eigen::Map<RowMat> gx(grads.input.plane(n, 0), l.in_ch, in_plane);
        gx.noalias() = wp.transpose() * gs;
      }
    }
    for (int o = 0; o < l.out_ch; ++o)
      for (int c = 0; c < l.in_ch; ++c)
        for (int k = 0; k < taps; ++k)
          grads.weight[(static_cast<std::size_t>(o) * l.in_ch + c) * taps + k] = gwp(o * taps + k, c);
    return grads;
  }

  Eigen::Map<const RowMat> w(weight.data(), l.out_ch, l.patch);
  Eigen::Map<RowMat> gw(grads.weight.data(), l.out_ch, l.patch);
  const std::size_t scratch_size = static_cast<std::size_t>(l.patch) * l.tile_rows * l.out_cols;
  std::vector<double> scratch(scratch_size);
  std::vector<double> dcols(need_input_grad ? scratch_size : 0);

  for (int n = 0; n < l.batch; ++n) {
    for (int oy0 = 0; oy0 < l.out_rows; oy0 += l.tile_rows) {
      const int oy1 = std::min(l.out_rows, oy0 + l.tile_rows);
      const int span = (oy1 - oy0) * l.out_cols;
      im2col(input, n, l, geometry, oy0, oy1, scratch.data());
      Eigen::Map<const RowMat> cols(scratch.data(), l.patch, span);
      Eigen::Map<const RowMat, 0, Strided> g(
          grad_output.plane(n, 0) + static_cast<std::size_t>(oy0) * l.out_cols, l.out_ch, span,
          Strided(plane));
      gw.noalias() += g * cols.transpose();
      if (need_input_grad) {
        Eigen::Map<RowMat> dc(dcols.data(), l.patch, span);
        dc.noalias() = w.transpose() * g;
        col2im_add(dcols.data(), n, l, geometry, oy0, oy1, grads.input);
      }
    }
  }
  return grads;
}

} // namespace krawtex::nn
