#include "krawtex/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace krawtex::nn {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op)
{
  if (!(a.shape() == b.shape()))
    throw std::invalid_argument(std::string(op) + ": shape " + a.shape().str() + " vs " +
                                b.shape().str());
}

Tensor scalar(double v)
{
  return Tensor({1, 1, 1, 1}, v);
}

double logistic(double v)
{
  if (v >= 0.0)
    return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

} // namespace

Var conv2d(Tape& t, Var input, Var weight, Var bias, const ConvGeometry& geometry)
{
  const Tensor empty;
  const Tensor& b = bias.valid() ? t.value(bias) : empty;
  Tensor out = conv2d_forward(t.value(input), t.value(weight), b, geometry);
  return t.record(std::move(out), {input, weight, bias}, [=](Tape& tp, std::size_t self) {
    const bool need_x = tp.requires_grad(input);
    ConvGrads g = conv2d_backward(tp.value(input), tp.value(weight), tp.grad(self), geometry, need_x);
    if (need_x)
      tp.accumulate(input, std::move(g.input));
    tp.accumulate(weight, std::move(g.weight));
    if (bias.valid()) {
      Tensor gb(tp.value(bias).shape(), std::vector<double>(g.bias.values().begin(), g.bias.values().end()));
      tp.accumulate(bias, std::move(gb));
    }
  });
}

Var add(Tape& t, Var a, Var b)
{
  require_same(t.value(a), t.value(b), "add");
  Tensor out = t.value(a);
  out.add(t.value(b));
  return t.record(std::move(out), {a, b}, [=](Tape& tp, std::size_t self) {
    tp.accumulate(a, tp.grad(self));
    tp.accumulate(b, tp.grad(self));
  });
}

Var scale(Tape& t, Var a, double factor)
{
  Tensor out = t.value(a);
  for (double& v : out.values())
    v *= factor;
  return t.record(std::move(out), {a}, [=](Tape& tp, std::size_t self) {
    Tensor g = tp.grad(self);
    for (double& v : g.values())
      v *= factor;
    tp.accumulate(a, std::move(g));
  });
}

Var silu(Tape& t, Var x)
{
  const Tensor& in = t.value(x);
  Tensor out(in.shape());
  auto sig = std::make_shared<std::vector<double>>(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    (*sig)[i] = logistic(in[i]);
    out[i] = in[i] * (*sig)[i];
  }
  return t.record(std::move(out), {x}, [=](Tape& tp, std::size_t self) {
    const Tensor& v = tp.value(x);
    Tensor g = tp.grad(self);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double s = (*sig)[i];
      g[i] *= s * (1.0 + v[i] * (1.0 - s));
    }
    tp.accumulate(x, std::move(g));
  });
}

Var sigmoid(Tape& t, Var x)
{
  const Tensor& in = t.value(x);
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i)
    out[i] = logistic(in[i]);
  return t.record(std::move(out), {x}, [=](Tape& tp, std::size_t self) {
    const Tensor& s = tp.value(Var{self});
    Tensor g = tp.grad(self);
    for (std::size_t i = 0; i < s.size(); ++i)
      g[i] *= s[i] * (1.0 - s[i]);
    tp.accumulate(x, std::move(g));
  });
}

Var clamp(Tape& t, Var x, double lo, double hi)
{
  const Tensor& in = t.value(x);
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i)
    out[i] = std::clamp(in[i], lo, hi);
  return t.record(std::move(out), {x}, [=](Tape& tp, std::size_t self) {
    const Tensor& v = tp.value(x);
    Tensor g = tp.grad(self);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] < lo || v[i] > hi)
        g[i] = 0.0;
    tp.accumulate(x, std::move(g));
  });
}

Var mul_channels(Tape& t, Var x, Var gate)
{
  const Tensor& in = t.value(x);
  const Tensor& gv = t.value(gate);
  const Shape s = in.shape();
  if (!(gv.shape() == Shape{s.n, s.c, 1, 1}))
    throw std::invalid_argument("mul_channels: gate " + gv.shape().str() + " for input " + s.str());
  const int plane = s.h * s.w;
  Tensor out(s);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const double k = gv.at(n, c, 0, 0);
      const double* src = in.plane(n, c);
      double* dst = out.plane(n, c);
      for (int i = 0; i < plane; ++i)
        dst[i] = src[i] * k;
    }
  return t.record(std::move(out), {x, gate}, [=](Tape& tp, std::size_t self) {
    const Tensor& xv = tp.value(x);
    const Tensor& gvv = tp.value(gate);
    const Tensor& go = tp.grad(self);
    Tensor gx(s);
    Tensor gg(gvv.shape());
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c) {
        const double k = gvv.at(n, c, 0, 0);
        const double* src = xv.plane(n, c);
        const double* g = go.plane(n, c);
        double* dx = gx.plane(n, c);
        double acc = 0.0;
        for (int i = 0; i < plane; ++i) {
          dx[i] = g[i] * k;
          acc += g[i] * src[i];
        }
        gg.at(n, c, 0, 0) = acc;
      }
    tp.accumulate(x, std::move(gx));
    tp.accumulate(gate, std::move(gg));
  });
}

Var concat_channels(Tape& t, const std::vector<Var>& parts)
{
  if (parts.empty())
    throw std::invalid_argument("concat_channels: no inputs");
  const Shape first = t.value(parts.front()).shape();
  int channels = 0;
  for (Var v : parts) {
    const Shape s = t.value(v).shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w)
      throw std::invalid_argument("concat_channels: " + s.str() + " vs " + first.str());
    channels += s.c;
  }
  const std::size_t plane = static_cast<std::size_t>(first.h) * first.w;
  Tensor out({first.n, channels, first.h, first.w});
  for (int n = 0; n < first.n; ++n) {
    int c0 = 0;
    for (Var v : parts) {
      const Tensor& src = t.value(v);
      std::copy_n(src.plane(n, 0), plane * src.shape().c, out.plane(n, c0));
      c0 += src.shape().c;
    }
  }
  return t.record(std::move(out), parts, [=](Tape& tp, std::size_t self) {
    const Tensor& go = tp.grad(self);
    int c0 = 0;
    for (Var v : parts) {
      const Shape s = tp.value(v).shape();
      if (tp.requires_grad(v)) {
        Tensor g(s);
        for (int n = 0; n < s.n; ++n)
          std::copy_n(go.plane(n, c0), plane * s.c, g.plane(n, 0));
        tp.accumulate(v, std::move(g));
      }
      c0 += s.c;
    }
  });
}

Var slice_channels(Tape& t, Var x, int begin, int end)
{
  const Tensor& in = t.value(x);
  const Shape s = in.shape();
  if (begin < 0 || end > s.c || begin >= end)
    throw std::out_of_range("slice_channels: [" + std::to_string(begin) + "," + std::to_string(end) +
                            ") of " + std::to_string(s.c) + " channels");
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  const int count = end - begin;
  Tensor out({s.n, count, s.h, s.w});
  for (int n = 0; n < s.n; ++n)
    std::copy_n(in.plane(n, begin), plane * count, out.plane(n, 0));
  return t.record(std::move(out), {x}, [=](Tape& tp, std::size_t self) {
    const Tensor& go = tp.grad(self);
    Tensor g(s);
    for (int n = 0; n < s.n; ++n)
      std::copy_n(go.plane(n, 0), plane * count, g.plane(n, begin));
    tp.accumulate(x, std::move(g));
  });
}

Var avg_pool2(Tape& t, Var x)
{
  const Tensor& in = t.value(x);
  const Shape s = in.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0)
    throw std::invalid_argument("avg_pool2: odd extent " + s.str());
  const Shape os{s.n, s.c, s.h / 2, s.w / 2};
  Tensor out(os);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < os.h; ++y)
        for (int x2 = 0; x2 < os.w; ++x2)
          out.at(n, c, y, x2) = 0.25 * (in.at(n, c, 2 * y, 2 * x2) + in.at(n, c, 2 * y, 2 * x2 + 1) +
                                        in.at(n, c, 2 * y + 1, 2 * x2) +
                                        in.at(n, c, 2 * y + 1, 2 * x2 + 1));
  return t.record(std::move(out), {x}, [=](Tape& tp, std::size_t self) {
    const Tensor& go = tp.grad(self);
    Tensor g(s);
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c)
        for (int y = 0; y < s.h; ++y)
          for (int x2 = 0; x2 < s.w; ++x2)
            g.at(n, c, y, x2) = 0.25 * go.at(n, c, y / 2, x2 / 2);
    tp.accumulate(x, std::move(g));
  });
}

Var upsample2(Tape& t, Var x)
{
  const Tensor& in = t.value(x);
  const Shape s = in.shape();
  Tensor out({s.n, s.c, 2 * s.h, 2 * s.w});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < 2 * s.h; ++y)
        for (int x2 = 0; x2 < 2 * s.w; ++x2)
          out.at(n, c, y, x2) = in.at(n, c, y / 2, x2 / 2);
  return t.record(std::move(out), {x}, [=](Tape& tp, std::size_t self) {
    const Tensor& go = tp.grad(self);
    Tensor g(s);
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c)
        for (int y = 0; y < 2 * s.h; ++y)
          for (int x2 = 0; x2 < 2 * s.w; ++x2)
            g.at(n, c, y / 2, x2 / 2) += go.at(n, c, y, x2);
    tp.accumulate(x, std::move(g));
  });
}

Var global_avg_pool(Tape& t, Var x)
{
  const Tensor& in = t.value(x);
  const Shape s = in.shape();
  const int plane = s.h * s.w;
  Tensor out({s.n, s.c, 1, 1});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const double* p = in.plane(n, c);
      double acc = 0.0;
      for (int i = 0; i < plane; ++i)
        acc += p[i];
      out.at(n, c, 0, 0) = acc / plane;
    }
  return t.record(std::move(out), {x}, [=](Tape& tp, std::size_t self) {
    const Tensor& go = tp.grad(self);
    Tensor g(s);
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c) {
        const double v = go.at(n, c, 0, 0) / plane;
        std::fill_n(g.plane(n, c), plane, v);
      }
    tp.accumulate(x, std::move(g));
  });
}

Var batch_norm(Tape& t, Var x, Var gamma, Var beta, const BatchNormState& state, bool training)
{
  const Tensor& in = t.value(x);
  const Shape s = in.shape();
  const Tensor& gv = t.value(gamma);
  const Tensor& bv = t.value(beta);
  if (gv.size() != static_cast<std::size_t>(s.c) || bv.size() != static_cast<std::size_t>(s.c))
    throw std::invalid_argument("batch_norm: affine size does not match " + s.str());
  if (!state.running_mean || !state.running_var)
    throw std::invalid_argument("batch_norm: missing running buffers");
  Tensor& rmean = state.running_mean->value;
  Tensor& rvar = state.running_var->value;

  const int plane = s.h * s.w;
  const double count = static_cast<double>(s.n) * plane;
  std::vector<double> mean(s.c), inv_std(s.c);
  for (int c = 0; c < s.c; ++c) {
    if (training) {
      double acc = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const double* p = in.plane(n, c);
        for (int i = 0; i < plane; ++i)
          acc += p[i];
      }
      const double mu = acc / count;
      double sq = 0.0;
      for (int n = 0; n < s.n; ++n) {
        const double* p = in.plane(n, c);
        for (int i = 0; i < plane; ++i)
          sq += (p[i] - mu) * (p[i] - mu);
      }
      const double var = sq / count;
      mean[c] = mu;
      inv_std[c] = 1.0 / std::sqrt(var + state.eps);
      const double unbiased = count > 1 ? sq / (count - 1) : var;
      rmean[c] = (1.0 - state.momentum) * rmean[c] + state.momentum * mu;
      rvar[c] = (1.0 - state.momentum) * rvar[c] + state.momentum * unbiased;
    }
    else {
      mean[c] = rmean[c];
      inv_std[c] = 1.0 / std::sqrt(rvar[c] + state.eps);
    }
  }

  Tensor xhat(s);
  Tensor out(s);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const double* p = in.plane(n, c);
      double* h = xhat.plane(n, c);
      double* o = out.plane(n, c);
      for (int i = 0; i < plane; ++i) {
        h[i] = (p[i] - mean[c]) * inv_std[c];
        o[i] = gv[c] * h[i] + bv[c];
      }
    }

  return t.record(std::move(out), {x, gamma, beta},
                  [=, xhat = std::move(xhat)](Tape& tp, std::size_t self) {
                    const Tensor& go = tp.grad(self);
                    const Tensor& gam = tp.value(gamma);
                    Tensor dgamma(gam.shape());
                    Tensor dbeta(gam.shape());
                    Tensor dx(s);
                    for (int c = 0; c < s.c; ++c) {
                      double sum_g = 0.0, sum_gh = 0.0;
                      for (int n = 0; n < s.n; ++n) {
                        const double* g = go.plane(n, c);
                        const double* h = xhat.plane(n, c);
                        for (int i = 0; i < plane; ++i) {
                          sum_g += g[i];
                          sum_gh += g[i] * h[i];
                        }
                      }
                      dgamma[c] = sum_gh;
                      dbeta[c] = sum_g;
                      const double k = gam[c] * inv_std[c];
                      for (int n = 0; n < s.n; ++n) {
                        const double* g = go.plane(n, c);
                        const double* h = xhat.plane(n, c);
                        double* d = dx.plane(n, c);
                        for (int i = 0; i < plane; ++i)
                          d[i] = training ? k * (g[i] - sum_g / count - h[i] * sum_gh / count) : k * g[i];
                      }
                    }
                    tp.accumulate(x, std::move(dx));
                    tp.accumulate(gamma, std::move(dgamma));
                    tp.accumulate(beta, std::move(dbeta));
                  });
}

Var smooth_l1_loss(Tape& t, Var pred, const Tensor& target)
{
  const Tensor& p = t.value(pred);
  require_same(p, target, "smooth_l1_loss");
  const double count = static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double l = p[i] - target[i];
    acc += std::abs(l) < 1.0 ? 0.5 * l * l : std::abs(l) - 0.5;
  }
  return t.record(scalar(acc / count), {pred}, [=](Tape& tp, std::size_t self) {
    const Tensor& pv = tp.value(pred);
    const double g0 = tp.grad(self)[0] / count;
    Tensor g(pv.shape());
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double l = pv[i] - target[i];
      g[i] = g0 * (std::abs(l) < 1.0 ? l : (l > 0 ? 1.0 : -1.0));
    }
    tp.accumulate(pred, std::move(g));
  });
}

Var mse_loss(Tape& t, Var pred, const Tensor& target)
{
  const Tensor& p = t.value(pred);
  require_same(p, target, "mse_loss");
  const double count = static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    acc += (p[i] - target[i]) * (p[i] - target[i]);
  return t.record(scalar(acc / count), {pred}, [=](Tape& tp, std::size_t self) {
    const Tensor& pv = tp.value(pred);
    const double g0 = 2.0 * tp.grad(self)[0] / count;
    Tensor g(pv.shape());
    for (std::size_t i = 0; i < pv.size(); ++i)
      g[i] = g0 * (pv[i] - target[i]);
    tp.accumulate(pred, std::move(g));
  });
}

Var dot(Tape& t, Var x, const Tensor& weights)
{
  const Tensor& v = t.value(x);
  require_same(v, weights, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    acc += v[i] * weights[i];
  return t.record(scalar(acc), {x}, [=](Tape& tp, std::size_t self) {
    const double g0 = tp.grad(self)[0];
    Tensor g = weights;
    for (double& w : g.values())
      w *= g0;
    tp.accumulate(x, std::move(g));
  });
}

Var weighted_sum(Tape& t, const std::vector<std::pair<Var, double>>& terms)
{
  std::vector<Var> inputs;
  double acc = 0.0;
  for (const auto& [v, w] : terms) {
    if (t.value(v).size() != 1)
      throw std::invalid_argument("weighted_sum: non-scalar term " + t.value(v).shape().str());
    acc += w * t.value(v)[0];
    inputs.push_back(v);
  }
  return t.record(scalar(acc), inputs, [=](Tape& tp, std::size_t self) {
    const double g0 = tp.grad(self)[0];
    for (const auto& [v, w] : terms)
      tp.accumulate(v, scalar(g0 * w));
  });
}

namespace {

// Mean over the batch of -log(clamp(d)) (positive) or -log(1 - clamp(d)).
Var neg_log_mean(Tape& t, Var d, bool complement)
{
  const Tensor& v = t.value(d);
  const double count = static_cast<double>(v.size());
  const double lo = kScoreClamp, hi = 1.0 - kScoreClamp;
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = std::clamp(v[i], lo, hi);
    acc -= complement ? std::log1p(-c) : std::log(c);
  }
  return t.record(scalar(acc / count), {d}, [=](Tape& tp, std::size_t self) {
    const Tensor& dv = tp.value(d);
    const double g0 = tp.grad(self)[0] / count;
    Tensor g(dv.shape());
    for (std::size_t i = 0; i < dv.size(); ++i) {
      if (dv[i] < lo || dv[i] > hi)
        continue;
      g[i] = complement ? g0 / (1.0 - dv[i]) : -g0 / dv[i];
    }
    tp.accumulate(d, std::move(g));
  });
}

} // namespace

Var generator_gan_loss(Tape& t, Var d_fake)
{
  return neg_log_mean(t, d_fake, false);
}

Var discriminator_gan_loss(Tape& t, Var d_real, Var d_fake)
{
  const Var real_term = neg_log_mean(t, d_real, false);
  const Var fake_term = neg_log_mean(t, d_fake, true);
  return weighted_sum(t, {{real_term, 1.0}, {fake_term, 1.0}});
}

} // namespace krawtex::nn
