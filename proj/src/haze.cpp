#include "krawtex/haze.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace krawtex {

namespace {

void check_rgb(const PlanarImage& image, const char* who)
{
  if (image.colorspace != ColorSpace::RGB)
    throw std::invalid_argument(std::string(who) + ": expected an RGB image");
  image.validate();
}

Channel min_filter(const Channel& c, int patch)
{
  const int r = patch / 2;
  const int h = static_cast<int>(c.rows());
  const int w = static_cast<int>(c.cols());
  Channel rows_min(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(0, x - r);
      const int hi = std::min(w - 1, x + r);
      rows_min(y, x) = c.row(y).segment(lo, hi - lo + 1).minCoeff();
    }
  Channel out(h, w);
  for (int y = 0; y < h; ++y) {
    const int lo = std::max(0, y - r);
    const int hi = std::min(h - 1, y + r);
    for (int x = 0; x < w; ++x)
      out(y, x) = rows_min.col(x).segment(lo, hi - lo + 1).minCoeff();
  }
  return out;
}

} // namespace

void HazeScene::validate() const
{
  check_rgb(clear, "haze scene");
  if (depth.rows() != clear.height() || depth.cols() != clear.width())
    throw std::invalid_argument("haze scene: depth and image differ in size");
  if (!(beta > 0.0))
    throw std::invalid_argument("haze scene: beta must be positive");
  for (double a : airlight)
    if (!(a >= 0.0 && a <= 1.0))
      throw std::invalid_argument("haze scene: airlight components must lie in [0, 1]");
}

Channel transmission_from_depth(const Channel& depth, double beta)
{
  if (!(beta > 0.0))
    throw std::invalid_argument("transmission: beta must be positive");
  if (depth.size() > 0 && !(depth.minCoeff() >= 0.0))
    throw std::invalid_argument("transmission: depth must be non-negative");
  return (-beta * depth.array()).exp().matrix();
}

PlanarImage apply_haze(const PlanarImage& clear, const Channel& transmission, const Airlight& airlight)
{
  check_rgb(clear, "apply_haze");
  if (transmission.rows() != clear.height() || transmission.cols() != clear.width())
    throw std::invalid_argument("apply_haze: transmission and image differ in size");
  PlanarImage hazy = clear;
  for (int c = 0; c < 3; ++c)
    hazy.channels[c] = (clear.channels[c].array() * transmission.array() +
                        airlight[c] * (1.0 - transmission.array()))
                           .matrix();
  hazy.clamp01();
  return hazy;
}

PlanarImage synthesize_haze(const HazeScene& scene)
{
  scene.validate();
  return apply_haze(scene.clear, transmission_from_depth(scene.depth, scene.beta), scene.airlight);
}

Channel dark_channel(const PlanarImage& image, int patch_size)
{
  image.validate();
  if (patch_size < 1 || patch_size % 2 == 0)
    throw std::invalid_argument("dark_channel: patch size must be odd and positive");
  Channel pixel_min = image.channels[0];
  for (int c = 1; c < image.channel_count(); ++c)
    pixel_min = pixel_min.cwiseMin(image.channels[c]);
  return min_filter(pixel_min, patch_size);
}

Airlight estimate_airlight(const PlanarImage& image, const Channel& dark)
{
  check_rgb(image, "estimate_airlight");
  if (dark.rows() != image.height() || dark.cols() != image.width())
    throw std::invalid_argument("estimate_airlight: dark channel and image differ in size");
  const int w = image.width();
  const std::size_t total = static_cast<std::size_t>(dark.size());
  const std::size_t keep = std::max<std::size_t>(1, total / 1000);

  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto dark_at = [&](std::size_t i) { return dark(static_cast<int>(i / w), static_cast<int>(i % w)); };
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return dark_at(a) > dark_at(b); });

  Airlight a{0.0, 0.0, 0.0};
  for (std::size_t n = 0; n < keep; ++n) {
    const int y = static_cast<int>(idx[n] / w);
    const int x = static_cast<int>(idx[n] % w);
    for (int c = 0; c < 3; ++c)
      a[c] += image.channels[c](y, x);
  }
  for (double& v : a)
    v /= static_cast<double>(keep);
  return a;
}

DcpResult dcp_dehaze(const PlanarImage& image, double t0, int patch_size)
{
  check_rgb(image, "dcp_dehaze");
  if (!(t0 > 0.0 && t0 < 1.0))
    throw std::invalid_argument("dcp_dehaze: t0 must lie in (0, 1)");

  DcpResult result;
  result.airlight = estimate_airlight(image, dark_channel(image, patch_size));
  for (double a : result.airlight)
    if (a <= 0.05)
      throw std::runtime_error("dcp_dehaze: degenerate airlight estimate");

  PlanarImage normalized = image;
  for (int c = 0; c < 3; ++c)
    normalized.channels[c] /= result.airlight[c];
  const Channel t = (1.0 - dark_channel(normalized, patch_size).array()).matrix();
  result.transmission = t.cwiseMax(t0);

  result.dehazed = image;
  for (int c = 0; c < 3; ++c)
    result.dehazed.channels[c] =
        ((image.channels[c].array() - result.airlight[c]) / result.transmission.array() +
         result.airlight[c])
            .matrix();
  result.dehazed.clamp01();
  return result;
}

DepthKind parse_depth_kind(const std::string& name)
{
  if (name == "ramp")
    return DepthKind::Ramp;
  if (name == "radial")
    return DepthKind::Radial;
  if (name == "smooth")
    return DepthKind::Smooth;
  throw std::invalid_argument("unknown depth kind '" + name + "' (ramp, radial, smooth)");
}

Channel synthetic_depth(int rows, int cols, DepthKind kind, std::uint64_t seed, double depth_max)
{
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("synthetic_depth: empty size");
  if (!(depth_max >= 0.0))
    throw std::invalid_argument("synthetic_depth: depth_max must be non-negative");
  Channel d(rows, cols);
  switch (kind) {
  case DepthKind::Ramp:
    for (int y = 0; y < rows; ++y)
      d.row(y).setConstant(rows == 1 ? 1.0 : 1.0 - static_cast<double>(y) / (rows - 1));
    break;
  case DepthKind::Radial: {
    const double cy = 0.5 * (rows - 1);
    const double cx = 0.5 * (cols - 1);
    const double rmax = std::max(1e-12, std::hypot(cy, cx));
    for (int y = 0; y < rows; ++y)
      for (int x = 0; x < cols; ++x)
        d(y, x) = 1.0 - std::hypot(y - cy, x - cx) / rmax;
    break;
  }
  case DepthKind::Smooth: {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    d.setZero();
    for (int term = 0; term < 4; ++term) {
      const double fy = 0.5 + 1.5 * unit(rng);
      const double fx = 0.5 + 1.5 * unit(rng);
      const double phase = 2.0 * std::numbers::pi * unit(rng);
      const double amp = 1.0 / (term + 1);
      for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x)
          d(y, x) += amp * std::cos(std::numbers::pi * (fy * y / rows + fx * x / cols) + phase);
    }
    const double lo = d.minCoeff();
    const double span = d.maxCoeff() - lo;
    if (span > 0)
      d = ((d.array() - lo) / span).matrix();
    else
      d.setZero();
    break;
  }
  }
  return depth_max * d;
}

} // namespace krawtex
