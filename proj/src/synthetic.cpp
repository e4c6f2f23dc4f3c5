#include "krawtex/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace krawtex {

namespace {

struct Rgb {
  double c[3];
};

Rgb dcp_colour(std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> bright(0.25, 1.0);
  std::uniform_real_distribution<double> dark(0.0, 0.06);
  std::uniform_int_distribution<int> pick(0, 2);
  Rgb col{{bright(rng), bright(rng), bright(rng)}};
  col.c[pick(rng)] = dark(rng);
  return col;
}

} // namespace

PlanarImage toy_scene(int rows, int cols, std::uint64_t seed)
{
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("toy_scene: empty size");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Channel> planes(3, Channel(rows, cols));
  const Rgb top = dcp_colour(rng);
  const Rgb bottom = dcp_colour(rng);
  for (int y = 0; y < rows; ++y) {
    const double s = rows == 1 ? 0.0 : static_cast<double>(y) / (rows - 1);
    for (int c = 0; c < 3; ++c)
      planes[c].row(y).setConstant((1.0 - s) * top.c[c] + s * bottom.c[c]);
  }

  // Ellipses and rectangles painted over the background.
  const int shapes = 4 + static_cast<int>(unit(rng) * 5);
  for (int s = 0; s < shapes; ++s) {
    const Rgb col = dcp_colour(rng);
    const double cy = unit(rng) * rows;
    const double cx = unit(rng) * cols;
    const double ry = (0.08 + 0.3 * unit(rng)) * rows;
    const double rx = (0.08 + 0.3 * unit(rng)) * cols;
    const bool ellipse = unit(rng) < 0.5;
    for (int y = 0; y < rows; ++y)
      for (int x = 0; x < cols; ++x) {
        const double dy = (y - cy) / ry;
        const double dx = (x - cx) / rx;
        const bool inside = ellipse ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (inside)
          for (int c = 0; c < 3; ++c)
            planes[c](y, x) = col.c[c];
      }
  }

  // Multiplicative shading and a fine texture keep the spectrum natural.
  const double fy = 4.0 + 10.0 * unit(rng);
  const double fx = 4.0 + 10.0 * unit(rng);
  const double phase = 2.0 * std::numbers::pi * unit(rng);
  std::normal_distribution<double> grain(0.0, 0.02);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      const double shade = 0.85 + 0.15 * std::sin(std::numbers::pi * (fy * y / rows + fx * x / cols) + phase);
      const double g = grain(rng);
      for (int c = 0; c < 3; ++c)
        planes[c](y, x) = std::clamp(planes[c](y, x) * shade + g * planes[c](y, x), 0.0, 1.0);
    }
  return PlanarImage(std::move(planes), ColorSpace::RGB);
}

ToyPair toy_pair(int rows, int cols, std::uint64_t seed, const ToyHazeOptions& options)
{
  if (!(options.t_min > 0.0 && options.t_min <= options.t_max && options.t_max <= 1.0))
    throw std::invalid_argument("toy_pair: need 0 < t_min <= t_max <= 1");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double mid = 0.5 * (options.t_min + options.t_max);
  const double t_far = options.t_min + unit(rng) * (mid - options.t_min);
  const double t_near = mid + unit(rng) * (options.t_max - mid);
  const auto kind = static_cast<DepthKind>(static_cast<int>(unit(rng) * 3.0) % 3);

  ToyPair pair;
  pair.clear = toy_scene(rows, cols, seed);
  // Depth in [-ln t_near, -ln t_far] with beta = 1.
  const Channel unit_depth = synthetic_depth(rows, cols, kind, seed + 1, 1.0);
  const double d_lo = -std::log(t_near);
  const double d_hi = -std::log(t_far);
  const Channel depth = (d_lo + (d_hi - d_lo) * unit_depth.array()).matrix();
  pair.transmission = transmission_from_depth(depth, 1.0);
  pair.airlight = {options.airlight, options.airlight, options.airlight};
  pair.hazy = apply_haze(pair.clear, pair.transmission, pair.airlight);
  return pair;
}

} // namespace krawtex
