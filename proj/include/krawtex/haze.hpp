#pragma once

#include "krawtex/image.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace krawtex {

using Airlight = std::array<double, 3>;

/// Clear radiance plus the depth and scattering parameters that haze it.
struct HazeScene {
  PlanarImage clear;
  Channel depth;
  double beta = 1.0;
  Airlight airlight{0.8, 0.8, 0.8};

  void validate() const;
};

/// t = exp(-beta * depth).
Channel transmission_from_depth(const Channel& depth, double beta);

/// I = R t + A (1 - t) per channel, clamped to [0, 1].
PlanarImage apply_haze(const PlanarImage& clear, const Channel& transmission, const Airlight& airlight);

PlanarImage synthesize_haze(const HazeScene& scene);

/// Per-pixel channel minimum followed by a patch x patch minimum filter.
/// The window is clipped at the image border.
Channel dark_channel(const PlanarImage& image, int patch_size);

/// Mean colour of the brightest 0.1% of dark-channel pixels (at least one).
/// Ties are broken by row-major scan order.
Airlight estimate_airlight(const PlanarImage& image, const Channel& dark);

struct DcpResult {
  PlanarImage dehazed;
  /// Transmission after the lower bound, max(t, t0).
  Channel transmission;
  Airlight airlight{};
};

inline constexpr double kDefaultT0 = 0.1;
inline constexpr int kDefaultDcpPatch = 15;

/// Dark-channel-prior dehazing: t = 1 - dark(I / A), R = (I - A) / max(t, t0) + A.
DcpResult dcp_dehaze(const PlanarImage& image, double t0 = kDefaultT0,
                     int patch_size = kDefaultDcpPatch);

enum class DepthKind { Ramp, Radial, Smooth };

DepthKind parse_depth_kind(const std::string& name);

/// Synthetic depth in [0, depth_max]. Ramp: far at the top row. Radial: far
/// at the centre. Smooth: a seeded sum of low-frequency cosines.
Channel synthetic_depth(int rows, int cols, DepthKind kind, std::uint64_t seed,
                        double depth_max = 1.0);

} // namespace krawtex
