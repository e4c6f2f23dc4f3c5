#pragma once

#include "krawtex/haze.hpp"
#include "krawtex/image.hpp"

#include <cstdint>

namespace krawtex {

/// Procedural outdoor-like RGB scene: coloured regions with one dark channel
/// each, smooth shading and fine texture. Deterministic in the seed.
PlanarImage toy_scene(int rows, int cols, std::uint64_t seed);

/// A clear scene hazed with a synthetic depth map whose transmission spans a
/// random sub-interval of [t_min, t_max].
struct ToyPair {
  PlanarImage clear;
  PlanarImage hazy;
  Channel transmission;
  Airlight airlight{};
};

struct ToyHazeOptions {
  double airlight = 0.8;
  double t_min = 0.3;
  double t_max = 0.7;
};

ToyPair toy_pair(int rows, int cols, std::uint64_t seed, const ToyHazeOptions& options = {});

} // namespace krawtex
