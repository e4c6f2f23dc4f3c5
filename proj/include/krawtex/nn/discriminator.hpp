#pragma once

#include "krawtex/nn/layers.hpp"

#include <cstdint>
#include <vector>

namespace krawtex::nn {

/// Four stride-2 3x3 convolutions (1 -> w -> 2w -> 4w -> 1), global average
/// and a sigmoid: one realness score per sample.
class Discriminator {
public:
  Discriminator(int width, std::uint64_t seed);
  Discriminator(const Discriminator&) = delete;
  Discriminator& operator=(const Discriminator&) = delete;

  /// (n, 1, h, w) -> (n, 1, 1, 1) in (0, 1).
  Var forward(Tape& t, Var input);

  int width() const noexcept { return width_; }
  ParameterStore& params() noexcept { return store_; }
  const ParameterStore& params() const noexcept { return store_; }

  static int width_at_scale(double scale);

private:
  int width_;
  ParameterStore store_;
  std::vector<ConvLayer> convs_;
};

} // namespace krawtex::nn
