#pragma once

#include <Eigen/Dense>

#include <vector>

namespace krawtex {

/// One image plane, indexed (row, column) = (y, x).
using Channel = Eigen::MatrixXd;

enum class ColorSpace { RGB, YCbCr, Y };

/// Floating-point image with nominal range [0, 1].
struct PlanarImage {
  std::vector<Channel> channels;
  ColorSpace colorspace = ColorSpace::RGB;

  PlanarImage() = default;
  PlanarImage(std::vector<Channel> planes, ColorSpace space);

  int height() const noexcept;
  int width() const noexcept;
  int channel_count() const noexcept { return static_cast<int>(channels.size()); }

  /// Throws std::invalid_argument on ragged planes or an empty image.
  void validate() const;
  void clamp01();
};

int expected_channels(ColorSpace space) noexcept;

/// Half-sample symmetric extension (edge pixel repeated) to the given size.
Channel pad_symmetric(const Channel& c, int rows, int cols);

/// Smallest multiple of `m` that is >= v.
int round_up(int v, int m) noexcept;

} // namespace krawtex
