#pragma once

#include "krawtex/image.hpp"

namespace krawtex {

/// Full-range BT.601 luma/chroma planes; chroma is centred at 0.5.
struct YCbCrImage {
  Channel y;
  Channel cb;
  Channel cr;

  /// Replaces luma only; chroma planes are left untouched.
  YCbCrImage with_luma(Channel luma) const;
  /// Clamps each luma sample into the range where the pixel's RGB values
  /// all lie in [0, 1], so conversion back needs no clipping and chroma
  /// survives. The range always holds the luma of an in-gamut pixel.
  YCbCrImage fit_luma_to_gamut() const;
  PlanarImage as_planar() const;
};

YCbCrImage rgb_to_ycbcr(const PlanarImage& rgb);

/// Inverse transform; out-of-gamut results are clamped to [0, 1].
PlanarImage ycbcr_to_rgb(const YCbCrImage& image);

/// Luma of an RGB image as a single-channel image.
PlanarImage luma(const PlanarImage& rgb);

} // namespace krawtex
