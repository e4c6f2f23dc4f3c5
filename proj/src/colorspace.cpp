#include "krawtex/colorspace.hpp"

#include <algorithm>
#include <stdexcept>

namespace krawtex {

namespace {

constexpr double kR = 0.299;
constexpr double kG = 0.587;
constexpr double kB = 0.114;
// 2 (1 - kB) and 2 (1 - kR)
constexpr double kCbScale = 1.772;
constexpr double kCrScale = 1.402;

void check_rgb(const PlanarImage& rgb)
{
  if (rgb.colorspace != ColorSpace::RGB || rgb.channel_count() != 3)
    throw std::invalid_argument("colorspace: expected a 3-channel RGB image");
  rgb.validate();
}

} // namespace

YCbCrImage YCbCrImage::with_luma(Channel luma) const
{
  if (luma.rows() != y.rows() || luma.cols() != y.cols())
    throw std::invalid_argument("colorspace: replacement luma has the wrong size");
  return YCbCrImage{std::move(luma), cb, cr};
}

YCbCrImage YCbCrImage::fit_luma_to_gamut() const
{
  YCbCrImage out = *this;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double cbd = cb(i) - 0.5;
    const double crd = cr(i) - 0.5;
    // offsets of R, G and B from Y
    const double offsets[3] = {kCrScale * crd, -(kR * kCrScale * crd + kB * kCbScale * cbd) / kG, kCbScale * cbd};
    double lo = 0.0, hi = 1.0;
    for (double o : offsets) {
      lo = std::max(lo, -o);
      hi = std::min(hi, 1.0 - o);
    }
    // empty range: chroma alone is out of gamut, keep the nearest end
    out.y(i) = lo > hi ? 0.5 * (lo + hi) : std::clamp(y(i), lo, hi);
  }
  return out;
}

PlanarImage YCbCrImage::as_planar() const
{
  return PlanarImage({y, cb, cr}, ColorSpace::YCbCr);
}

YCbCrImage rgb_to_ycbcr(const PlanarImage& rgb)
{
  check_rgb(rgb);
  const Channel& r = rgb.channels[0];
  const Channel& g = rgb.channels[1];
  const Channel& b = rgb.channels[2];
  // Written in colour differences so that gray pixels give Y equal to their
  // intensity and chroma of exactly 0.5.
  YCbCrImage out;
  out.y = g + kR * (r - g) + kB * (b - g);
  out.cb = ((kR * (b - r) + kG * (b - g)) / kCbScale).array() + 0.5;
  out.cr = ((kG * (r - g) + kB * (r - b)) / kCrScale).array() + 0.5;
  return out;
}

PlanarImage ycbcr_to_rgb(const YCbCrImage& image)
{
  if (image.cb.rows() != image.y.rows() || image.cr.rows() != image.y.rows() ||
      image.cb.cols() != image.y.cols() || image.cr.cols() != image.y.cols())
    throw std::invalid_argument("colorspace: YCbCr planes differ in size");
  const Channel cb = image.cb.array() - 0.5;
  const Channel cr = image.cr.array() - 0.5;
  Channel r = image.y + kCrScale * cr;
  Channel b = image.y + kCbScale * cb;
  Channel g = image.y - (kR * kCrScale * cr + kB * kCbScale * cb) / kG;
  PlanarImage out({std::move(r), std::move(g), std::move(b)}, ColorSpace::RGB);
  out.clamp01();
  return out;
}

PlanarImage luma(const PlanarImage& rgb)
{
  return PlanarImage({rgb_to_ycbcr(rgb).y}, ColorSpace::Y);
}

} // namespace krawtex
