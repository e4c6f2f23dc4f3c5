#include "krawtex/image.hpp"

#include <stdexcept>

namespace krawtex {

PlanarImage::PlanarImage(std::vector<Channel> planes, ColorSpace space)
    : channels(std::move(planes)), colorspace(space)
{
  validate();
}

int PlanarImage::height() const noexcept
{
  return channels.empty() ? 0 : static_cast<int>(channels.front().rows());
}

int PlanarImage::width() const noexcept
{
  return channels.empty() ? 0 : static_cast<int>(channels.front().cols());
}

void PlanarImage::validate() const
{
  if (channels.empty() || height() == 0 || width() == 0)
    throw std::invalid_argument("image: empty");
  if (channel_count() != expected_channels(colorspace))
    throw std::invalid_argument("image: channel count does not match color space");
  for (const auto& c : channels)
    if (c.rows() != height() || c.cols() != width())
      throw std::invalid_argument("image: channels differ in size");
}

void PlanarImage::clamp01()
{
  for (auto& c : channels)
    c = c.cwiseMax(0.0).cwiseMin(1.0);
}

int expected_channels(ColorSpace space) noexcept
{
  return space == ColorSpace::Y ? 1 : 3;
}

namespace {

int fold(int i, int n)
{
  const int period = 2 * n;
  i %= period;
  if (i < 0)
    i += period;
  return i < n ? i : period - 1 - i;
}

} // namespace

Channel pad_symmetric(const Channel& c, int rows, int cols)
{
  if (c.size() == 0)
    throw std::invalid_argument("pad_symmetric: empty channel");
  if (rows < c.rows() || cols < c.cols())
    throw std::invalid_argument("pad_symmetric: target smaller than source");
  const int h = static_cast<int>(c.rows());
  const int w = static_cast<int>(c.cols());
  Channel out(rows, cols);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x)
      out(y, x) = c(fold(y, h), fold(x, w));
  return out;
}

int round_up(int v, int m) noexcept
{
  return (v + m - 1) / m * m;
}

} // namespace krawtex
