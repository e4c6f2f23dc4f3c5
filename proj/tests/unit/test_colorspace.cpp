#include "oracles.hpp"

#include "krawtex/colorspace.hpp"

#include <doctest.h>

using namespace krawtex;

namespace {

PlanarImage solid(double r, double g, double b, int rows = 2, int cols = 3)
{
  return PlanarImage({Channel::Constant(rows, cols, r), Channel::Constant(rows, cols, g),
                      Channel::Constant(rows, cols, b)},
                     ColorSpace::RGB);
}

PlanarImage random_rgb(int rows, int cols, std::uint64_t seed)
{
  return PlanarImage({oracle::random_matrix(rows, cols, seed), oracle::random_matrix(rows, cols, seed + 1),
                      oracle::random_matrix(rows, cols, seed + 2)},
                     ColorSpace::RGB);
}

} // namespace

TEST_CASE("black, white and gray")
{
  const YCbCrImage black = rgb_to_ycbcr(solid(0, 0, 0));
  CHECK(black.y(0, 0) == 0.0);
  CHECK(black.cb(0, 0) == 0.5);
  CHECK(black.cr(0, 0) == 0.5);

  const YCbCrImage white = rgb_to_ycbcr(solid(1, 1, 1));
  CHECK(white.y(1, 2) == doctest::Approx(1.0));
  CHECK(white.cb(1, 2) == 0.5);
  CHECK(white.cr(1, 2) == 0.5);

  for (double v : {0.1, 0.37, 0.5, 0.93}) {
    const YCbCrImage g = rgb_to_ycbcr(solid(v, v, v));
    CHECK(g.y(0, 0) == doctest::Approx(v).epsilon(1e-15));
    CHECK(g.cb(0, 0) == 0.5);
    CHECK(g.cr(0, 0) == 0.5);
  }

  YCbCrImage mid{Channel::Constant(2, 2, 0.5), Channel::Constant(2, 2, 0.5), Channel::Constant(2, 2, 0.5)};
  const PlanarImage rgb = ycbcr_to_rgb(mid);
  for (const Channel& c : rgb.channels)
    CHECK(c(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("BT.601 luma coefficients")
{
  const YCbCrImage red = rgb_to_ycbcr(solid(1, 0, 0));
  const YCbCrImage green = rgb_to_ycbcr(solid(0, 1, 0));
  const YCbCrImage blue = rgb_to_ycbcr(solid(0, 0, 1));
  CHECK(red.y(0, 0) == doctest::Approx(0.299));
  CHECK(green.y(0, 0) == doctest::Approx(0.587));
  CHECK(blue.y(0, 0) == doctest::Approx(0.114));
  CHECK(blue.cb(0, 0) == doctest::Approx(1.0));
  CHECK(red.cr(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("roundtrip")
{
  const PlanarImage img = random_rgb(17, 23, 5);
  const PlanarImage back = ycbcr_to_rgb(rgb_to_ycbcr(img));
  for (int c = 0; c < 3; ++c)
    CHECK((back.channels[c] - img.channels[c]).cwiseAbs().maxCoeff() <= 2.0 / 255.0);
}

TEST_CASE("out of gamut clamps")
{
  YCbCrImage odd{Channel::Constant(2, 2, 1.0), Channel::Constant(2, 2, 1.0), Channel::Constant(2, 2, 0.0)};
  const PlanarImage rgb = ycbcr_to_rgb(odd);
  for (const Channel& c : rgb.channels) {
    CHECK(c.minCoeff() >= 0.0);
    CHECK(c.maxCoeff() <= 1.0);
  }
}

TEST_CASE("replacing luma passes chroma through bit for bit")
{
  const YCbCrImage ycc = rgb_to_ycbcr(random_rgb(9, 9, 8));
  const YCbCrImage swapped = ycc.with_luma(oracle::random_matrix(9, 9, 99));
  CHECK((swapped.cb.array() == ycc.cb.array()).all());
  CHECK((swapped.cr.array() == ycc.cr.array()).all());
  CHECK_THROWS_AS(ycc.with_luma(Channel::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("luma helper and errors")
{
  const PlanarImage img = random_rgb(4, 5, 2);
  const PlanarImage y = luma(img);
  CHECK(y.colorspace == ColorSpace::Y);
  CHECK((y.channels[0] - rgb_to_ycbcr(img).y).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(rgb_to_ycbcr(y), std::invalid_argument);
}

TEST_CASE("fitting luma to the gamut keeps chroma")
{
  const YCbCrImage ycc = rgb_to_ycbcr(random_rgb(16, 16, 30));
  const Channel wild = oracle::random_matrix(16, 16, 31, -0.5, 1.5);
  const YCbCrImage fitted = ycc.with_luma(wild).fit_luma_to_gamut();
  const YCbCrImage back = rgb_to_ycbcr(ycbcr_to_rgb(fitted));
  CHECK((back.cb - ycc.cb).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((back.cr - ycc.cr).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((back.y - fitted.y).cwiseAbs().maxCoeff() < 1e-12);

  // luma already inside the range is left alone
  const YCbCrImage same = ycc.fit_luma_to_gamut();
  CHECK((same.y - ycc.y).cwiseAbs().maxCoeff() < 1e-12);
  const YCbCrImage gray = rgb_to_ycbcr(solid(0.3, 0.3, 0.3)).with_luma(Channel::Constant(2, 3, 1.4));
  CHECK((gray.fit_luma_to_gamut().y.array() == 1.0).all());
}
