#include "oracles.hpp"

#include "krawtex/haze.hpp"
#include "krawtex/metrics.hpp"
#include "krawtex/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace krawtex;

namespace {

PlanarImage random_rgb(int rows, int cols, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
{
  return PlanarImage({oracle::random_matrix(rows, cols, seed, lo, hi), oracle::random_matrix(rows, cols, seed + 1, lo, hi),
                      oracle::random_matrix(rows, cols, seed + 2, lo, hi)},
                     ColorSpace::RGB);
}

Channel brute_dark(const PlanarImage& img, int patch)
{
  const int h = img.height(), w = img.width(), r = patch / 2;
  Channel out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double m = 1e300;
      for (int yy = y - r; yy <= y + r; ++yy)
        for (int xx = x - r; xx <= x + r; ++xx) {
          if (yy < 0 || yy >= h || xx < 0 || xx >= w)
            continue;
          for (const Channel& c : img.channels)
            m = std::min(m, c(yy, xx));
        }
      out(y, x) = m;
    }
  return out;
}

} // namespace

TEST_CASE("transmission")
{
  Channel depth(1, 3);
  depth << 0.0, std::log(2.0), 1.5;
  const Channel t = transmission_from_depth(depth, 1.0);
  CHECK(t(0, 0) == 1.0);
  CHECK(t(0, 1) == doctest::Approx(0.5));
  const Channel t2 = transmission_from_depth(depth, 2.0);
  for (int x = 0; x < 3; ++x)
    CHECK(t2(0, x) == doctest::Approx(t(0, x) * t(0, x)));
  const Channel ramp = synthetic_depth(8, 8, DepthKind::Ramp, 0, 2.0);
  const Channel tr = transmission_from_depth(ramp, 0.7);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      for (int yy = 0; yy < 8; ++yy)
        if (ramp(yy, x) > ramp(y, x))
          CHECK(tr(yy, x) < tr(y, x));
  CHECK_THROWS_AS(transmission_from_depth(depth, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(transmission_from_depth(-depth.array().abs().matrix() - Channel::Ones(1, 3), 1.0),
                  std::invalid_argument);
}

TEST_CASE("scattering model")
{
  const PlanarImage clear = random_rgb(6, 7, 3);
  const Airlight a{0.8, 0.7, 0.9};
  const PlanarImage none = apply_haze(clear, Channel::Ones(6, 7), a);
  for (int c = 0; c < 3; ++c)
    CHECK((none.channels[c].array() == clear.channels[c].array()).all());
  const PlanarImage full = apply_haze(clear, Channel::Zero(6, 7), a);
  for (int c = 0; c < 3; ++c)
    CHECK((full.channels[c].array() - a[c]).abs().maxCoeff() < 1e-15);

  // one pixel by hand: 0.2 * 0.4 + 0.8 * 0.6 = 0.56
  PlanarImage px({Channel::Constant(1, 1, 0.2), Channel::Constant(1, 1, 0.2), Channel::Constant(1, 1, 0.2)},
                 ColorSpace::RGB);
  const PlanarImage h = apply_haze(px, Channel::Constant(1, 1, 0.4), {0.8, 0.8, 0.8});
  CHECK(h.channels[0](0, 0) == doctest::Approx(0.56));

  // every hazy pixel lies between its clear value and the airlight
  HazeScene scene{clear, synthetic_depth(6, 7, DepthKind::Smooth, 4, 1.5), 1.3, a};
  const PlanarImage hazy = synthesize_haze(scene);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 7; ++x) {
        const double lo = std::min(clear.channels[c](y, x), a[c]);
        const double hi = std::max(clear.channels[c](y, x), a[c]);
        CHECK(hazy.channels[c](y, x) >= lo - 1e-15);
        CHECK(hazy.channels[c](y, x) <= hi + 1e-15);
      }

  // raising beta never brings a pixel closer to the clear value
  HazeScene thicker = scene;
  thicker.beta = 2.0;
  const PlanarImage hazier = synthesize_haze(thicker);
  for (int c = 0; c < 3; ++c)
    CHECK(((hazier.channels[c] - clear.channels[c]).array().abs() >=
           (hazy.channels[c] - clear.channels[c]).array().abs() - 1e-15)
              .all());

  HazeScene bad = scene;
  bad.depth = Channel::Zero(2, 2);
  CHECK_THROWS_AS(synthesize_haze(bad), std::invalid_argument);
  bad = scene;
  bad.airlight = {1.2, 0.5, 0.5};
  CHECK_THROWS_AS(synthesize_haze(bad), std::invalid_argument);
}

TEST_CASE("dark channel")
{
  const PlanarImage img = random_rgb(19, 23, 12);
  for (int patch : {1, 3, 7, 15})
    CHECK((dark_channel(img, patch) - brute_dark(img, patch)).cwiseAbs().maxCoeff() == 0.0);

  PlanarImage flat({Channel::Constant(5, 5, 0.3), Channel::Constant(5, 5, 0.3), Channel::Constant(5, 5, 0.3)},
                   ColorSpace::RGB);
  CHECK((dark_channel(flat, 3).array() == 0.3).all());

  PlanarImage holed = random_rgb(9, 9, 2, 0.2, 1.0);
  holed.channels[1](4, 4) = 0.0;
  const Channel d = dark_channel(holed, 3);
  CHECK(d(3, 3) == 0.0);
  CHECK(d(5, 5) == 0.0);
  CHECK(d(0, 0) > 0.0);
  CHECK_THROWS_AS(dark_channel(img, 4), std::invalid_argument);
}

TEST_CASE("airlight estimate")
{
  PlanarImage flat({Channel::Constant(8, 8, 0.7), Channel::Constant(8, 8, 0.6), Channel::Constant(8, 8, 0.9)},
                   ColorSpace::RGB);
  const Airlight a = estimate_airlight(flat, oracle::random_matrix(8, 8, 1));
  CHECK(a[0] == doctest::Approx(0.7));
  CHECK(a[1] == doctest::Approx(0.6));
  CHECK(a[2] == doctest::Approx(0.9));

  // a far region where the scene is fully veiled
  const PlanarImage clear = random_rgb(64, 64, 40, 0.0, 0.6);
  Channel depth = Channel::Constant(64, 64, 0.2);
  depth.block(0, 0, 20, 64).setConstant(30.0);
  const Airlight planted{0.85, 0.8, 0.75};
  const PlanarImage hazy = synthesize_haze({clear, depth, 1.0, planted});
  const Airlight est = estimate_airlight(hazy, dark_channel(hazy, 15));
  for (int c = 0; c < 3; ++c)
    CHECK(std::abs(est[c] - planted[c]) < 0.02);

  // ties resolve to the first pixels in row-major order
  PlanarImage tie({Channel::Zero(40, 50), Channel::Zero(40, 50), Channel::Zero(40, 50)}, ColorSpace::RGB);
  tie.channels[0](0, 0) = 0.4;
  tie.channels[0](0, 1) = 0.6;
  const Channel flat_dark = Channel::Constant(40, 50, 0.5);
  const Airlight first = estimate_airlight(tie, flat_dark);
  CHECK(first[0] == doctest::Approx(0.5));
}

TEST_CASE("dark channel prior dehazing")
{
  double gain = 0.0;
  for (int i = 0; i < 5; ++i) {
    const ToyPair pair = toy_pair(64, 64, 300 + i);
    const DcpResult r = dcp_dehaze(pair.hazy);
    gain += psnr(r.dehazed, pair.clear) - psnr(pair.hazy, pair.clear);
    CHECK(r.transmission.minCoeff() >= kDefaultT0);

    // re-hazing with the estimates lands near the input
    const PlanarImage again = apply_haze(r.dehazed, r.transmission, r.airlight);
    double mae = 0.0;
    for (int c = 0; c < 3; ++c)
      mae += (again.channels[c] - pair.hazy.channels[c]).cwiseAbs().mean() / 3.0;
    CHECK(mae < 0.05);
  }
  CHECK(gain > 0.0);

  // a clear scene (some channel is zero at every pixel) with a white patch
  // for the airlight is left nearly alone
  PlanarImage clear = random_rgb(48, 48, 70);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x)
      clear.channels[(y + x) % 3](y, x) = 0.0;
  for (Channel& c : clear.channels)
    c.block(0, 0, 4, 4).setOnes();
  const DcpResult r = dcp_dehaze(clear);
  double mae = 0.0;
  for (int c = 0; c < 3; ++c)
    mae += (r.dehazed.channels[c] - clear.channels[c]).cwiseAbs().mean() / 3.0;
  CHECK(mae < 0.05);

  // transmission below t0 everywhere stays finite
  PlanarImage veil({Channel::Constant(20, 20, 0.8), Channel::Constant(20, 20, 0.8), Channel::Constant(20, 20, 0.8)},
                   ColorSpace::RGB);
  const DcpResult v = dcp_dehaze(veil, 0.1, 5);
  CHECK((v.transmission.array() == 0.1).all());
  for (const Channel& c : v.dehazed.channels)
    CHECK(c.allFinite());

  CHECK_THROWS_AS(dcp_dehaze(veil, 0.0), std::invalid_argument);
  PlanarImage black({Channel::Zero(8, 8), Channel::Zero(8, 8), Channel::Zero(8, 8)}, ColorSpace::RGB);
  CHECK_THROWS(dcp_dehaze(black));
}

TEST_CASE("synthetic depth")
{
  for (DepthKind kind : {DepthKind::Ramp, DepthKind::Radial, DepthKind::Smooth}) {
    const Channel d = synthetic_depth(16, 20, kind, 9, 3.0);
    CHECK(d.minCoeff() >= 0.0);
    CHECK(d.maxCoeff() <= 3.0 + 1e-12);
    CHECK((d.array() == synthetic_depth(16, 20, kind, 9, 3.0).array()).all());
  }
  const Channel ramp = synthetic_depth(10, 4, DepthKind::Ramp, 0, 1.0);
  CHECK(ramp(0, 0) > ramp(9, 0));
  CHECK(parse_depth_kind("radial") == DepthKind::Radial);
  CHECK_THROWS_AS(parse_depth_kind("flat"), std::invalid_argument);
}
