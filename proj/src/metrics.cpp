#include "krawtex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace krawtex {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void check_same(const PlanarImage& a, const PlanarImage& b)
{
  a.validate();
  b.validate();
  if (a.channel_count() != b.channel_count() || a.height() != b.height() || a.width() != b.width())
    throw std::invalid_argument("metrics: images differ in shape");
}

Eigen::VectorXd gaussian_window()
{
  Eigen::VectorXd g(kWindow);
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g(i) = std::exp(-d * d / (2.0 * kSigma * kSigma));
  }
  return g / g.sum();
}

// Separable Gaussian filter keeping only fully-inside windows.
Channel filter_valid(const Channel& c, const Eigen::VectorXd& g)
{
  const int h = static_cast<int>(c.rows()) - kWindow + 1;
  const int w = static_cast<int>(c.cols()) - kWindow + 1;
  Channel tmp = Channel::Zero(c.rows(), w);
  for (int k = 0; k < kWindow; ++k)
    tmp += g(k) * c.middleCols(k, w);
  Channel out = Channel::Zero(h, w);
  for (int k = 0; k < kWindow; ++k)
    out += g(k) * tmp.middleRows(k, h);
  return out;
}

} // namespace

double psnr(const Channel& pred, const Channel& gt, double peak)
{
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols() || pred.size() == 0)
    throw std::invalid_argument("psnr: images differ in shape");
  const double mse = (pred - gt).squaredNorm() / static_cast<double>(pred.size());
  if (mse == 0.0)
    return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double psnr(const PlanarImage& pred, const PlanarImage& gt, double peak)
{
  check_same(pred, gt);
  double sq = 0.0;
  double n = 0.0;
  for (int c = 0; c < pred.channel_count(); ++c) {
    sq += (pred.channels[c] - gt.channels[c]).squaredNorm();
    n += static_cast<double>(pred.channels[c].size());
  }
  const double mse = sq / n;
  if (mse == 0.0)
    return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const Channel& pred, const Channel& gt)
{
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw std::invalid_argument("ssim: images differ in shape");
  if (pred.rows() < kWindow || pred.cols() < kWindow)
    throw std::invalid_argument("ssim: images must be at least 11x11");
  const Eigen::VectorXd g = gaussian_window();
  const Channel mu_x = filter_valid(pred, g);
  const Channel mu_y = filter_valid(gt, g);
  const Channel xx = filter_valid(pred.cwiseProduct(pred), g);
  const Channel yy = filter_valid(gt.cwiseProduct(gt), g);
  const Channel xy = filter_valid(pred.cwiseProduct(gt), g);

  const auto mx = mu_x.array();
  const auto my = mu_y.array();
  const auto sxx = xx.array() - mx * mx;
  const auto syy = yy.array() - my * my;
  const auto sxy = xy.array() - mx * my;
  const Eigen::ArrayXXd map = ((2.0 * mx * my + kC1) * (2.0 * sxy + kC2)) /
                              ((mx * mx + my * my + kC1) * (sxx + syy + kC2));
  return map.mean();
}

double ssim(const PlanarImage& pred, const PlanarImage& gt)
{
  check_same(pred, gt);
  double sum = 0.0;
  for (int c = 0; c < pred.channel_count(); ++c)
    sum += ssim(pred.channels[c], gt.channels[c]);
  return sum / pred.channel_count();
}

MetricReport evaluate_pair(const PlanarImage& pred, const PlanarImage& gt)
{
  return MetricReport{psnr(pred, gt), ssim(pred, gt)};
}

} // namespace krawtex
