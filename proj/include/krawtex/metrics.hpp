#pragma once

#include "krawtex/image.hpp"

namespace krawtex {

/// PSNR reported for identical images.
inline constexpr double kPsnrCap = 100.0;

/// 10 log10(peak^2 / MSE), capped at kPsnrCap.
double psnr(const Channel& pred, const Channel& gt, double peak = 1.0);
/// MSE pooled over every channel.
double psnr(const PlanarImage& pred, const PlanarImage& gt, double peak = 1.0);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), k1 = 0.01,
/// k2 = 0.03, dynamic range 1, averaged over fully-inside windows.
double ssim(const Channel& pred, const Channel& gt);
/// Mean of the per-channel SSIM values.
double ssim(const PlanarImage& pred, const PlanarImage& gt);

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
};

MetricReport evaluate_pair(const PlanarImage& pred, const PlanarImage& gt);

} // namespace krawtex
