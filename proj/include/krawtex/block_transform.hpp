#pragma once

#include "krawtex/image.hpp"
#include "krawtex/krawtchouk.hpp"

#include <iosfwd>
#include <vector>

namespace krawtex {

/// Forward moments Q = M2 * G * M1^T of a square block. M2 acts on rows (y),
/// M1 on columns (x).
Eigen::MatrixXd forward_moments(const Eigen::MatrixXd& block, const PolynomialMatrix& m1,
                                const PolynomialMatrix& m2);

/// Reconstruction G = M2^T * Q * M1.
Eigen::MatrixXd inverse_moments(const Eigen::MatrixXd& coefficients, const PolynomialMatrix& m1,
                                const PolynomialMatrix& m2);

enum class KclMode {
  /// Non-overlapping 8x8 blocks; one coefficient per block and band.
  Block,
  /// Stride-1 correlation with zero `same` padding; maps keep the input size.
  Sliding,
};

/// Row/column offset of the window anchor in stride-1 mode: map position
/// (y, x) sees pixels y-3..y+4 and x-3..x+4.
inline constexpr int kSlidingAnchor = 3;

/// The 64 coefficient maps of one channel, low to high frequency.
struct FrequencyCube {
  std::vector<Channel> maps;
  std::vector<IndexPair> ordering;
  KclMode mode = KclMode::Block;
  /// Size of the analysed channel before any padding.
  int source_rows = 0;
  int source_cols = 0;

  int band_count() const noexcept { return static_cast<int>(maps.size()); }
};

FrequencyCube kcl_apply(const Channel& channel, const BasisSet& basis, KclMode mode);

/// Exact inverse of block-mode analysis, cropped to the source size.
Channel ikcl_exact(const FrequencyCube& cube, const BasisSet& basis);

/// Exact inverse of stride-1 analysis: every pixel is rebuilt from the window
/// it anchors, X(y,x) = sum_k maps[k](y,x) * filters[k](3,3).
Channel ikcl_sliding_exact(const FrequencyCube& cube, const BasisSet& basis);

/// Low bands 0..T-1 and high bands T..63 of a cube.
struct CubeSplit {
  std::vector<Channel> low;
  std::vector<Channel> high;
  std::vector<IndexPair> ordering;
  KclMode mode = KclMode::Block;
  int source_rows = 0;
  int source_cols = 0;
};

CubeSplit split_cube(const FrequencyCube& cube, int split);
FrequencyCube merge_cube(const CubeSplit& parts);

struct BandStats {
  int band = 0;
  int i = 0;
  int j = 0;
  double mean_abs_hazy = 0.0;
  double mean_abs_clear = 0.0;
  /// mean(clear - hazy)
  double mean_diff = 0.0;
  /// mean|clear - hazy|
  double mean_abs_diff = 0.0;
};

std::vector<BandStats> band_energy_stats(const FrequencyCube& hazy, const FrequencyCube& clear);

/// Pools band statistics over many image pairs, weighting by coefficient count.
class BandStatsAccumulator {
public:
  void add(const FrequencyCube& hazy, const FrequencyCube& clear);
  std::vector<BandStats> stats() const;
  int pairs() const noexcept { return pairs_; }

private:
  std::vector<BandStats> sums_;
  double count_ = 0.0;
  int pairs_ = 0;
};

/// `band,i,j,mean_abs_hazy,mean_abs_clear,mean_diff`, one row per band.
void write_band_stats_csv(std::ostream& os, const std::vector<BandStats>& stats);

} // namespace krawtex
