#include "krawtex/block_transform.hpp"

#include "krawtex/format.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace krawtex {

namespace {

constexpr int kB = BasisSet::kBlock;

void check_square(const Eigen::MatrixXd& g, const PolynomialMatrix& m1, const PolynomialMatrix& m2)
{
  if (g.rows() != m2.size() || g.cols() != m1.size())
    throw std::invalid_argument("moments: block is " + std::to_string(g.rows()) + "x" +
                                std::to_string(g.cols()) + ", polynomial matrices are " +
                                std::to_string(m2.size()) + "/" + std::to_string(m1.size()));
}

void check_same_layout(const FrequencyCube& a, const FrequencyCube& b)
{
  if (a.mode != b.mode || a.band_count() != b.band_count())
    throw std::invalid_argument("band stats: cubes differ in mode or band count");
  for (int k = 0; k < a.band_count(); ++k)
    if (a.maps[k].rows() != b.maps[k].rows() || a.maps[k].cols() != b.maps[k].cols())
      throw std::invalid_argument("band stats: cubes differ in shape");
}

} // namespace

Eigen::MatrixXd forward_moments(const Eigen::MatrixXd& block, const PolynomialMatrix& m1,
                                const PolynomialMatrix& m2)
{
  check_square(block, m1, m2);
  return m2.entries * block * m1.entries.transpose();
}

Eigen::MatrixXd inverse_moments(const Eigen::MatrixXd& coefficients, const PolynomialMatrix& m1,
                                const PolynomialMatrix& m2)
{
  check_square(coefficients, m1, m2);
  return m2.entries.transpose() * coefficients * m1.entries;
}

FrequencyCube kcl_apply(const Channel& channel, const BasisSet& basis, KclMode mode)
{
  if (channel.size() == 0)
    throw std::invalid_argument("kcl_apply: empty channel");
  const int h = static_cast<int>(channel.rows());
  const int w = static_cast<int>(channel.cols());
  const Eigen::MatrixXd& m = basis.matrix.entries;

  FrequencyCube cube;
  cube.ordering = basis.order;
  cube.mode = mode;
  cube.source_rows = h;
  cube.source_cols = w;

  if (mode == KclMode::Block) {
    const Channel padded = pad_symmetric(channel, round_up(h, kB), round_up(w, kB));
    const int by_count = static_cast<int>(padded.rows()) / kB;
    const int bx_count = static_cast<int>(padded.cols()) / kB;
    cube.maps.assign(BasisSet::kCount, Channel(by_count, bx_count));
    for (int by = 0; by < by_count; ++by)
      for (int bx = 0; bx < bx_count; ++bx) {
        const Eigen::MatrixXd q = m * padded.block(by * kB, bx * kB, kB, kB) * m.transpose();
        for (int k = 0; k < BasisSet::kCount; ++k)
          cube.maps[k](by, bx) = q(basis.order[k].first, basis.order[k].second);
      }
    return cube;
  }

  // Separable stride-1 correlation: filter k = outer(row i, row j), so first
  // correlate along x with row j, then along y with row i.
  const int lead = kSlidingAnchor;
  Channel padded = Channel::Zero(h + kB - 1, w + kB - 1);
  padded.block(lead, lead, h, w) = channel;

  std::vector<Channel> along_x(kB, Channel::Zero(h + kB - 1, w));
  for (int j = 0; j < kB; ++j)
    for (int b = 0; b < kB; ++b)
      along_x[j] += m(j, b) * padded.block(0, b, h + kB - 1, w);

  cube.maps.assign(BasisSet::kCount, Channel::Zero(h, w));
  for (int k = 0; k < BasisSet::kCount; ++k) {
    const auto [i, j] = basis.order[k];
    for (int a = 0; a < kB; ++a)
      cube.maps[k] += m(i, a) * along_x[j].block(a, 0, h, w);
  }
  return cube;
}

Channel ikcl_exact(const FrequencyCube& cube, const BasisSet& basis)
{
  if (cube.mode != KclMode::Block)
    throw std::invalid_argument("ikcl_exact: cube is not in block mode");
  if (cube.band_count() != BasisSet::kCount)
    throw std::invalid_argument("ikcl_exact: cube must hold 64 bands");
  const Eigen::MatrixXd& m = basis.matrix.entries;
  const int by_count = static_cast<int>(cube.maps[0].rows());
  const int bx_count = static_cast<int>(cube.maps[0].cols());
  Channel full(by_count * kB, bx_count * kB);
  Eigen::MatrixXd q(kB, kB);
  for (int by = 0; by < by_count; ++by)
    for (int bx = 0; bx < bx_count; ++bx) {
      for (int k = 0; k < BasisSet::kCount; ++k)
        q(cube.ordering[k].first, cube.ordering[k].second) = cube.maps[k](by, bx);
      full.block(by * kB, bx * kB, kB, kB) = m.transpose() * q * m;
    }
  return full.topLeftCorner(cube.source_rows, cube.source_cols);
}

Channel ikcl_sliding_exact(const FrequencyCube& cube, const BasisSet& basis)
{
  if (cube.mode != KclMode::Sliding)
    throw std::invalid_argument("ikcl_sliding_exact: cube is not in sliding mode");
  if (cube.band_count() != BasisSet::kCount)
    throw std::invalid_argument("ikcl_sliding_exact: cube must hold 64 bands");
  Channel out = Channel::Zero(cube.maps[0].rows(), cube.maps[0].cols());
  for (int k = 0; k < BasisSet::kCount; ++k)
    out += basis.filters[k](kSlidingAnchor, kSlidingAnchor) * cube.maps[k];
  return out;
}

CubeSplit split_cube(const FrequencyCube& cube, int split)
{
  if (split < 1 || split > cube.band_count() - 1)
    throw std::out_of_range("split_cube: T = " + std::to_string(split) + " outside 1.." +
                            std::to_string(cube.band_count() - 1));
  CubeSplit parts;
  parts.low.assign(cube.maps.begin(), cube.maps.begin() + split);
  parts.high.assign(cube.maps.begin() + split, cube.maps.end());
  parts.ordering = cube.ordering;
  parts.mode = cube.mode;
  parts.source_rows = cube.source_rows;
  parts.source_cols = cube.source_cols;
  return parts;
}

FrequencyCube merge_cube(const CubeSplit& parts)
{
  FrequencyCube cube;
  cube.maps = parts.low;
  cube.maps.insert(cube.maps.end(), parts.high.begin(), parts.high.end());
  cube.ordering = parts.ordering;
  cube.mode = parts.mode;
  cube.source_rows = parts.source_rows;
  cube.source_cols = parts.source_cols;
  return cube;
}

std::vector<BandStats> band_energy_stats(const FrequencyCube& hazy, const FrequencyCube& clear)
{
  BandStatsAccumulator acc;
  acc.add(hazy, clear);
  return acc.stats();
}

void BandStatsAccumulator::add(const FrequencyCube& hazy, const FrequencyCube& clear)
{
  check_same_layout(hazy, clear);
  if (sums_.empty()) {
    sums_.resize(hazy.band_count());
    for (int k = 0; k < hazy.band_count(); ++k) {
      sums_[k].band = k;
      sums_[k].i = hazy.ordering[k].first;
      sums_[k].j = hazy.ordering[k].second;
    }
  } else if (static_cast<int>(sums_.size()) != hazy.band_count()) {
    throw std::invalid_argument("band stats: band count changed between pairs");
  }
  for (int k = 0; k < hazy.band_count(); ++k) {
    const Channel diff = clear.maps[k] - hazy.maps[k];
    sums_[k].mean_abs_hazy += hazy.maps[k].cwiseAbs().sum();
    sums_[k].mean_abs_clear += clear.maps[k].cwiseAbs().sum();
    sums_[k].mean_diff += diff.sum();
    sums_[k].mean_abs_diff += diff.cwiseAbs().sum();
  }
  count_ += static_cast<double>(hazy.maps[0].size());
  ++pairs_;
}

std::vector<BandStats> BandStatsAccumulator::stats() const
{
  std::vector<BandStats> out = sums_;
  if (count_ > 0)
    for (auto& s : out) {
      s.mean_abs_hazy /= count_;
      s.mean_abs_clear /= count_;
      s.mean_diff /= count_;
      s.mean_abs_diff /= count_;
    }
  return out;
}

void write_band_stats_csv(std::ostream& os, const std::vector<BandStats>& stats)
{
  os << "band,i,j,mean_abs_hazy,mean_abs_clear,mean_diff\n";
  for (const auto& s : stats)
    os << s.band << ',' << s.i << ',' << s.j << ',' << format_real(s.mean_abs_hazy) << ','
       << format_real(s.mean_abs_clear) << ',' << format_real(s.mean_diff) << '\n';
}

} // namespace krawtex
