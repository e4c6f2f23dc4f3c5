#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace krawtex {

/// Binomial parameter p and support size N of a Krawtchouk family.
///
/// Polynomials of order n = 0..N-1 are evaluated on x = 0..N-1, i.e. the
/// classical family K_n(x; p, N-1). The pair is fixed at construction.
class KrawtchoukParams {
public:
  KrawtchoukParams(double p, int size);

  double p() const noexcept { return p_; }
  int size() const noexcept { return size_; }
  /// Upper end of the support, N-1.
  int degree() const noexcept { return size_ - 1; }

  bool operator==(const KrawtchoukParams&) const = default;

private:
  double p_;
  int size_;
};

/// Rising factorial a(a+1)...(a+k-1); 1 for k == 0.
double pochhammer(double a, int k);

/// 2F1(-n, -x; -nm1; 1/p) summed term by term over k = 0..min(n, x).
/// Rejects n > nm1 or x > nm1, where the series is not well defined.
double hyp2f1_terminating(int n, int x, int nm1, double p);

/// Classical polynomial K_n(x; p, N-1), evaluated with the three-term
/// recurrence in n.
double krawtchouk_poly(int n, int x, const KrawtchoukParams& params);

/// Binomial weight C(N-1, x) p^x (1-p)^(N-1-x).
double weight(int x, const KrawtchoukParams& params);

/// Squared norm of K_n under the binomial weight.
double norm_rho(int n, const KrawtchoukParams& params);

/// Row n, column x holds the weighted polynomial sqrt(w(x)/rho(n)) K_n(x).
/// Rows are orthonormal.
struct PolynomialMatrix {
  Eigen::MatrixXd entries;
  KrawtchoukParams params;

  int size() const noexcept { return params.size(); }
};

PolynomialMatrix polynomial_matrix(const KrawtchoukParams& params);

/// (row, column) index into an n x n coefficient grid.
using IndexPair = std::pair<int, int>;

/// JPEG zig-zag traversal of an n x n grid, starting (0,0),(0,1),(1,0),(2,0).
std::vector<IndexPair> zigzag_order(int n = 8);

/// The 64 separable 8x8 basis filters, outer(row i, row j) of the weighted
/// polynomial matrix, listed in zig-zag order of (i, j).
struct BasisSet {
  static constexpr int kBlock = 8;
  static constexpr int kCount = kBlock * kBlock;

  std::vector<Eigen::MatrixXd> filters;
  std::vector<IndexPair> order;
  PolynomialMatrix matrix;

  const KrawtchoukParams& params() const noexcept { return matrix.params; }
  /// Position of (i, j) in the zig-zag order.
  int band_of(int i, int j) const;
};

BasisSet basis_set(const KrawtchoukParams& params);

} // namespace krawtex
