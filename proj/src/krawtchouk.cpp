#include "krawtex/krawtchouk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace krawtex {

namespace {

void check_index(int v, const KrawtchoukParams& params, const char* what)
{
  if (v < 0 || v > params.degree())
    throw std::out_of_range(std::string(what) + " = " + std::to_string(v) +
                            " outside 0.." + std::to_string(params.degree()));
}

double log_binomial(int n, int k)
{
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

} // namespace

KrawtchoukParams::KrawtchoukParams(double p, int size) : p_(p), size_(size)
{
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("krawtchouk: p must lie in (0, 1), got " + std::to_string(p));
  if (size < 2)
    throw std::invalid_argument("krawtchouk: support size must be >= 2, got " + std::to_string(size));
}

double pochhammer(double a, int k)
{
  if (k < 0)
    throw std::invalid_argument("pochhammer: k must be non-negative");
  double r = 1.0;
  for (int i = 0; i < k; ++i)
    r *= a + i;
  return r;
}

double hyp2f1_terminating(int n, int x, int nm1, double p)
{
  if (nm1 < 1 || n < 0 || x < 0 || n > nm1 || x > nm1)
    throw std::invalid_argument("hyp2f1_terminating: need 0 <= n, x <= nm1");
  // Alternating terms cancel heavily for small p, so accumulate in long double.
  long double sum = 0.0L;
  long double term = 1.0L;
  const int last = std::min(n, x);
  for (int k = 0; k <= last; ++k) {
    sum += term;
    if (k < last)
      term *= static_cast<long double>(k - n) * (k - x) / (static_cast<long double>(k - nm1) * (k + 1) * p);
  }
  return static_cast<double>(sum);
}

double krawtchouk_poly(int n, int x, const KrawtchoukParams& params)
{
  check_index(n, params, "order");
  check_index(x, params, "x");
  // Self-duality K_n(x) = K_x(n) keeps the recurrence as short as possible.
  const int order = std::min(n, x);
  const long double arg = std::max(n, x);
  const long double p = params.p();
  const long double q = 1.0L - p;
  const long double big_n = params.degree();

  // p(N-k) K_{k+1} = [p(N-k) + k(1-p) - x] K_k - k(1-p) K_{k-1}
  long double prev = 1.0L;
  if (order == 0)
    return 1.0;
  long double cur = 1.0L - arg / (p * big_n);
  for (int k = 1; k < order; ++k) {
    const long double a = p * (big_n - k);
    const long double next = ((a + k * q - arg) * cur - k * q * prev) / a;
    prev = cur;
    cur = next;
  }
  return static_cast<double>(cur);
}

double weight(int x, const KrawtchoukParams& params)
{
  check_index(x, params, "x");
  const int big_n = params.degree();
  const double p = params.p();
  return std::exp(log_binomial(big_n, x) + x * std::log(p) + (big_n - x) * std::log1p(-p));
}

double norm_rho(int n, const KrawtchoukParams& params)
{
  check_index(n, params, "order");
  // (-1)^n ((1-p)/p)^n n! / (-N)_n  ==  ((1-p)/p)^n / C(N, n)
  const double p = params.p();
  return std::exp(n * (std::log1p(-p) - std::log(p)) - log_binomial(params.degree(), n));
}

PolynomialMatrix polynomial_matrix(const KrawtchoukParams& params)
{
  const int size = params.size();
  const int big_n = params.degree();
  const double p = params.p();
  const double q = 1.0 - p;
  const int rows = big_n / 2 + 1;

  // Orthonormal form of the three-term recurrence, so the normalization is
  // carried by the starting row and never applied again. Only the first
  // half of the rows is computed: past it the recurrence loses accuracy at
  // the extreme columns.
  Eigen::MatrixXd head(rows, size);
  for (int x = 0; x < size; ++x)
    head(0, x) = std::sqrt(weight(x, params));
  for (int n = 0; n + 1 < rows; ++n) {
    const double alpha = 1.0 / std::sqrt(p * q * (n + 1.0) * (big_n - n));
    const double beta = n == 0 ? 0.0 : std::sqrt(n * (big_n - n + 1.0) / ((n + 1.0) * (big_n - n)));
    for (int x = 0; x < size; ++x) {
      const double a = p * (big_n - n) + n * q - x;
      double v = alpha * a * head(n, x);
      if (n > 0)
        v -= beta * head(n - 1, x);
      head(n + 1, x) = v;
    }
  }

  // The weighted matrix is symmetric, M(n, x) = M(x, n), and satisfies
  // M(n, x) = (-1)^(N+n+x) M(N-n, N-x). Every entry is read from whichever
  // of its four images has the smallest row index.
  Eigen::MatrixXd m(size, size);
  for (int n = 0; n < size; ++n)
    for (int x = 0; x < size; ++x) {
      const int rn = big_n - n;
      const int rx = big_n - x;
      const int row = std::min({n, x, rn, rx});
      const double sign = (big_n + n + x) % 2 == 0 ? 1.0 : -1.0;
      if (row == n)
        m(n, x) = head(n, x);
      else if (row == x)
        m(n, x) = head(x, n);
      else if (row == rn)
        m(n, x) = sign * head(rn, rx);
      else
        m(n, x) = sign * head(rx, rn);
    }
  return PolynomialMatrix{std::move(m), params};
}

std::vector<IndexPair> zigzag_order(int n)
{
  if (n < 1)
    throw std::invalid_argument("zigzag_order: n must be positive");
  std::vector<IndexPair> order;
  order.reserve(static_cast<std::size_t>(n) * n);
  for (int s = 0; s <= 2 * (n - 1); ++s) {
    const int lo = std::max(0, s - (n - 1));
    const int hi = std::min(s, n - 1);
    if (s % 2 == 0) {
      // even diagonals run bottom-left to top-right
      for (int i = hi; i >= lo; --i)
        order.emplace_back(i, s - i);
    } else {
      for (int i = lo; i <= hi; ++i)
        order.emplace_back(i, s - i);
    }
  }
  return order;
}

int BasisSet::band_of(int i, int j) const
{
  const auto it = std::find(order.begin(), order.end(), IndexPair{i, j});
  if (it == order.end())
    throw std::out_of_range("basis: index pair outside the 8x8 grid");
  return static_cast<int>(it - order.begin());
}

BasisSet basis_set(const KrawtchoukParams& params)
{
  if (params.size() != BasisSet::kBlock)
    throw std::invalid_argument("basis_set: filters are 8x8, got N = " + std::to_string(params.size()));
  BasisSet basis{{}, zigzag_order(BasisSet::kBlock), polynomial_matrix(params)};
  basis.filters.reserve(BasisSet::kCount);
  for (const auto& [i, j] : basis.order) {
    const Eigen::VectorXd ki = basis.matrix.entries.row(i).transpose();
    const Eigen::VectorXd kj = basis.matrix.entries.row(j).transpose();
    basis.filters.push_back(ki * kj.transpose());
  }
  return basis;
}

} // namespace krawtex
