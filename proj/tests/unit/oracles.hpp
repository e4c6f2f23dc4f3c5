#pragma once

// Reference implementations kept deliberately naive and independent of the
// library code they check.

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace oracle {

// Term-by-term 2F1(-n, -x; -nm1; 1/p) in long double.
inline long double krawtchouk_series(int n, int x, int nm1, long double p)
{
  long double sum = 0.0L;
  long double term = 1.0L;
  for (int k = 0; k <= std::min(n, x); ++k) {
    sum += term;
    // ratio of consecutive terms: (k - n)(k - x) / ((k - nm1)(k + 1) p)
    term *= static_cast<long double>(k - n) * (k - x) / (static_cast<long double>(k - nm1) * (k + 1) * p);
  }
  return sum;
}

// Exact rational value of the series for p = num / den, accurate enough to
// judge relative errors far below double precision.
inline long double krawtchouk_exact(int n, int x, int nm1, int num, int den)
{
  using Int = __int128;
  const auto gcd = [](Int a, Int b) {
    a = a < 0 ? -a : a;
    while (b != 0) {
      const Int t = a % b;
      a = b;
      b = t < 0 ? -t : t;
    }
    return a;
  };
  Int sum_num = 0, sum_den = 1;
  Int term_num = 1, term_den = 1;
  for (int k = 0; k <= std::min(n, x); ++k) {
    const Int common = sum_den / gcd(sum_den, term_den) * term_den;
    sum_num = sum_num * (common / sum_den) + term_num * (common / term_den);
    sum_den = common;
    Int g = gcd(sum_num, sum_den);
    sum_num /= g;
    sum_den /= g;
    term_num *= static_cast<Int>(k - n) * (k - x) * den;
    term_den *= static_cast<Int>(k - nm1) * (k + 1) * num;
    if (term_den < 0) {
      term_num = -term_num;
      term_den = -term_den;
    }
    g = gcd(term_num, term_den);
    if (g != 0) {
      term_num /= g;
      term_den /= g;
    }
  }
  return static_cast<long double>(sum_num) / static_cast<long double>(sum_den);
}

inline long double binomial(int n, int k)
{
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

inline long double binomial_weight(int x, int nm1, long double p)
{
  return binomial(nm1, x) * std::pow(p, x) * std::pow(1.0L - p, nm1 - x);
}

// Squared norm ((1-p)/p)^n / C(nm1, n).
inline long double norm(int n, int nm1, long double p)
{
  return std::pow((1.0L - p) / p, n) / binomial(nm1, n);
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = u(rng);
  return m;
}

} // namespace oracle
