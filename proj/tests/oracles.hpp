#pragma once

// Test-only oracles that deliberately avoid the library's solution paths.

#include <cmath>
#include <vector>

#include "entswitch/ctmc.hpp"

namespace oracles {

inline double rel_diff(double a, double b) {
  const double scale = std::max({1e-30, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) / scale;
}

/// Stationary distribution by uniformization + power iteration:
/// P = I + Q/lambda is row-stochastic, and pi P = pi has the same fixed
/// point as pi Q = 0.  Independent of the Gaussian-elimination path.
inline std::vector<double> power_iteration_stationary(
    const entswitch::ctmc::MarkovChain& chain) {
  const int n = chain.size();
  const std::vector<double> q = chain.generator();
  double lambda = 0.0;
  for (int i = 0; i < n; ++i)
    lambda = std::max(lambda, -q[static_cast<std::size_t>(i) * n + i]);
  lambda *= 1.05;

  std::vector<double> p(q.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      p[static_cast<std::size_t>(i) * n + j] =
          (i == j ? 1.0 : 0.0) + q[static_cast<std::size_t>(i) * n + j] / lambda;

  std::vector<double> pi(n, 1.0 / n), next(n, 0.0);
  for (int iter = 0; iter < 400000; ++iter) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += pi[i] * p[static_cast<std::size_t>(i) * n + j];
      next[j] = acc;
    }
    double delta = 0.0, sum = 0.0;
    for (int j = 0; j < n; ++j) {
      delta = std::max(delta, std::fabs(next[j] - pi[j]));
      sum += next[j];
    }
    for (int j = 0; j < n; ++j) pi[j] = next[j] / sum;
    if (delta == 0.0) break;
  }
  return pi;
}

/// Intersection of y = s1 x + i1 and y = s2 x + i2.
inline std::pair<double, double> line_intersection(double s1, double i1,
                                                   double s2, double i2) {
  const double x = (i2 - i1) / (s1 - s2);
  return {x, s1 * x + i1};
}

}  // namespace oracles
