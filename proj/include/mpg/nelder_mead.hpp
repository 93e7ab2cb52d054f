#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mpg/types.hpp"

namespace mpg {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  std::size_t iterations = 0;
};

/// Downhill-simplex minimization. Deterministic for a deterministic
/// objective; suited to noisy objectives evaluated with common random
/// numbers.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& x0, double radius,
                             std::size_t max_iters, double tol) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(n) + 1, x0);
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) + 1][i] += radius;
  std::vector<double> fx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) fx[i] = f(x[i]);

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto sort_simplex = [&]() {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
  };

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  std::size_t it = 0;
  for (; it < max_iters; ++it) {
    sort_simplex();
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    if (fx[worst] - fx[best] <= tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += x[order[i]];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + kReflect * (centroid - x[worst]);
    const double fr = f(xr);
    if (fr < fx[best]) {
      const Eigen::VectorXd xe = centroid + kExpand * (xr - centroid);
      const double fe = f(xe);
      if (fe < fr) {
        x[worst] = xe;
        fx[worst] = fe;
      } else {
        x[worst] = xr;
        fx[worst] = fr;
      }
    } else if (fr < fx[second]) {
      x[worst] = xr;
      fx[worst] = fr;
    } else {
      const bool outside = fr < fx[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + kContract * (xr - centroid))
                                         : Eigen::VectorXd(centroid + kContract * (x[worst] - centroid));
      const double fc = f(xc);
      if (fc < (outside ? fr : fx[worst])) {
        x[worst] = xc;
        fx[worst] = fc;
      } else {
        for (std::size_t i = 1; i < order.size(); ++i) {
          x[order[i]] = x[best] + kShrink * (x[order[i]] - x[best]);
          fx[order[i]] = f(x[order[i]]);
        }
      }
    }
  }
  sort_simplex();
  return {x[order.front()], fx[order.front()], it};
}

}  // namespace mpg
