#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "mpg/mixture.hpp"
#include "mpg/nelder_mead.hpp"

namespace mpg {

/// Axis-aligned tolerance box in the chart at its (transformed) center:
/// three rotation-coordinate half widths and three translation half widths.
struct ToleranceBox {
  RigidMotion center;
  Vec6 half_widths;

  ToleranceBox(const RigidMotion& c, const Vec6& hw) : center(c), half_widths(hw) {
    if (!(hw.minCoeff() > 0.0)) throw Error("box half_widths must be positive");
  }
};

struct ProbabilityEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

namespace detail {

inline bool in_box(const TangentChart& chart, const Vec3& center_translation, const Vec6& hw,
                   const RigidMotion& m) {
  const auto y = try_lift(chart, m);
  if (!y) return false;
  for (int i = 0; i < 3; ++i)
    if (std::abs((*y)[i]) > hw[i]) return false;
  for (int i = 0; i < 3; ++i)
    if (std::abs((*y)[3 + i] - center_translation[i]) > hw[3 + i]) return false;
  return true;
}

inline ProbabilityEstimate box_fraction(const std::vector<RigidMotion>& samples,
                                        const ToleranceBox& box, const RigidMotion& box_center) {
  const TangentChart chart = chart_at(box_center.rotation());
  const Vec3 tc = box_center.translation();
  std::size_t hits = 0;
  for (const auto& m : samples)
    if (in_box(chart, tc, box.half_widths, m)) ++hits;
  const double n = static_cast<double>(samples.size());
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(std::max(0.0, p * (1.0 - p)) / n)};
}

}  // namespace detail

/// Probability mass of the mixture inside transform(box), with the box
/// membership tested in the chart at the transformed box center. Returns the
/// Monte Carlo fraction and its binomial standard error.
inline ProbabilityEstimate box_probability(const Mpg& m, const ToleranceBox& box,
                                           const RigidMotion& transform, std::size_t n,
                                           std::uint64_t seed) {
  if (n < 1000) throw Error("box_probability requires at least 1000 samples");
  Rng rng(seed);
  std::vector<RigidMotion> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) samples.push_back(mpg_sample(m, rng));
  return detail::box_fraction(samples, box, transform * box.center);
}

struct GraspConfig {
  std::size_t mc_samples = 10000;
  std::uint64_t seed = 0x67726173ull;
  std::size_t max_iters = 120;
  double simplex_radius = 0.1;
  double tol = 1e-4;
  /// starts are placed at the modes of the highest-weight components
  std::size_t max_starts = 8;
};

/// Multi-start derivative-free search for the transform maximizing the box
/// probability. A fixed sample set is drawn once and reused for every
/// objective evaluation (common random numbers), so the search is
/// deterministic per seed and the returned probability is never below the
/// probability at any start.
inline std::pair<RigidMotion, double> grasp_optimize(const Mpg& m, const ToleranceBox& box,
                                                     const GraspConfig& cfg = {}) {
  Rng rng(cfg.seed);
  std::vector<RigidMotion> samples;
  samples.reserve(cfg.mc_samples);
  for (std::size_t i = 0; i < cfg.mc_samples; ++i) samples.push_back(mpg_sample(m, rng));

  std::vector<std::size_t> order(m.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return m[a].weight > m[b].weight; });
  const std::size_t starts = std::min(cfg.max_starts, order.size());

  bool have_best = false;
  RigidMotion best_center;
  double best_p = -1.0;

  for (std::size_t s = 0; s < starts; ++s) {
    // search over the 6 chart coordinates of the transformed box center
    // around the component mode
    const RigidMotion c0 = pg_mode(m[order[s]].pg);
    const TangentChart base = chart_at(c0.rotation());
    auto center_of = [&](const Eigen::VectorXd& y) {
      TangentCoords c;
      c.head<3>() = y.head<3>();
      c.tail<3>() = c0.translation() + y.tail<3>();
      return project(base, c);
    };
    auto objective = [&](const Eigen::VectorXd& y) {
      return -detail::box_fraction(samples, box, center_of(y)).value;
    };
    const auto res = nelder_mead(objective, Eigen::VectorXd::Zero(6), cfg.simplex_radius,
                                 cfg.max_iters, cfg.tol);
    const RigidMotion center = center_of(res.x);
    const double p = -res.value;
    if (!have_best || p > best_p) {
      have_best = true;
      best_p = p;
      best_center = center;
    }
  }
  return {best_center * box.center.inverse(), best_p};
}

}  // namespace mpg
