#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include "mpg/rng.hpp"
#include "mpg/tangent_chart.hpp"

namespace mpg {

/// Sample count and seed for Monte Carlo renormalization.
struct McConfig {
  std::size_t samples = 10000;
  std::uint64_t seed = 0x6E6F726Dull;
};

/// Monte Carlo estimate of a normalization constant with its standard error.
struct NormEstimate {
  double value = 1.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Gaussian N(mu, sigma) on a tangent chart, pushed to the rigid motions by
/// the central projection and renormalized. The normalization constant C is
/// estimated once by importance sampling and cached.
///
/// A PG is in class PG0 when the rotation part of mu is exactly zero.
class ProjectedGaussian {
 public:
  /// Validates sigma (symmetry, eigenvalues >= -1e-9, jitter +1e-9 I when the
  /// smallest eigenvalue is nonpositive) and adopts a precomputed
  /// normalization. Use pg_new to also run the Monte Carlo normalization.
  static ProjectedGaussian from_parts(const TangentChart& chart, const Vec6& mu,
                                      const Mat6& sigma, const NormEstimate& norm) {
    if ((sigma - sigma.transpose()).lpNorm<Eigen::Infinity>() > 1e-12)
      throw NonSymmetric("covariance is not symmetric");
    Mat6 s = 0.5 * (sigma + sigma.transpose());
    Eigen::SelfAdjointEigenSolver<Mat6> eig(s);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -1e-9) throw NotPositiveDefinite("covariance has eigenvalue " + std::to_string(min_eig));
    if (min_eig <= 0.0) s += (1e-9 + std::max(0.0, -min_eig)) * Mat6::Identity();
    Eigen::LLT<Mat6> llt(s);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Cholesky factorization failed");
    if (norm.value <= 0.0) throw Error("normalization constant must be positive");

    ProjectedGaussian pg(chart);
    pg.mu_ = mu;
    pg.sigma_ = s;
    pg.chol_ = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < 6; ++i) log_det += 2.0 * std::log(pg.chol_(i, i));
    pg.log_gauss_norm_ = -3.0 * std::log(2.0 * M_PI) - 0.5 * log_det;
    pg.norm_ = norm;
    return pg;
  }

  const TangentChart& chart() const { return chart_; }
  const Vec6& mu() const { return mu_; }
  const Mat6& sigma() const { return sigma_; }
  /// Lower Cholesky factor of sigma.
  const Mat6& chol() const { return chol_; }
  double norm_const() const { return norm_.value; }
  const NormEstimate& normalization() const { return norm_; }

  bool in_pg0() const { return mu_.head<3>().isZero(0.0); }

  /// log N(y; mu, sigma) of the chart Gaussian.
  double log_gauss_density(const Vec6& y) const {
    const Vec6 r = chol_.triangularView<Eigen::Lower>().solve(y - mu_);
    return log_gauss_norm_ - 0.5 * r.squaredNorm();
  }

 private:
  explicit ProjectedGaussian(const TangentChart& chart) : chart_(chart) {}

  TangentChart chart_;
  Vec6 mu_ = Vec6::Zero();
  Mat6 sigma_ = Mat6::Identity();
  Mat6 chol_ = Mat6::Identity();
  double log_gauss_norm_ = 0.0;
  NormEstimate norm_;
};

namespace detail {

/// Importance-sampling estimate of C: the average over y ~ N(mu, sigma) of
/// the central-projection area element (1 + u^2+v^2+w^2)^-2 times the
/// two-sheet factor 2. Sample i draws from substream(seed, i), so the result
/// does not depend on how the loop is sharded.
inline NormEstimate normalize_mc(const Vec6& mu, const Mat6& chol_lower, std::size_t n,
                                 std::uint64_t seed) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::substream(seed, i);
    const Vec6 y = mu + chol_lower.triangularView<Eigen::Lower>() * rng.normal6();
    const double t = 1.0 + y.head<3>().squaredNorm();
    const double w = 2.0 / (t * t);
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  if (n > 1) var = std::max(0.0, (sum_sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1));
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

inline Mat6 symmetrized(const Mat6& m) { return 0.5 * (m + m.transpose()); }

}  // namespace detail

/// Builds a PG and computes its normalization constant.
inline ProjectedGaussian pg_new(const TangentChart& chart, const Vec6& mu, const Mat6& sigma,
                                const McConfig& mc = {}) {
  if (mc.samples < 1000) throw Error("mc_normalize requires at least 1000 samples");
  ProjectedGaussian pg = ProjectedGaussian::from_parts(chart, mu, sigma, {1.0, 0.0, 0});
  const NormEstimate norm = detail::normalize_mc(pg.mu(), pg.chol(), mc.samples, mc.seed);
  return ProjectedGaussian::from_parts(pg.chart(), pg.mu(), pg.sigma(), norm);
}

/// Re-estimates the normalization constant of an existing PG.
inline NormEstimate mc_normalize(const ProjectedGaussian& pg, std::size_t n, std::uint64_t seed) {
  if (n < 1000) throw Error("mc_normalize requires at least 1000 samples");
  return detail::normalize_mc(pg.mu(), pg.chol(), n, seed);
}

/// Density of the projected Gaussian at a rigid motion; zero on the guard
/// band around the chart equator (smooth completion).
inline double pg_density(const ProjectedGaussian& pg, const RigidMotion& m) {
  const auto y = try_lift(pg.chart(), m);
  if (!y) return 0.0;
  return std::exp(pg.log_gauss_density(*y)) / pg.norm_const();
}

/// Draws a rigid motion: Box-Muller normals on the chart, then projection.
inline RigidMotion pg_sample(const ProjectedGaussian& pg, Rng& rng) {
  const Vec6 y = pg.mu() + pg.chol().triangularView<Eigen::Lower>() * rng.normal6();
  return project(pg.chart(), y);
}

/// Mode of the PG as a rigid motion.
inline RigidMotion pg_mode(const ProjectedGaussian& pg) { return project(pg.chart(), pg.mu()); }

/// Mean and covariance re-expressed in another chart (mean through the
/// transition, covariance through its Jacobian at the mean). No angle check.
inline std::pair<Vec6, Mat6> restate_moments(const ProjectedGaussian& pg,
                                             const TangentChart& target) {
  if (same_chart(pg.chart(), target)) return {pg.mu(), pg.sigma()};
  const Vec6 mu = transition(pg.chart(), target, pg.mu());
  const Mat6 J = transition_jacobian(pg.chart(), target, pg.mu());
  return {mu, detail::symmetrized(J * pg.sigma() * J.transpose())};
}

/// Restates a PG on a nearby chart and renormalizes.
inline ProjectedGaussian pg_restate(const ProjectedGaussian& pg, const TangentChart& target,
                                    const McConfig& mc = {},
                                    double max_angle = kDefaultFusionAngle) {
  if (chart_angle(pg.chart(), target) >= max_angle)
    throw ChartsTooFarApart("chart angle exceeds the restatement threshold");
  const auto [mu, sigma] = restate_moments(pg, target);
  return pg_new(target, mu, sigma, mc);
}

namespace detail {

struct Recentered {
  TangentChart chart;
  Vec6 mu;
  Mat6 sigma;
};

/// Moves the chart to the rotation of the projected mean so that the rotation
/// part of the mean becomes exactly zero. Translation is untouched.
inline Recentered recenter_moments(const TangentChart& chart, const Vec6& mu, const Mat6& sigma) {
  if (mu.head<3>().isZero(0.0)) return {chart, mu, sigma};
  const TangentChart target = chart_at(project(chart, mu).rotation());
  Vec6 mu2 = transition(chart, target, mu);
  mu2.head<3>().setZero();
  const Mat6 J = transition_jacobian(chart, target, mu);
  return {target, mu2, symmetrized(J * sigma * J.transpose())};
}

}  // namespace detail

/// Re-centers a PG into PG0 (chart at its own rotational mean). A PG already
/// in PG0 is returned unchanged, normalization included.
inline ProjectedGaussian pg_recenter(const ProjectedGaussian& pg, const McConfig& mc = {}) {
  if (pg.in_pg0()) return pg;
  const auto r = detail::recenter_moments(pg.chart(), pg.mu(), pg.sigma());
  return pg_new(r.chart, r.mu, r.sigma, mc);
}

/// Chart at the renormalized midpoint of two tangent points (antipodal fold
/// applied), in canonical sign. Throws when the folded angle is not below
/// max_angle.
inline TangentChart common_chart(const TangentChart& a, const TangentChart& b,
                                 double max_angle = kDefaultFusionAngle) {
  if (chart_angle(a, b) >= max_angle)
    throw ChartsTooFarApart("tangent points are " + std::to_string(chart_angle(a, b)) +
                            " rad apart, threshold " + std::to_string(max_angle));
  const double s = dot(a.q0(), b.q0()) >= 0.0 ? 1.0 : -1.0;
  const Quaternion mid = a.q0().as_quaternion() + b.q0().as_quaternion() * s;
  return TangentChart(canonical_sign(UnitQuaternion(mid)));
}

/// Information fusion of two PGs describing the same pose. Both inputs are
/// restated to the midpoint chart, fused in information form, re-centered to
/// PG0 and renormalized.
inline ProjectedGaussian pg_fuse(const ProjectedGaussian& p1, const ProjectedGaussian& p2,
                                 const McConfig& mc = {},
                                 double max_angle = kDefaultFusionAngle) {
  const TangentChart chart3 = common_chart(p1.chart(), p2.chart(), max_angle);
  const auto [mu1, s1] = restate_moments(p1, chart3);
  const auto [mu2, s2] = restate_moments(p2, chart3);
  const Mat6 info1 = s1.llt().solve(Mat6::Identity());
  const Mat6 info2 = s2.llt().solve(Mat6::Identity());
  const Eigen::LLT<Mat6> info(info1 + info2);
  const Mat6 sigma3 = detail::symmetrized(info.solve(Mat6::Identity()));
  const Vec6 mu3 = info.solve(info1 * mu1 + info2 * mu2);
  const auto r = detail::recenter_moments(chart3, mu3, sigma3);
  return pg_new(r.chart, r.mu, r.sigma, mc);
}

/// Density of the composed motion (sample of p2) * (sample of p1). Inputs are
/// re-centered to PG0 first; the result lives on the chart at q2*q1 with the
/// covariance propagated through the composition Jacobian linearized at the
/// input means.
inline ProjectedGaussian pg_compose(const ProjectedGaussian& p2, const ProjectedGaussian& p1,
                                    const McConfig& mc = {}) {
  const ProjectedGaussian a = p2.in_pg0() ? p2 : pg_recenter(p2, mc);
  const ProjectedGaussian b = p1.in_pg0() ? p1 : pg_recenter(p1, mc);
  const TangentChart chart3 = composition_chart(a.chart(), b.chart());

  const Mat6x12 J = composition_jacobian_at(a.chart(), b.chart(), a.mu(), b.mu());
  Mat12 joint = Mat12::Zero();
  joint.topLeftCorner<6, 6>() = a.sigma();
  joint.bottomRightCorner<6, 6>() = b.sigma();
  const Mat6 sigma3 = detail::symmetrized(J * joint * J.transpose());

  Vec6 mu3 = lift(chart3, pg_mode(a) * pg_mode(b));
  if (mu3.head<3>().lpNorm<Eigen::Infinity>() > 1e-9)
    throw std::logic_error("composed mean has a nonzero rotation part");
  mu3.head<3>().setZero();
  return pg_new(chart3, mu3, sigma3, mc);
}

}  // namespace mpg
