#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "mpg/rigid_motion.hpp"

namespace mpg {

/// Fusion and restatement require tangent points within this angle
/// (after the antipodal fold).
inline const double kDefaultFusionAngle = 15.0 * M_PI / 180.0;

/// Rotations closer than 5 degrees to the chart equator are rejected by lift;
/// the central projection blows up there.
inline const double kOrthogonalityGuard = std::sin(5.0 * M_PI / 180.0);

/// Finite-difference step for chart Jacobians.
inline constexpr double kJacobianStep = 1e-6;

/// Chart coordinates (u, v, w, x, y, z): three rotation coordinates on the
/// tangent plane at q0 and three translation coordinates.
using TangentCoords = Vec6;

/// 6D chart of the rigid motions: the tangent plane to the unit-quaternion
/// sphere at q0 with orthonormal basis b_i = q0 * e_i, times the translation
/// space. b1 coincides with q0; {b2, b3, b4} span the tangent plane.
class TangentChart {
 public:
  explicit TangentChart(const UnitQuaternion& q0) : q0_(q0) {
    static const Quaternion e[4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    for (int i = 0; i < 4; ++i) basis_.col(i) = (q0.as_quaternion() * e[i]).coeffs();
  }

  const UnitQuaternion& q0() const { return q0_; }
  /// Columns are b1..b4.
  const Mat4& basis() const { return basis_; }

 private:
  UnitQuaternion q0_;
  Mat4 basis_;
};

inline TangentChart chart_at(const UnitQuaternion& q0) { return TangentChart(q0); }

inline TangentChart chart_at(const Quaternion& q0) {
  if (std::abs(q0.norm() - 1.0) > kUnitTolerance)
    throw NonUnitTangentPoint("tangent point norm " + std::to_string(q0.norm()) + " is not 1");
  return TangentChart(UnitQuaternion(q0));
}

/// True when both charts sit at coefficientwise identical tangent points.
inline bool same_chart(const TangentChart& a, const TangentChart& b) {
  return (a.q0().coeffs() - b.q0().coeffs()).isZero(0.0);
}

/// Central projection of chart coordinates to a rigid motion:
/// rotation (b1 + u b2 + v b3 + w b4)/sqrt(1+u^2+v^2+w^2), translation (x,y,z).
inline RigidMotion project(const TangentChart& chart, const TangentCoords& c) {
  const Vec4 v = chart.basis() * Vec4(1.0, c[0], c[1], c[2]);
  return {UnitQuaternion(Quaternion::from_coeffs(v)), c.tail<3>()};
}

/// lift without the orthogonality guard error; empty when the rotation is
/// within the guard band around the chart equator.
inline std::optional<TangentCoords> try_lift(const TangentChart& chart, const RigidMotion& m) {
  const Vec4 p = chart.basis().transpose() * m.rotation().coeffs();
  if (std::abs(p[0]) <= kOrthogonalityGuard) return std::nullopt;
  TangentCoords c;
  c[0] = p[1] / p[0];  // the sheet sign cancels in the ratios
  c[1] = p[2] / p[0];
  c[2] = p[3] / p[0];
  c.tail<3>() = m.translation();
  return c;
}

/// Inverse of project. Folds the ±q two-valuedness by picking the sign that
/// maximizes the inner product with q0.
inline TangentCoords lift(const TangentChart& chart, const RigidMotion& m) {
  auto c = try_lift(chart, m);
  if (!c)
    throw NearOrthogonalRotation("rotation is within the 5 degree guard band around the chart equator");
  return *c;
}

/// Angle between tangent points, folded into [0, pi/2] (antipodal points are
/// the same chart).
inline double chart_angle(const TangentChart& a, const TangentChart& b) {
  const double d = std::abs(dot(a.q0(), b.q0()));
  return std::acos(std::min(d, 1.0));
}

/// Chart transition: coordinates in `a` re-expressed in `b`. Translation
/// passes through unchanged.
inline TangentCoords transition(const TangentChart& a, const TangentChart& b,
                                const TangentCoords& c) {
  return lift(b, project(a, c));
}

/// 6x6 Jacobian of the transition at `at`, by central differences (h = 1e-6)
/// on the rotation block. The translation block is the identity and the mixed
/// blocks vanish exactly, so they are set analytically.
inline Mat6 transition_jacobian(const TangentChart& a, const TangentChart& b,
                                const TangentCoords& at) {
  Mat6 J = Mat6::Identity();
  for (int j = 0; j < 3; ++j) {
    TangentCoords hi = at, lo = at;
    hi[j] += kJacobianStep;
    lo[j] -= kJacobianStep;
    const TangentCoords chi = transition(a, b, hi);
    const TangentCoords clo = transition(a, b, lo);
    J.block<3, 1>(0, j) = (chi.head<3>() - clo.head<3>()) / (2.0 * kJacobianStep);
  }
  return J;
}

/// Chart of a composed motion: tangent point q2 * q1.
inline TangentChart composition_chart(const TangentChart& chart2, const TangentChart& chart1) {
  return TangentChart(canonical_sign(chart2.q0() * chart1.q0()));
}

/// Coordinates of project(chart2, y2) * project(chart1, y1) in the chart at
/// q2*q1.
inline TangentCoords compose_in_chart(const TangentChart& chart3, const TangentChart& chart2,
                                      const TangentChart& chart1, const TangentCoords& y2,
                                      const TangentCoords& y1) {
  return lift(chart3, project(chart2, y2) * project(chart1, y1));
}

/// 6x12 Jacobian of the composition map g(y2, y1) by central differences at
/// an arbitrary linearization point. Columns 0..5 differentiate with respect
/// to y2, columns 6..11 with respect to y1.
inline Mat6x12 composition_jacobian_at(const TangentChart& chart2, const TangentChart& chart1,
                                       const TangentCoords& y2, const TangentCoords& y1) {
  const TangentChart chart3 = composition_chart(chart2, chart1);
  Mat6x12 J;
  for (int j = 0; j < 12; ++j) {
    TangentCoords h2 = y2, l2 = y2, h1 = y1, l1 = y1;
    if (j < 6) {
      h2[j] += kJacobianStep;
      l2[j] -= kJacobianStep;
    } else {
      h1[j - 6] += kJacobianStep;
      l1[j - 6] -= kJacobianStep;
    }
    const TangentCoords hi = compose_in_chart(chart3, chart2, chart1, h2, h1);
    const TangentCoords lo = compose_in_chart(chart3, chart2, chart1, l2, l1);
    J.col(j) = (hi - lo) / (2.0 * kJacobianStep);
  }
  return J;
}

/// Jacobian of g at (0, 0), where g(0,0) = 0 by construction (verified before
/// differencing).
inline Mat6x12 composition_jacobian(const TangentChart& chart2, const TangentChart& chart1) {
  const TangentChart chart3 = composition_chart(chart2, chart1);
  const TangentCoords origin = TangentCoords::Zero();
  const TangentCoords g0 = compose_in_chart(chart3, chart2, chart1, origin, origin);
  if (g0.lpNorm<Eigen::Infinity>() > 1e-12)
    throw std::logic_error("composition map does not vanish at the chart centers");
  return composition_jacobian_at(chart2, chart1, origin, origin);
}

}  // namespace mpg
