#pragma once

#include "mpg/quaternion.hpp"

namespace mpg {

/// Dual quaternion dq = q1 + eps*q2 with eps^2 = 0.
struct DualQuaternion {
  Quaternion real;  // q1
  Quaternion dual;  // q2, the coefficient of eps

  DualQuaternion() = default;
  DualQuaternion(const Quaternion& r, const Quaternion& d) : real(r), dual(d) {}

  static DualQuaternion one() { return {Quaternion(1, 0, 0, 0), Quaternion()}; }

  DualQuaternion operator+(const DualQuaternion& o) const { return {real + o.real, dual + o.dual}; }
  DualQuaternion operator*(double s) const { return {real * s, dual * s}; }

  /// (p1 + eps p2)(q1 + eps q2) = p1 q1 + eps (p1 q2 + p2 q1).
  DualQuaternion operator*(const DualQuaternion& o) const {
    return {real * o.real, real * o.dual + dual * o.real};
  }

  /// Quaternion conjugate: q̄1 + eps q̄2.
  DualQuaternion conj() const { return {real.conj(), dual.conj()}; }

  /// Combined conjugate q̄1 - eps q̄2; the sandwich dq * p_d * combined_conj(dq)
  /// carries an embedded point through the rigid motion.
  DualQuaternion combined_conj() const { return {real.conj(), -dual.conj()}; }
};

}  // namespace mpg
