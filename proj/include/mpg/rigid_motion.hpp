#pragma once

#include <string>

#include "mpg/dual_quaternion.hpp"
#include "mpg/quaternion.hpp"

namespace mpg {

/// Element of SE(3): a unit rotation quaternion (stored in canonical sign)
/// plus a 3D translation. Immutable value type.
class RigidMotion {
 public:
  RigidMotion() = default;

  RigidMotion(const UnitQuaternion& rotation, const Vec3& translation)
      : rotation_(canonical_sign(rotation)), translation_(translation) {}

  static RigidMotion identity() { return {}; }

  const UnitQuaternion& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  /// Composition: (*this) after `o`, i.e. rotation q*o.q and translation
  /// R(q)*o.t + t. Evaluated through the dual-quaternion product.
  RigidMotion operator*(const RigidMotion& o) const;

  RigidMotion inverse() const;

 private:
  UnitQuaternion rotation_;
  Vec3 translation_ = Vec3::Zero();
};

/// dq = q_r + eps * (1/2) q_t * q_r.
inline DualQuaternion motion_to_dq(const RigidMotion& m) {
  const Quaternion qr = m.rotation().as_quaternion();
  const Quaternion qt = ImaginaryQuaternion(m.translation()).as_quaternion();
  return {qr, (qt * qr) * 0.5};
}

/// Inverse of motion_to_dq; recovers q_t as 2 * dual * conj(real).
inline RigidMotion dq_to_motion(const DualQuaternion& dq) {
  const double n = dq.real.norm();
  if (std::abs(n - 1.0) > kUnitTolerance)
    throw NonUnitRotationPart("real part norm " + std::to_string(n) + " is not 1");
  const UnitQuaternion qr(dq.real);
  const Quaternion qt = (dq.dual * dq.real.conj()) * 2.0;
  // real part of qt is zero up to roundoff for a motion dual quaternion
  return {qr, qt.imag()};
}

/// Applies the motion to a point via the embedding
/// p_d = [1,0,0,0] + eps*[0,x,y,z] and the sandwich product.
inline Vec3 transform_point(const RigidMotion& m, const Vec3& p) {
  const DualQuaternion dq = motion_to_dq(m);
  const DualQuaternion pd(Quaternion(1, 0, 0, 0), ImaginaryQuaternion(p).as_quaternion());
  const DualQuaternion r = dq * pd * dq.combined_conj();
  return r.dual.imag();
}

inline RigidMotion RigidMotion::operator*(const RigidMotion& o) const {
  return dq_to_motion(motion_to_dq(*this) * motion_to_dq(o));
}

inline RigidMotion RigidMotion::inverse() const {
  // the quaternion conjugate inverts a unit motion dual quaternion
  return dq_to_motion(motion_to_dq(*this).conj());
}

}  // namespace mpg
