#pragma once

#include <cmath>
#include <string>

#include "mpg/errors.hpp"
#include "mpg/types.hpp"

namespace mpg {

inline constexpr double kUnitTolerance = 1e-9;
inline constexpr double kDegenerateNorm = 1e-12;

/// Quaternion q = a + ib + jc + kd, identified with R^4 via its coefficients.
struct Quaternion {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  Quaternion() = default;
  Quaternion(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

  static Quaternion from_coeffs(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

  Vec4 coeffs() const { return Vec4(a, b, c, d); }
  Vec3 imag() const { return Vec3(b, c, d); }

  double squared_norm() const { return a * a + b * b + c * c + d * d; }
  double norm() const { return std::sqrt(squared_norm()); }

  Quaternion conj() const { return {a, -b, -c, -d}; }

  Quaternion operator+(const Quaternion& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Quaternion operator-(const Quaternion& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  Quaternion operator-() const { return {-a, -b, -c, -d}; }
  Quaternion operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

  /// Hamilton product.
  Quaternion operator*(const Quaternion& o) const {
    return {a * o.a - b * o.b - c * o.c - d * o.d,
            a * o.b + b * o.a + c * o.d - d * o.c,
            a * o.c - b * o.d + c * o.a + d * o.b,
            a * o.d + b * o.c - c * o.b + d * o.a};
  }
};

inline Quaternion operator*(double s, const Quaternion& q) { return q * s; }

inline double dot(const Quaternion& p, const Quaternion& q) {
  return p.a * q.a + p.b * q.b + p.c * q.c + p.d * q.d;
}

/// Norm-1 quaternion; q and -q represent the same 3D rotation.
/// Renormalizes on construction and after every product.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(1, 0, 0, 0) {}

  explicit UnitQuaternion(const Quaternion& q) : q_(q) {
    const double n = q_.norm();
    if (n <= kDegenerateNorm)
      throw DegenerateQuaternion("cannot normalize quaternion with norm " + std::to_string(n));
    q_ = q_ * (1.0 / n);
  }

  static UnitQuaternion identity() { return UnitQuaternion(); }

  const Quaternion& as_quaternion() const { return q_; }
  Vec4 coeffs() const { return q_.coeffs(); }
  double a() const { return q_.a; }
  double b() const { return q_.b; }
  double c() const { return q_.c; }
  double d() const { return q_.d; }

  UnitQuaternion conj() const {
    UnitQuaternion r;
    r.q_ = q_.conj();  // conjugation preserves the norm exactly
    return r;
  }

  UnitQuaternion operator*(const UnitQuaternion& o) const { return UnitQuaternion(q_ * o.q_); }

  UnitQuaternion operator-() const {
    UnitQuaternion r;
    r.q_ = -q_;
    return r;
  }

 private:
  Quaternion q_;
};

inline double dot(const UnitQuaternion& p, const UnitQuaternion& q) {
  return dot(p.as_quaternion(), q.as_quaternion());
}

/// Purely imaginary quaternion [0, x, y, z]; carries a translation.
struct ImaginaryQuaternion {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  ImaginaryQuaternion() = default;
  ImaginaryQuaternion(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}
  explicit ImaginaryQuaternion(const Vec3& v) : x(v[0]), y(v[1]), z(v[2]) {}

  Quaternion as_quaternion() const { return {0.0, x, y, z}; }
  Vec3 vec() const { return Vec3(x, y, z); }
};

/// Rotation by `theta` radians around a unit axis.
inline UnitQuaternion axis_angle(const Vec3& axis, double theta) {
  if (std::abs(axis.norm() - 1.0) > kUnitTolerance)
    throw NonUnitAxis("axis norm " + std::to_string(axis.norm()) + " is not 1");
  const double h = 0.5 * theta;
  const double s = std::sin(h);
  return UnitQuaternion(Quaternion(std::cos(h), s * axis[0], s * axis[1], s * axis[2]));
}

/// p_rot = q * p * q̄ on the embedded point p.
inline Vec3 rotate_point(const UnitQuaternion& q, const Vec3& p) {
  const Quaternion r = q.as_quaternion() * ImaginaryQuaternion(p).as_quaternion() * q.as_quaternion().conj();
  return r.imag();
}

/// Resolves the ±q double coverage: flips the sign so that the first
/// coefficient with magnitude above 1e-9 is positive. Idempotent.
inline UnitQuaternion canonical_sign(const UnitQuaternion& q) {
  const Vec4 v = q.coeffs();
  for (int i = 0; i < 4; ++i) {
    if (std::abs(v[i]) > kUnitTolerance) return v[i] > 0 ? q : -q;
  }
  return q;
}

}  // namespace mpg
