#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "posh/errors.hpp"

namespace posh {

/// 3D coordinate in Angstrom, double precision.
struct Coord3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Coord3 operator+(const Coord3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Coord3 operator-(const Coord3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Coord3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Coord3& operator+=(const Coord3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(const Coord3& a, const Coord3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Coord3 cross(const Coord3& a, const Coord3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Coord3& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Coord3& a, const Coord3& b) { return norm(a - b); }

inline Coord3 normalized(const Coord3& a) {
  double n = norm(a);
  if (n == 0.0) raise(Errc::DegenerateGeometry, "cannot normalize zero vector");
  return a * (1.0 / n);
}

/// Unsigned angle between two vectors, in [0, pi]. atan2 form is stable for
/// nearly parallel and nearly antiparallel inputs.
inline double angle_between(const Coord3& u, const Coord3& v) {
  double nu = norm(u), nv = norm(v);
  if (nu == 0.0 || nv == 0.0)
    raise(Errc::DegenerateGeometry, "zero-length bond vector in angle");
  return std::atan2(norm(cross(u, v)), dot(u, v));
}

/// Signed dihedral over p0-p1-p2-p3 in (-pi, pi], right-handed convention.
inline double dihedral(const Coord3& p0, const Coord3& p1, const Coord3& p2, const Coord3& p3) {
  const Coord3 b1 = p1 - p0;
  const Coord3 b2 = p2 - p1;
  const Coord3 b3 = p3 - p2;
  const Coord3 n1 = cross(b1, b2);
  const Coord3 n2 = cross(b2, b3);
  const double nb2 = norm(b2);
  if (nb2 == 0.0) raise(Errc::DegenerateGeometry, "coincident atoms in dihedral");
  const double eps = 1e-12;
  if (norm(n1) <= eps * norm(b1) * nb2 || norm(n2) <= eps * nb2 * norm(b3))
    raise(Errc::DegenerateGeometry, "collinear atoms in dihedral");
  const Coord3 m1 = cross(n1, b2 * (1.0 / nb2));
  const double x = dot(n1, n2);
  const double y = dot(m1, n2);
  double a = std::atan2(y, x);
  if (a <= -std::numbers::pi) a = std::numbers::pi;  // range (-pi, pi]
  return a;
}

/// Row-major 3x3 matrix; enough linear algebra for superposition work.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double& at(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }
  double at(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }

  static Mat3 identity() { return {}; }

  Coord3 apply(const Coord3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 transposed() const {
    Mat3 t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.at(r, c) = at(c, r);
    return t;
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += at(i, k) * o.at(k, j);
        r.at(i, j) = s;
      }
    return r;
  }

  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

/// Rotation about a unit axis by angle (Rodrigues).
Mat3 rotation_about(const Coord3& axis, double angle);

/// Uniform random rotation from a random unit quaternion.
class Rng;
Mat3 random_rotation(Rng& rng);

}  // namespace posh
