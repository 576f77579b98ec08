#include "mmreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

namespace mmreg {

bool is_finite(const Vec3& v) { return v.allFinite(); }

bool is_rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

RotationMatrix::RotationMatrix(const Mat3& m) : m_(m) {
  if (!is_rotation(m)) throw std::invalid_argument("matrix is not in SO(3)");
}

RotationMatrix RotationMatrix::from_axis_angle(const Vec3& axis, double angle) {
  if (axis.norm() == 0.0) throw std::invalid_argument("zero rotation axis");
  return unchecked(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix());
}

Vec3 apply(const RigidTransform& T, const Vec3& p) {
  return T.rotation.matrix() * p + T.translation;
}

RigidTransform compose(const RigidTransform& T1, const RigidTransform& T2) {
  return {T1.rotation * T2.rotation, T1.rotation * T2.translation + T1.translation};
}

RigidTransform inverse(const RigidTransform& T) {
  const RotationMatrix rt = T.rotation.transpose();
  return {rt, -(rt * T.translation)};
}

double geodesic_distance(const Mat3& R1, const Mat3& R2) {
  if (!is_rotation(R1) || !is_rotation(R2))
    throw std::invalid_argument("geodesic_distance: argument is not a rotation");
  // Same angle as acos((tr - 1) / 2), but atan2 keeps full precision near 0 and pi.
  const Mat3 M = R1.transpose() * R2;
  const Vec3 w(M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1));
  const double c = std::clamp((M.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::atan2(0.5 * w.norm(), c);
}

double geodesic_distance(const RotationMatrix& R1, const RotationMatrix& R2) {
  return geodesic_distance(R1.matrix(), R2.matrix());
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: empty range");
  // Rejection sampling avoids modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

Vec3 Rng::unit_vector() {
  for (;;) {
    const double x = normal();
    const double y = normal();
    const double z = normal();
    Vec3 v(x, y, z);
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Vec3 Rng::in_ball(double radius) {
  for (;;) {
    const double x = uniform(-1.0, 1.0);
    const double y = uniform(-1.0, 1.0);
    const double z = uniform(-1.0, 1.0);
    Vec3 v(x, y, z);
    if (v.squaredNorm() <= 1.0) return radius * v;
  }
}

RngSeed derive_seed(RngSeed base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RotationMatrix random_rotation(Rng& rng) {
  for (;;) {
    const double w = rng.normal();
    const double x = rng.normal();
    const double y = rng.normal();
    const double z = rng.normal();
    Eigen::Quaterniond q(w, x, y, z);
    const double n = q.norm();
    if (n < 1e-12) continue;
    q.coeffs() /= n;
    return RotationMatrix(q.toRotationMatrix());
  }
}

RotationMatrix random_rotation(RngSeed seed) {
  Rng rng(seed);
  return random_rotation(rng);
}

}  // namespace mmreg
