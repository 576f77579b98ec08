// Shared helpers for the unit tests.
#ifndef MMREG_TESTS_SUPPORT_HPP
#define MMREG_TESTS_SUPPORT_HPP

#include <cmath>
#include <vector>

#include "mmreg/geometry.hpp"

namespace mmreg::test {

inline RigidTransform random_transform(Rng& rng, double t_scale = 1.0) {
  const RotationMatrix R = random_rotation(rng);
  const Vec3 t = rng.in_ball(t_scale);
  return {R, t};
}

inline CorrespondenceSet noiseless_set(Rng& rng, const RigidTransform& T, std::size_t m, double radius = 1.0) {
  CorrespondenceSet cs;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3 a = rng.in_ball(radius);
    cs.push_back({a, apply(T, a)});
  }
  return cs;
}

inline double orthogonality_residual(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

inline bool so3_valid(const Mat3& R) {
  return orthogonality_residual(R) <= 1e-9 && std::abs(R.determinant() - 1.0) <= 1e-9;
}

}  // namespace mmreg::test

#endif  // MMREG_TESTS_SUPPORT_HPP
