#ifndef MMREG_GEOMETRY_HPP
#define MMREG_GEOMETRY_HPP

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace mmreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Tolerance used by every SO(3) membership check in the library.
inline constexpr double kRotationTolerance = 1e-9;

/// Returns true when all components are finite.
bool is_finite(const Vec3& v);

/// Orthogonality residual ||R^T R - I||_F and determinant check.
bool is_rotation(const Mat3& m, double tol = kRotationTolerance);

/// A 3x3 matrix known to lie in SO(3) (within kRotationTolerance).
///
/// Construction validates; use `RotationMatrix::unchecked` only for values
/// produced by an algorithm that guarantees orthonormality by construction.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::Identity()) {}
  explicit RotationMatrix(const Mat3& m);

  static RotationMatrix identity() { return RotationMatrix(); }
  static RotationMatrix unchecked(const Mat3& m) {
    RotationMatrix r;
    r.m_ = m;
    return r;
  }
  /// Rotation by `angle` radians about `axis` (normalized internally).
  static RotationMatrix from_axis_angle(const Vec3& axis, double angle);

  const Mat3& matrix() const { return m_; }
  RotationMatrix transpose() const { return unchecked(m_.transpose()); }

  Vec3 operator*(const Vec3& p) const { return m_ * p; }
  RotationMatrix operator*(const RotationMatrix& o) const {
    return unchecked(m_ * o.m_);
  }

 private:
  Mat3 m_;
};

struct RigidTransform {
  RotationMatrix rotation;
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
};

struct Correspondence {
  Vec3 a;
  Vec3 b;
};

using CorrespondenceSet = std::vector<Correspondence>;

/// R p + t
Vec3 apply(const RigidTransform& T, const Vec3& p);

/// apply(compose(T1, T2), p) == apply(T1, apply(T2, p))
RigidTransform compose(const RigidTransform& T1, const RigidTransform& T2);

RigidTransform inverse(const RigidTransform& T);

/// Rotation angle separating two orientations, in [0, pi].
/// Throws std::invalid_argument if either input is not a rotation.
double geodesic_distance(const Mat3& R1, const Mat3& R2);
double geodesic_distance(const RotationMatrix& R1, const RotationMatrix& R2);

// ---------------------------------------------------------------------------
// Seeded randomness. Distributions are implemented here rather than taken
// from <random> so that output is bit-identical across standard libraries.

using RngSeed = std::uint64_t;

class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one draw per call).
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Uniform point in the closed ball of given radius.
  Vec3 in_ball(double radius);
  /// Uniform direction on the unit sphere.
  Vec3 unit_vector();

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed (splitmix64 finalizer).
RngSeed derive_seed(RngSeed base, std::uint64_t stream);

/// Uniform rotation (normalized Gaussian quaternion).
RotationMatrix random_rotation(Rng& rng);
RotationMatrix random_rotation(RngSeed seed);

}  // namespace mmreg

#endif  // MMREG_GEOMETRY_HPP
