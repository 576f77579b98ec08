#ifndef MMREG_HORN_HPP
#define MMREG_HORN_HPP

#include <span>
#include <vector>

#include "mmreg/geometry.hpp"

namespace mmreg {

/// Lower bound applied to every noise standard deviation estimate.
inline constexpr double kSigmaFloor = 1e-8;

struct CenteredPoints {
  std::vector<Vec3> centered;
  Vec3 mean = Vec3::Zero();
};

struct CenteredData {
  std::vector<Vec3> a_centered;
  std::vector<Vec3> b_centered;
  Vec3 a_mean = Vec3::Zero();
  Vec3 b_mean = Vec3::Zero();
};

struct HornEstimate {
  RigidTransform transform;
  double sigma_hat = kSigmaFloor;
  /// b_i - R a_i - t for every input correspondence, in input order.
  std::vector<Vec3> residuals;
  /// Smallest eigenvalue of the centered second-moment matrix of the a-points.
  double lambda_min = 0.0;
};

/// Throws std::invalid_argument("empty point set") on empty input.
CenteredPoints center(std::span<const Vec3> points);

CenteredData center(const CorrespondenceSet& cs);

/// H = (1/m) sum b'_i a'_i^T. The maximizer of <X, H> over SO(3) maps a onto b.
Mat3 cross_covariance(const CenteredData& cd);

/// Closest rotation to H in the <X, H> sense: U diag(1, 1, det(U V^T)) V^T.
/// H = 0 yields the identity.
RotationMatrix solve_rotation(const Mat3& H);

Vec3 estimate_translation(const RotationMatrix& R, const Vec3& a_mean, const Vec3& b_mean);

/// sqrt of the mean of the three per-axis (biased) sample variances, floored
/// at `sigma_floor`. Needs at least two residuals.
double estimate_noise_std(std::span<const Vec3> residuals, double sigma_floor = kSigmaFloor);

/// Closed-form least-squares rigid registration. Needs >= 3 correspondences.
HornEstimate horn_register(const CorrespondenceSet& cs, double sigma_floor = kSigmaFloor);

/// Same as above for a subset given by indices into `cs`.
HornEstimate horn_register(const CorrespondenceSet& cs, std::span<const std::size_t> indices,
                           double sigma_floor = kSigmaFloor);

}  // namespace mmreg

#endif  // MMREG_HORN_HPP
