#include "mmreg/horn.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace mmreg {

CenteredPoints center(std::span<const Vec3> points) {
  if (points.empty()) throw std::invalid_argument("empty point set");
  CenteredPoints out;
  for (const auto& p : points) out.mean += p;
  out.mean /= static_cast<double>(points.size());
  out.centered.reserve(points.size());
  for (const auto& p : points) out.centered.push_back(p - out.mean);
  return out;
}

CenteredData center(const CorrespondenceSet& cs) {
  std::vector<Vec3> a, b;
  a.reserve(cs.size());
  b.reserve(cs.size());
  for (const auto& c : cs) {
    a.push_back(c.a);
    b.push_back(c.b);
  }
  auto ca = center(a);
  auto cb = center(b);
  return {std::move(ca.centered), std::move(cb.centered), ca.mean, cb.mean};
}

Mat3 cross_covariance(const CenteredData& cd) {
  if (cd.a_centered.size() != cd.b_centered.size())
    throw std::invalid_argument("cross_covariance: length mismatch");
  if (cd.a_centered.empty()) throw std::invalid_argument("empty point set");
  Mat3 H = Mat3::Zero();
  for (std::size_t i = 0; i < cd.a_centered.size(); ++i)
    H += cd.b_centered[i] * cd.a_centered[i].transpose();
  return H / static_cast<double>(cd.a_centered.size());
}

RotationMatrix solve_rotation(const Mat3& H) {
  if (!H.allFinite()) throw std::invalid_argument("solve_rotation: non-finite input");
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& U = svd.matrixU();
  const Mat3& V = svd.matrixV();
  Mat3 D = Mat3::Identity();
  // Reflection guard.
  D(2, 2) = (U * V.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return RotationMatrix(U * D * V.transpose());
}

Vec3 estimate_translation(const RotationMatrix& R, const Vec3& a_mean, const Vec3& b_mean) {
  return b_mean - R * a_mean;
}

double estimate_noise_std(std::span<const Vec3> residuals, double sigma_floor) {
  if (residuals.size() < 2) throw std::invalid_argument("insufficient residuals");
  const double n = static_cast<double>(residuals.size());
  Vec3 mean = Vec3::Zero();
  for (const auto& r : residuals) mean += r;
  mean /= n;
  double ss = 0.0;
  for (const auto& r : residuals) ss += (r - mean).squaredNorm();
  const double var = ss / n / 3.0;
  return std::max(std::sqrt(var), sigma_floor);
}

namespace {

HornEstimate register_centered(const CorrespondenceSet& cs, double sigma_floor) {
  const CenteredData cd = center(cs);
  const RotationMatrix R = solve_rotation(cross_covariance(cd));
  HornEstimate est;
  est.transform = {R, estimate_translation(R, cd.a_mean, cd.b_mean)};

  est.residuals.reserve(cs.size());
  for (const auto& c : cs) est.residuals.push_back(c.b - apply(est.transform, c.a));
  est.sigma_hat = estimate_noise_std(est.residuals, sigma_floor);

  Mat3 second_moment = Mat3::Zero();
  for (const auto& a : cd.a_centered) second_moment += a * a.transpose();
  second_moment /= static_cast<double>(cs.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(second_moment, Eigen::EigenvaluesOnly);
  est.lambda_min = std::max(eig.eigenvalues()(0), 0.0);
  return est;
}

}  // namespace

HornEstimate horn_register(const CorrespondenceSet& cs, double sigma_floor) {
  if (cs.size() < 3) throw std::invalid_argument("underdetermined");
  return register_centered(cs, sigma_floor);
}

HornEstimate horn_register(const CorrespondenceSet& cs, std::span<const std::size_t> indices,
                           double sigma_floor) {
  if (indices.size() < 3) throw std::invalid_argument("underdetermined");
  CorrespondenceSet subset;
  subset.reserve(indices.size());
  for (auto i : indices) subset.push_back(cs.at(i));
  return register_centered(subset, sigma_floor);
}

}  // namespace mmreg
