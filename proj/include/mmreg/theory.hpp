#ifndef MMREG_THEORY_HPP
#define MMREG_THEORY_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "mmreg/geometry.hpp"

namespace mmreg {

// ---------------------------------------------------------------------------
// Closed-form bound evaluators. All of them throw std::invalid_argument when
// an input is outside the formula's domain.

/// Squared-Frobenius rotation error bound for Horn's method:
///   18 B sigma / lambda_min * sqrt((2/m) log(18/delta)).
/// lambda_min == 0 yields +infinity.
double rot_bound(double m, double sigma, double B, double delta, double lambda_min);

/// Squared translation error bound:
///   36 B sigma sqrt((2/m) log(18/delta)) + (12/m) sigma^2 log(6/delta).
double trans_bound(double m, double sigma, double B, double delta);

/// Union-bound Hoeffding deviation a k sqrt((2/n) log(2k/delta)).
double hoeffding_bound(double n, double a, double delta, double k = 1.0);

/// Two-sided interval for sigma_hat / sigma at sample size m:
///   1/sqrt(3) -+ 2 ((2/(3m)) log(2/delta))^(1/4).
/// Throws if m < 2000 log(2/delta).
struct SigmaRatioInterval {
  double lower;
  double upper;
};
SigmaRatioInterval sigma_ratio_interval(double m, double delta);

/// alpha >= 8 exp(2 (sqrt(3) + c)^2).
double alpha_threshold(double c);

/// Inverse of alpha_threshold: sqrt(0.5 log(alpha / 8)) - sqrt(3).
double c_from_alpha(double alpha);

struct BoundInputs {
  double alpha = 2.0;
  double delta = 0.05;
  double B = 1.0;
  double lambda = 1.0 / 3.0;
  double sigma = 0.1;
};

enum class M0Variant {
  /// 2.5e4 log(18/delta) max{B^4/lambda^2, B^2, sigma} (0.5 log(alpha/8))^(-1/2);
  /// requires alpha >= alpha_threshold(0).
  A,
  /// 2.5e8 ((alpha+1)/(alpha-1))^2 log(18/delta) max{B^4/lambda^2, B^2, sigma};
  /// requires alpha > 1.
  B,
};

/// Minimum initial cluster size from the EM guarantee. `include_floor_term`
/// adds 0.1 to the max{...} set, as one of the stated forms does.
double m0_threshold(const BoundInputs& in, M0Variant variant, bool include_floor_term = false);

// ---------------------------------------------------------------------------
// Monte-Carlo benches.

struct BoundTrial {
  std::size_t m = 0;
  double sigma = 0.0;
  double B = 0.0;
  double delta = 0.0;
  double lambda_min = 0.0;
  double err_rot = 0.0;    ///< ||R_hat - R||_F^2
  double bound_rot = 0.0;
  double err_trans = 0.0;  ///< ||t_hat - t||^2
  double bound_trans = 0.0;
  bool violated_rot = false;
  bool violated_trans = false;
};

struct ConsistencySummaryRow {
  std::size_t m = 0;
  std::size_t trials = 0;
  double violation_rate_rot = 0.0;
  double violation_rate_trans = 0.0;
  double median_err_rot = 0.0;
  double median_err_trans = 0.0;
};

struct ConsistencyBench {
  std::vector<BoundTrial> trials;
  std::vector<ConsistencySummaryRow> summary;
};

/// Single-object registration trials: uniform random rotation, translation in
/// the ball of radius B, a-points uniform in that ball, uniform noise sigma.
ConsistencyBench run_consistency_bench(const std::vector<std::size_t>& m_values, double sigma,
                                       double B, double delta, std::size_t trials, RngSeed seed);

struct SigmaRatioTrial {
  std::size_t m = 0;
  double sigma = 0.0;
  double delta = 0.0;
  double sigma_hat = 0.0;
  double ratio = 0.0;  ///< sigma_hat / sigma
  double lower = 0.0;
  double upper = 0.0;
  bool within_001 = false;  ///< |ratio - 1/sqrt(3)| <= 0.01
  bool violated = false;    ///< ratio outside [lower, upper]
};

struct SigmaRatioSummaryRow {
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t within_001 = 0;
  double violation_rate = 0.0;
  double mean_ratio = 0.0;
};

struct SigmaRatioBench {
  std::vector<SigmaRatioTrial> trials;
  std::vector<SigmaRatioSummaryRow> summary;
};

/// Draws m uniform noise vectors on [-sigma, sigma]^3 per trial and checks the
/// noise-std estimator against the sigma-ratio interval.
SigmaRatioBench run_sigma_ratio_bench(const std::vector<std::size_t>& m_values, double sigma,
                                      double delta, std::size_t trials, RngSeed seed);

/// Fraction of trials in which |mean of n uniform[-a, a] draws| exceeds
/// hoeffding_bound(n, a, delta, 1).
double hoeffding_violation_rate(std::size_t n, double a, double delta, std::size_t trials, RngSeed seed);

}  // namespace mmreg

#endif  // MMREG_THEORY_HPP
