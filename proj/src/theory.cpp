#include "mmreg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmreg/horn.hpp"

namespace mmreg {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_delta(double delta) { require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)"); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

double rot_bound(double m, double sigma, double B, double delta, double lambda_min) {
  require(m > 0.0, "m must be positive");
  require(sigma >= 0.0, "sigma must be >= 0");
  require(B > 0.0, "B must be positive");
  require_delta(delta);
  require(lambda_min >= 0.0, "lambda_min must be >= 0");
  if (lambda_min == 0.0) return std::numeric_limits<double>::infinity();
  return 18.0 * B * sigma / lambda_min * std::sqrt(2.0 / m * std::log(18.0 / delta));
}

double trans_bound(double m, double sigma, double B, double delta) {
  require(m > 0.0, "m must be positive");
  require(sigma >= 0.0, "sigma must be >= 0");
  require(B > 0.0, "B must be positive");
  require_delta(delta);
  return 36.0 * B * sigma * std::sqrt(2.0 / m * std::log(18.0 / delta)) +
         12.0 / m * sigma * sigma * std::log(6.0 / delta);
}

double hoeffding_bound(double n, double a, double delta, double k) {
  require(n > 0.0, "n must be positive");
  require(a > 0.0, "a must be positive");
  require(k > 0.0, "k must be positive");
  require_delta(delta);
  return a * k * std::sqrt(2.0 / n * std::log(2.0 * k / delta));
}

SigmaRatioInterval sigma_ratio_interval(double m, double delta) {
  require_delta(delta);
  require(m >= 2000.0 * std::log(2.0 / delta), "m below the sigma-ratio validity floor 2000 log(2/delta)");
  const double w = 2.0 * std::pow(2.0 / (3.0 * m) * std::log(2.0 / delta), 0.25);
  const double c = 1.0 / std::sqrt(3.0);
  return {c - w, c + w};
}

double alpha_threshold(double c) {
  require(c >= 0.0, "c must be >= 0");
  const double s = std::sqrt(3.0) + c;
  return 8.0 * std::exp(2.0 * s * s);
}

double c_from_alpha(double alpha) {
  require(alpha > 8.0, "alpha must exceed 8");
  return std::sqrt(0.5 * std::log(alpha / 8.0)) - std::sqrt(3.0);
}

double m0_threshold(const BoundInputs& in, M0Variant variant, bool include_floor_term) {
  require_delta(in.delta);
  require(in.B > 0.0, "B must be positive");
  require(in.lambda > 0.0, "lambda must be positive");
  require(in.sigma >= 0.0, "sigma must be >= 0");
  double geom = std::max({std::pow(in.B, 4) / (in.lambda * in.lambda), in.B * in.B, in.sigma});
  if (include_floor_term) geom = std::max(geom, 0.1);
  const double log_term = std::log(18.0 / in.delta);
  switch (variant) {
    case M0Variant::A:
      require(in.alpha >= alpha_threshold(0.0), "variant A requires alpha >= 8 exp(6)");
      return 2.5e4 * log_term * geom / std::sqrt(0.5 * std::log(in.alpha / 8.0));
    case M0Variant::B: {
      require(in.alpha > 1.0, "variant B requires alpha > 1");
      const double r = (in.alpha + 1.0) / (in.alpha - 1.0);
      return 2.5e8 * r * r * log_term * geom;
    }
  }
  throw std::invalid_argument("unknown m0 variant");
}

ConsistencyBench run_consistency_bench(const std::vector<std::size_t>& m_values, double sigma,
                                       double B, double delta, std::size_t trials, RngSeed seed) {
  require(!m_values.empty(), "empty m grid");
  for (auto m : m_values) require(m >= 3, "every m must be >= 3");
  require(trials >= 1, "trials must be >= 1");
  require(sigma >= 0.0, "sigma must be >= 0");
  require(B > 0.0, "B must be positive");
  require_delta(delta);

  ConsistencyBench out;
  for (std::size_t gi = 0; gi < m_values.size(); ++gi) {
    const std::size_t m = m_values[gi];
    std::vector<double> rot_errs, trans_errs;
    std::size_t vr = 0, vt = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(derive_seed(seed, gi), t));
      const RotationMatrix R = random_rotation(rng);
      const Vec3 tr = rng.in_ball(B);
      CorrespondenceSet cs;
      cs.reserve(m);
      for (std::size_t i = 0; i < m; ++i) {
        const Vec3 a = rng.in_ball(B);
        const double ex = rng.uniform(-sigma, sigma);
        const double ey = rng.uniform(-sigma, sigma);
        const double ez = rng.uniform(-sigma, sigma);
        cs.push_back({a, R * a + tr + Vec3(ex, ey, ez)});
      }
      const auto est = horn_register(cs);
      BoundTrial bt;
      bt.m = m;
      bt.sigma = sigma;
      bt.B = B;
      bt.delta = delta;
      bt.lambda_min = est.lambda_min;
      bt.err_rot = (est.transform.rotation.matrix() - R.matrix()).squaredNorm();
      bt.err_trans = (est.transform.translation - tr).squaredNorm();
      bt.bound_rot = rot_bound(static_cast<double>(m), sigma, B, delta, est.lambda_min);
      bt.bound_trans = trans_bound(static_cast<double>(m), sigma, B, delta);
      bt.violated_rot = bt.err_rot > bt.bound_rot;
      bt.violated_trans = bt.err_trans > bt.bound_trans;
      vr += bt.violated_rot;
      vt += bt.violated_trans;
      rot_errs.push_back(bt.err_rot);
      trans_errs.push_back(bt.err_trans);
      out.trials.push_back(bt);
    }
    const double n = static_cast<double>(trials);
    out.summary.push_back({m, trials, static_cast<double>(vr) / n, static_cast<double>(vt) / n,
                           median(rot_errs), median(trans_errs)});
  }
  return out;
}

SigmaRatioBench run_sigma_ratio_bench(const std::vector<std::size_t>& m_values, double sigma,
                                      double delta, std::size_t trials, RngSeed seed) {
  require(!m_values.empty(), "empty m grid");
  require(trials >= 1, "trials must be >= 1");
  require(sigma > 0.0, "sigma must be positive");
  SigmaRatioBench out;
  const double centre = 1.0 / std::sqrt(3.0);
  for (std::size_t gi = 0; gi < m_values.size(); ++gi) {
    const std::size_t m = m_values[gi];
    const auto interval = sigma_ratio_interval(static_cast<double>(m), delta);
    SigmaRatioSummaryRow row{m, trials, 0, 0.0, 0.0};
    std::size_t violations = 0;
    std::vector<Vec3> noise(m);
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(derive_seed(seed, gi), t));
      // Draw on the unit cube and scale, so the ratio is identical for any sigma.
      for (auto& e : noise) {
        const double x = rng.uniform(-1.0, 1.0);
        const double y = rng.uniform(-1.0, 1.0);
        const double z = rng.uniform(-1.0, 1.0);
        e = sigma * Vec3(x, y, z);
      }
      SigmaRatioTrial st;
      st.m = m;
      st.sigma = sigma;
      st.delta = delta;
      st.sigma_hat = estimate_noise_std(noise, kSigmaFloor * sigma);
      st.ratio = st.sigma_hat / sigma;
      st.lower = interval.lower;
      st.upper = interval.upper;
      st.within_001 = std::abs(st.ratio - centre) <= 0.01;
      st.violated = st.ratio < interval.lower || st.ratio > interval.upper;
      row.within_001 += st.within_001;
      violations += st.violated;
      row.mean_ratio += st.ratio;
      out.trials.push_back(st);
    }
    row.violation_rate = static_cast<double>(violations) / static_cast<double>(trials);
    row.mean_ratio /= static_cast<double>(trials);
    out.summary.push_back(row);
  }
  return out;
}

double hoeffding_violation_rate(std::size_t n, double a, double delta, std::size_t trials, RngSeed seed) {
  require(n >= 1 && trials >= 1, "n and trials must be positive");
  const double bound = hoeffding_bound(static_cast<double>(n), a, delta, 1.0);
  Rng rng(seed);
  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += rng.uniform(-a, a);
    violations += std::abs(sum / static_cast<double>(n)) > bound;
  }
  return static_cast<double>(violations) / static_cast<double>(trials);
}

}  // namespace mmreg
