#include "mmreg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmreg/horn.hpp"

namespace mmreg {

void RansacConfig::validate() const {
  if (!(inlier_threshold > 0.0)) throw std::invalid_argument("ransac: inlier_threshold must be positive");
  if (max_trials < 1) throw std::invalid_argument("ransac: max_trials must be positive");
  if (min_model_inliers < 3) throw std::invalid_argument("ransac: min_model_inliers must be >= 3");
}

void TLinkageConfig::validate() const {
  if (!(tau_t > 0.0)) throw std::invalid_argument("tlinkage: tau_t must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("tlinkage: tau must be positive");
  if (num_hypotheses < 0) throw std::invalid_argument("tlinkage: num_hypotheses must be >= 0");
}

namespace {

std::array<std::size_t, 3> sample_three(std::span<const std::size_t> pool, Rng& rng) {
  const std::size_t i = rng.index(pool.size());
  std::size_t j = rng.index(pool.size() - 1);
  if (j >= i) ++j;
  std::size_t k = rng.index(pool.size() - 2);
  const std::size_t lo = std::min(i, j), hi = std::max(i, j);
  if (k >= lo) ++k;
  if (k >= hi) ++k;
  return {pool[i], pool[j], pool[k]};
}

std::vector<std::size_t> inliers_of(const CorrespondenceSet& cs, std::span<const std::size_t> active,
                                    const RigidTransform& T, double threshold) {
  std::vector<std::size_t> out;
  for (auto i : active)
    if ((cs[i].b - apply(T, cs[i].a)).norm() <= threshold) out.push_back(i);
  return out;
}

}  // namespace

std::optional<RansacModel> ransac_single(const CorrespondenceSet& cs,
                                         std::span<const std::size_t> active,
                                         const RansacConfig& cfg) {
  cfg.validate();
  if (active.size() < 3) throw std::invalid_argument("ransac_single: fewer than 3 active points");
  Rng rng(cfg.seed);

  std::size_t best_count = 0;
  RigidTransform best;
  for (int trial = 0; trial < cfg.max_trials; ++trial) {
    const auto s = sample_three(active, rng);
    const auto est = horn_register(cs, s);
    std::size_t count = 0;
    for (auto i : active)
      count += (cs[i].b - apply(est.transform, cs[i].a)).norm() <= cfg.inlier_threshold;
    // Strict improvement keeps the earliest trial on ties.
    if (count > best_count) {
      best_count = count;
      best = est.transform;
    }
  }
  if (best_count < cfg.min_model_inliers) return std::nullopt;

  auto inliers = inliers_of(cs, active, best, cfg.inlier_threshold);
  RansacModel model{horn_register(cs, inliers).transform, {}};
  model.inliers = inliers_of(cs, active, model.transform, cfg.inlier_threshold);
  if (model.inliers.size() < cfg.min_model_inliers) return std::nullopt;
  return model;
}

Clustering sequential_ransac(const CorrespondenceSet& cs, const RansacConfig& cfg) {
  cfg.validate();
  Clustering out{std::vector<int>(cs.size(), 0), 0};
  std::vector<std::size_t> remaining(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) remaining[i] = i;

  for (std::uint64_t round = 0; remaining.size() >= std::max<std::size_t>(cfg.min_model_inliers, 3);
       ++round) {
    RansacConfig round_cfg = cfg;
    round_cfg.seed = derive_seed(cfg.seed, round);
    const auto model = ransac_single(cs, remaining, round_cfg);
    if (!model) break;
    ++out.num_clusters;
    for (auto i : model->inliers) out.labels[i] = out.num_clusters;
    std::erase_if(remaining, [&](std::size_t i) { return out.labels[i] != 0; });
  }
  return out;
}

double tlinkage_preference(const Correspondence& c, const RigidTransform& hypothesis,
                           const TLinkageConfig& cfg) {
  const double d = (apply(hypothesis, c.a) - c.b).norm();
  if (d > 5.0 * cfg.tau) return 0.0;
  return std::exp(-d / cfg.tau_t);
}

double tanimoto_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("tanimoto_distance: length mismatch");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double denom = uu + vv - uv;
  if (denom <= 0.0) return 1.0;
  return std::clamp(1.0 - uv / denom, 0.0, 1.0);
}

Clustering tlinkage_cluster(const CorrespondenceSet& cs, const Clustering& initial,
                            const TLinkageConfig& cfg) {
  cfg.validate();
  if (initial.size() != cs.size()) throw std::invalid_argument("tlinkage_cluster: length mismatch");
  auto members = initial.members();

  std::vector<std::size_t> sampleable;
  for (std::size_t k = 0; k < members.size(); ++k)
    if (members[k].size() >= 3) sampleable.push_back(k);
  if (cfg.num_hypotheses == 0 || sampleable.empty()) return initial;

  Rng rng(cfg.seed);
  std::vector<RigidTransform> hyps;
  hyps.reserve(static_cast<std::size_t>(cfg.num_hypotheses));
  for (int h = 0; h < cfg.num_hypotheses; ++h) {
    const auto& pool = members[sampleable[rng.index(sampleable.size())]];
    hyps.push_back(horn_register(cs, sample_three(pool, rng)).transform);
  }

  // Per-cluster preference: element-wise min over members.
  const std::size_t K = members.size();
  std::vector<std::vector<double>> pref(K, std::vector<double>(hyps.size(), 0.0));
  std::vector<bool> alive(K, false);
  for (std::size_t k = 0; k < K; ++k) {
    if (members[k].empty()) continue;
    alive[k] = true;
    for (std::size_t h = 0; h < hyps.size(); ++h) {
      double m = 1.0;
      for (auto i : members[k]) m = std::min(m, tlinkage_preference(cs[i], hyps[h], cfg));
      pref[k][h] = m;
    }
  }

  std::vector<std::size_t> owner(K);
  for (std::size_t k = 0; k < K; ++k) owner[k] = k;
  for (;;) {
    double best = 1.0;
    std::size_t bx = K, by = K;
    for (std::size_t x = 0; x < K; ++x) {
      if (!alive[x]) continue;
      for (std::size_t y = x + 1; y < K; ++y) {
        if (!alive[y]) continue;
        const double d = tanimoto_distance(pref[x], pref[y]);
        if (d < best) {
          best = d;
          bx = x;
          by = y;
        }
      }
    }
    if (bx == K) break;
    for (std::size_t h = 0; h < hyps.size(); ++h) pref[bx][h] = std::min(pref[bx][h], pref[by][h]);
    alive[by] = false;
    for (auto& o : owner)
      if (o == by) o = bx;
  }

  Clustering out = initial;
  for (int& l : out.labels)
    if (l > 0) l = static_cast<int>(owner[static_cast<std::size_t>(l - 1)]) + 1;
  return canonicalize(out);
}

}  // namespace mmreg
