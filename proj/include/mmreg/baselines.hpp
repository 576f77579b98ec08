#ifndef MMREG_BASELINES_HPP
#define MMREG_BASELINES_HPP

#include <optional>
#include <span>
#include <vector>

#include "mmreg/clustering.hpp"
#include "mmreg/geometry.hpp"

namespace mmreg {

struct RansacConfig {
  double inlier_threshold = 0.01;  ///< residual L2 cutoff
  int max_trials = 500;
  std::size_t min_model_inliers = 10;
  RngSeed seed = 0;

  void validate() const;
};

struct RansacModel {
  RigidTransform transform;
  std::vector<std::size_t> inliers;
};

/// Single-model RANSAC over `active` indices with 3-point Horn hypotheses.
/// Returns nullopt ("no model") if the best consensus is below
/// min_model_inliers. Throws std::invalid_argument if |active| < 3.
std::optional<RansacModel> ransac_single(const CorrespondenceSet& cs,
                                         std::span<const std::size_t> active,
                                         const RansacConfig& cfg);

/// Repeatedly extracts the best RANSAC model and removes its inliers.
/// Leftover points get label 0.
Clustering sequential_ransac(const CorrespondenceSet& cs, const RansacConfig& cfg);

struct TLinkageConfig {
  double tau_t = 0.01;  ///< preference decay constant
  double tau = 0.05;    ///< gate is residual <= 5 tau
  int num_hypotheses = 200;
  RngSeed seed = 0;

  void validate() const;
};

/// exp(-||h a - b|| / tau_t) if the residual is within 5 tau, else 0.
double tlinkage_preference(const Correspondence& c, const RigidTransform& hypothesis,
                           const TLinkageConfig& cfg);

/// 1 - <u,v> / (|u|^2 + |v|^2 - <u,v>). Two zero vectors are at distance 1.
double tanimoto_distance(std::span<const double> u, std::span<const double> v);

/// Agglomerative T-Linkage starting from `initial`. Hypotheses are Horn fits
/// of random 3-point samples drawn inside single initial clusters. Clusters
/// are merged (preference = element-wise min) while some pair has Tanimoto
/// distance below 1.
Clustering tlinkage_cluster(const CorrespondenceSet& cs, const Clustering& initial,
                            const TLinkageConfig& cfg);

}  // namespace mmreg

#endif  // MMREG_BASELINES_HPP
