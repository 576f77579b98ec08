#ifndef MMREG_EM_HPP
#define MMREG_EM_HPP

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "mmreg/clustering.hpp"
#include "mmreg/geometry.hpp"
#include "mmreg/horn.hpp"

namespace mmreg {

enum class TieBreak { LowestId };

struct EMConfig {
  double tau = 0.05;
  std::size_t m_min = 10;  ///< clusters smaller than this are dissolved
  int max_iters = 100;
  double sigma_floor = kSigmaFloor;
  TieBreak tie_break = TieBreak::LowestId;

  void validate() const;
};

struct ClusterModel {
  RigidTransform transform;
  double sigma_hat = kSigmaFloor;
  double weight = 0.0;  ///< mixing weight pi_j
};

/// One record per EM iteration, describing the models fitted at its start.
struct EMTraceRecord {
  int iteration = 0;
  std::vector<std::size_t> sizes;
  std::vector<double> weights;
  std::vector<double> sigma_hats;
  std::size_t changes = 0;
};

struct EMResult {
  Clustering clustering;
  std::vector<ClusterModel> models;
  int iterations_run = 0;
  bool converged = false;
  std::vector<std::size_t> changes_per_iteration;
  std::vector<EMTraceRecord> trace;
};

/// Raised when pruning leaves nothing to fit.
class NoViableClusters : public std::runtime_error {
 public:
  NoViableClusters() : std::runtime_error("no viable clusters") {}
};

/// Horn fit per cluster plus mixing weights pi_j = |H_j| / (assigned points).
/// Throws std::logic_error if a cluster has fewer than 3 points.
std::vector<ClusterModel> fit_models(const CorrespondenceSet& cs, const Clustering& clustering,
                                     const EMConfig& cfg);

/// Log of pi_j * phi_j(b | a), up to the constant -1.5 log(2 pi).
double log_weighted_density(const ClusterModel& model, const Correspondence& c);

/// Weighted-likelihood matrix (n x K). Row i is the posterior over all
/// clusters, then each entry is zeroed unless the point lies strictly within
/// tau of that cluster's current members (a-coordinates).
Eigen::MatrixXd e_step(const CorrespondenceSet& cs, const Clustering& clustering,
                       const std::vector<ClusterModel>& models, const EMConfig& cfg);

/// Classification step: argmax per row, ties to the lowest id, all-zero rows
/// keep their previous label.
Clustering m_step(const Eigen::MatrixXd& W, const Clustering& previous, const EMConfig& cfg);

/// Dissolves clusters smaller than m_min (points become label 0) and compacts ids.
Clustering prune_small(const Clustering& clustering, const EMConfig& cfg);

/// Classification EM: {prune, fit, E-step, M-step} until no assignment changes
/// or max_iters. Throws NoViableClusters if every cluster gets pruned.
EMResult run_em(const CorrespondenceSet& cs, const Clustering& initial, const EMConfig& cfg);

}  // namespace mmreg

#endif  // MMREG_EM_HPP
