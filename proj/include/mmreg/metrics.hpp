#ifndef MMREG_METRICS_HPP
#define MMREG_METRICS_HPP

#include <span>
#include <vector>

#include "mmreg/clustering.hpp"
#include "mmreg/geometry.hpp"
#include "mmreg/scene.hpp"

namespace mmreg {

struct PointErrorReport {
  double mean_over_objects = 0.0;
  double mean_over_points = 0.0;
  std::vector<double> per_object;  ///< index j = object j + 1
};

struct PoseErrorReport {
  double rotation = 0.0;     ///< radians, mean over scored predicted clusters
  double translation = 0.0;  ///< meters
  std::vector<double> per_cluster_rotation;     ///< NaN for excluded clusters
  std::vector<double> per_cluster_translation;  ///< NaN for excluded clusters
};

struct EvalReport {
  double point_error = 0.0;
  double rotation_error = 0.0;
  double translation_error = 0.0;
  double mask_iou = 0.0;
  double point_error_per_point = 0.0;
  std::vector<double> per_object_point_error;
  std::vector<double> per_cluster_rotation_error;
  std::vector<double> per_cluster_translation_error;
  std::vector<double> per_cluster_iou;
};

/// Per-cluster IoU against the best-intersecting ground-truth cluster.
std::vector<double> mask_iou_per_cluster(const Clustering& pred, const Clustering& truth);

/// Unweighted mean of mask_iou_per_cluster; 0 for an empty prediction.
double mask_iou(const Clustering& pred, const Clustering& truth);

/// Displacement error of predicted motions over ground-truth object points.
/// Unassigned points are scored as if they did not move.
PointErrorReport point_error(const CorrespondenceSet& cs, const Clustering& pred,
                             std::span<const RigidTransform> pred_models, const LabeledScene& scene);

/// Intersection-weighted rotation/translation error per predicted cluster.
/// Clusters containing only outliers are excluded.
PoseErrorReport pose_error(const Clustering& pred, std::span<const RigidTransform> pred_models,
                           const LabeledScene& scene);

EvalReport evaluate(const Clustering& pred, std::span<const RigidTransform> pred_models,
                    const LabeledScene& scene);

}  // namespace mmreg

#endif  // MMREG_METRICS_HPP
