#include "mmreg/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mmreg {

namespace {

// counts[p][g]: points with predicted label p (>= 1) and truth label g (>= 0).
std::vector<std::vector<std::size_t>> contingency(const Clustering& pred, const Clustering& truth) {
  std::vector<std::vector<std::size_t>> counts(
      static_cast<std::size_t>(pred.num_clusters),
      std::vector<std::size_t>(static_cast<std::size_t>(truth.num_clusters) + 1, 0));
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred.labels[i] > 0)
      ++counts[static_cast<std::size_t>(pred.labels[i] - 1)][static_cast<std::size_t>(truth.labels[i])];
  return counts;
}

void check_models(const Clustering& pred, std::span<const RigidTransform> models) {
  if (models.size() < static_cast<std::size_t>(pred.num_clusters))
    throw std::invalid_argument("every predicted cluster needs a model");
}

}  // namespace

std::vector<double> mask_iou_per_cluster(const Clustering& pred, const Clustering& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("mask_iou: length mismatch");
  const auto counts = contingency(pred, truth);
  const auto truth_sizes = truth.cluster_sizes();
  std::vector<double> out;
  for (const auto& row : counts) {
    const std::size_t pred_size = std::accumulate(row.begin(), row.end(), std::size_t{0});
    if (pred_size == 0) continue;
    std::size_t best_g = 1, best = 0;
    for (std::size_t g = 1; g < row.size(); ++g)
      if (row[g] > best) {
        best = row[g];
        best_g = g;
      }
    if (truth_sizes.empty()) {
      out.push_back(0.0);
      continue;
    }
    const std::size_t uni = pred_size + truth_sizes[best_g - 1] - best;
    out.push_back(static_cast<double>(best) / static_cast<double>(uni));
  }
  return out;
}

double mask_iou(const Clustering& pred, const Clustering& truth) {
  const auto per = mask_iou_per_cluster(pred, truth);
  if (per.empty()) return 0.0;
  return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(per.size());
}

PointErrorReport point_error(const CorrespondenceSet& cs, const Clustering& pred,
                             std::span<const RigidTransform> pred_models, const LabeledScene& scene) {
  if (pred.size() != cs.size() || scene.true_labels.size() != cs.size())
    throw std::invalid_argument("point_error: length mismatch");
  check_models(pred, pred_models);
  const auto M = static_cast<std::size_t>(scene.spec.num_objects);
  std::vector<double> sum(M, 0.0);
  std::vector<std::size_t> count(M, 0);
  double total = 0.0;
  std::size_t total_count = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const int g = scene.true_labels[i];
    if (g <= 0) continue;
    const Vec3 truth = apply(scene.true_transforms[static_cast<std::size_t>(g - 1)], cs[i].a);
    const int p = pred.labels[i];
    const Vec3 moved = p > 0 ? apply(pred_models[static_cast<std::size_t>(p - 1)], cs[i].a) : cs[i].a;
    const double e = (moved - truth).norm();
    sum[static_cast<std::size_t>(g - 1)] += e;
    ++count[static_cast<std::size_t>(g - 1)];
    total += e;
    ++total_count;
  }
  PointErrorReport rep;
  std::size_t objects = 0;
  for (std::size_t j = 0; j < M; ++j) {
    const double m = count[j] ? sum[j] / static_cast<double>(count[j]) : 0.0;
    rep.per_object.push_back(m);
    if (count[j]) {
      rep.mean_over_objects += m;
      ++objects;
    }
  }
  if (objects) rep.mean_over_objects /= static_cast<double>(objects);
  if (total_count) rep.mean_over_points = total / static_cast<double>(total_count);
  return rep;
}

PoseErrorReport pose_error(const Clustering& pred, std::span<const RigidTransform> pred_models,
                           const LabeledScene& scene) {
  if (pred.size() != scene.true_labels.size()) throw std::invalid_argument("pose_error: length mismatch");
  check_models(pred, pred_models);
  const auto counts = contingency(pred, scene.truth());
  PoseErrorReport rep;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t scored = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const auto& row = counts[k];
    const std::size_t size = std::accumulate(row.begin(), row.end(), std::size_t{0});
    const std::size_t on_objects = size - row[0];
    if (size == 0 || on_objects == 0) {
      rep.per_cluster_rotation.push_back(nan);
      rep.per_cluster_translation.push_back(nan);
      continue;
    }
    double rot = 0.0, trans = 0.0;
    for (std::size_t g = 1; g < row.size(); ++g) {
      if (row[g] == 0) continue;
      const double w = static_cast<double>(row[g]) / static_cast<double>(size);
      const auto& gt = scene.true_transforms[g - 1];
      rot += w * geodesic_distance(pred_models[k].rotation, gt.rotation);
      trans += w * (pred_models[k].translation - gt.translation).norm();
    }
    rep.per_cluster_rotation.push_back(rot);
    rep.per_cluster_translation.push_back(trans);
    rep.rotation += rot;
    rep.translation += trans;
    ++scored;
  }
  if (scored) {
    rep.rotation /= static_cast<double>(scored);
    rep.translation /= static_cast<double>(scored);
  }
  return rep;
}

EvalReport evaluate(const Clustering& pred, std::span<const RigidTransform> pred_models,
                    const LabeledScene& scene) {
  EvalReport rep;
  const auto pe = point_error(scene.correspondences, pred, pred_models, scene);
  const auto pose = pose_error(pred, pred_models, scene);
  rep.point_error = pe.mean_over_objects;
  rep.point_error_per_point = pe.mean_over_points;
  rep.per_object_point_error = pe.per_object;
  rep.rotation_error = pose.rotation;
  rep.translation_error = pose.translation;
  rep.per_cluster_rotation_error = pose.per_cluster_rotation;
  rep.per_cluster_translation_error = pose.per_cluster_translation;
  rep.per_cluster_iou = mask_iou_per_cluster(pred, scene.truth());
  rep.mask_iou = mask_iou(pred, scene.truth());
  return rep;
}

}  // namespace mmreg
