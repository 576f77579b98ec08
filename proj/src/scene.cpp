#include "mmreg/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mmreg {

namespace {

constexpr int kPlacementRestarts = 20;
constexpr int kPlacementTries = 2000;
constexpr int kOutlierTries = 100000;
constexpr double kOutlierClearance = 1.5;  // in units of tau
constexpr double kOutlierBRadius = 3.0;    // in units of B

}  // namespace

std::size_t SceneSpec::total_points() const {
  return std::accumulate(points_per_object.begin(), points_per_object.end(), num_outliers);
}

double SceneSpec::effective_object_radius() const {
  return object_radius > 0.0 ? object_radius : 3.0 * tau;
}

void SceneSpec::validate() const {
  if (num_objects < 1) throw std::invalid_argument("num_objects must be positive");
  if (points_per_object.size() != static_cast<std::size_t>(num_objects))
    throw std::invalid_argument("points_per_object must list one count per object");
  for (auto p : points_per_object)
    if (p == 0) throw std::invalid_argument("points_per_object entries must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be >= 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!(bound_B > 0.0) || !std::isfinite(bound_B)) throw std::invalid_argument("B must be positive");
  if (!(separation_margin > tau)) throw std::invalid_argument("separation_margin must exceed tau");
  if (object_radius < 0.0) throw std::invalid_argument("object_radius must be >= 0");
}

namespace {

std::vector<Vec3> place_centers(const SceneSpec& spec, Rng& rng) {
  const double r = spec.effective_object_radius();
  const double room = spec.bound_B - r;
  if (room < 0.0) throw InfeasibleSpec("infeasible scene spec");
  const double min_gap = 2.0 * r + spec.separation_margin;
  for (int restart = 0; restart < kPlacementRestarts; ++restart) {
    std::vector<Vec3> centers;
    for (int j = 0; j < spec.num_objects; ++j) {
      bool ok = false;
      for (int t = 0; t < kPlacementTries && !ok; ++t) {
        const Vec3 c = rng.in_ball(room);
        ok = std::all_of(centers.begin(), centers.end(),
                         [&](const Vec3& o) { return (o - c).norm() >= min_gap; });
        if (ok) centers.push_back(c);
      }
      if (!ok) break;
    }
    if (centers.size() == static_cast<std::size_t>(spec.num_objects)) return centers;
  }
  throw InfeasibleSpec("infeasible scene spec");
}

std::vector<Vec3> grow_blob(const Vec3& center, double radius, double step, std::size_t count,
                            Rng& rng) {
  std::vector<Vec3> pts{center};
  pts.reserve(count);
  while (pts.size() < count) {
    const Vec3& from = pts[rng.index(pts.size())];
    const double s = step * (1.0 - rng.uniform());
    const Vec3 q = from + s * rng.unit_vector();
    if ((q - center).norm() <= radius) pts.push_back(q);
  }
  return pts;
}

Vec3 uniform_noise(double sigma, Rng& rng) {
  const double x = rng.uniform(-sigma, sigma);
  const double y = rng.uniform(-sigma, sigma);
  const double z = rng.uniform(-sigma, sigma);
  return {x, y, z};
}

LabeledScene sample_scene(const SceneSpec& spec, Rng& rng) {
  LabeledScene scene;
  scene.spec = spec;
  const auto centers = place_centers(spec, rng);
  const double r = spec.effective_object_radius();

  std::vector<Vec3> object_points;
  for (int j = 0; j < spec.num_objects; ++j) {
    RigidTransform T{random_rotation(rng), rng.in_ball(spec.bound_B)};
    scene.true_transforms.push_back(T);
    const auto blob =
        grow_blob(centers[static_cast<std::size_t>(j)], r, spec.tau / 2.0,
                  spec.points_per_object[static_cast<std::size_t>(j)], rng);
    for (const auto& a : blob) {
      scene.correspondences.push_back({a, apply(T, a) + uniform_noise(spec.sigma, rng)});
      scene.true_labels.push_back(j + 1);
      object_points.push_back(a);
    }
  }

  const double clearance = kOutlierClearance * spec.tau;
  const SpatialHash grid(object_points, clearance);
  for (std::size_t k = 0; k < spec.num_outliers; ++k) {
    bool placed = false;
    for (int t = 0; t < kOutlierTries && !placed; ++t) {
      const Vec3 a = rng.in_ball(spec.bound_B);
      bool clear = true;
      grid.for_each_within(a, clearance, [&](std::size_t) { clear = false; });
      if (!clear) continue;
      scene.correspondences.push_back({a, rng.in_ball(kOutlierBRadius * spec.bound_B)});
      scene.true_labels.push_back(0);
      placed = true;
    }
    if (!placed) throw InfeasibleSpec("infeasible scene spec");
  }
  return scene;
}

}  // namespace

LabeledScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  for (int attempt = 0; attempt < kPlacementRestarts; ++attempt) {
    auto scene = sample_scene(spec, rng);
    if (validate_scene(scene).pass()) return scene;
  }
  throw InfeasibleSpec("infeasible scene spec");
}

SceneValidation validate_scene(const LabeledScene& scene) {
  SceneValidation v;
  const auto& cs = scene.correspondences;
  const auto& spec = scene.spec;
  const int M = spec.num_objects;

  std::vector<std::vector<Vec3>> parts(static_cast<std::size_t>(M));
  std::vector<Vec3> outliers;
  double max_noise = 0.0;
  double max_norm = 0.0;
  bool labels_ok = cs.size() == scene.true_labels.size() &&
                   scene.true_transforms.size() == static_cast<std::size_t>(M);
  for (std::size_t i = 0; labels_ok && i < cs.size(); ++i) {
    const int l = scene.true_labels[i];
    if (l < 0 || l > M) {
      labels_ok = false;
      break;
    }
    max_norm = std::max(max_norm, cs[i].a.norm());
    if (l == 0) {
      outliers.push_back(cs[i].a);
      continue;
    }
    const auto& T = scene.true_transforms[static_cast<std::size_t>(l - 1)];
    max_noise = std::max(max_noise, (cs[i].b - apply(T, cs[i].a)).cwiseAbs().maxCoeff());
    parts[static_cast<std::size_t>(l - 1)].push_back(cs[i].a);
  }
  if (!labels_ok) return v;

  v.max_noise = max_noise;
  v.noise = max_noise <= spec.sigma + 1e-12;
  v.bounded = max_norm <= spec.bound_B * (1.0 + 1e-12);

  double min_sep = std::numeric_limits<double>::infinity();
  for (int x = 0; x < M; ++x)
    for (int y = x + 1; y < M; ++y)
      for (const auto& p : parts[static_cast<std::size_t>(x)])
        min_sep = std::min(min_sep, d_cluster(parts[static_cast<std::size_t>(y)], p));
  v.min_separation = min_sep;
  v.separation = min_sep > spec.tau;

  double min_out = std::numeric_limits<double>::infinity();
  for (const auto& o : outliers)
    for (const auto& part : parts) min_out = std::min(min_out, d_cluster(part, o));
  v.min_outlier_distance = min_out;
  v.outliers = min_out > spec.tau;

  v.connected = std::all_of(parts.begin(), parts.end(), [&](const std::vector<Vec3>& p) {
    return !p.empty() && is_tau_connected(p, spec.tau);
  });
  return v;
}

Clustering make_good_initial_clustering(const LabeledScene& scene, double alpha, int num_fragments,
                                        RngSeed seed,
                                        const std::optional<std::vector<double>>& fragment_weights) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  if (num_fragments < 1) throw std::invalid_argument("num_fragments must be >= 1");
  const auto F = static_cast<std::size_t>(num_fragments);

  std::vector<double> weights(F, 1.0);
  weights[0] = 2.0 * alpha;
  if (fragment_weights) {
    if (fragment_weights->size() != F)
      throw std::invalid_argument("fragment_weights must have num_fragments entries");
    weights = *fragment_weights;
    for (double w : weights)
      if (!(w > 0.0)) throw std::invalid_argument("fragment weights must be positive");
  }
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);

  const auto& cs = scene.correspondences;
  Clustering out{std::vector<int>(cs.size(), 0), 0};
  for (int g = 1; g <= scene.spec.num_objects; ++g) {
    std::vector<std::size_t> idx;
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (scene.true_labels[i] == g) {
        idx.push_back(i);
        pts.push_back(cs[i].a);
      }
    std::vector<std::size_t> sizes(F);
    std::size_t assigned = 0;
    for (std::size_t f = 0; f < F; ++f) {
      sizes[f] = static_cast<std::size_t>(std::floor(static_cast<double>(idx.size()) * weights[f] / wsum));
      assigned += sizes[f];
    }
    const auto largest =
        static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
    sizes[largest] += idx.size() - assigned;
    for (std::size_t f = 0; f < F; ++f) {
      if (sizes[f] == 0) throw std::invalid_argument("object too small for requested fragments");
      if (f != largest && !(static_cast<double>(sizes[largest]) > alpha * static_cast<double>(sizes[f])))
        throw std::invalid_argument("fragment sizes cannot satisfy the alpha ratio");
    }

    const auto frag = fragment_cluster(pts, scene.spec.tau, sizes, derive_seed(seed, static_cast<std::uint64_t>(g)));
    for (std::size_t k = 0; k < idx.size(); ++k)
      out.labels[idx[k]] = out.num_clusters + 1 + frag[k];
    out.num_clusters += num_fragments;
  }

  CorrespondenceSet outlier_cs;
  std::vector<std::size_t> outlier_idx;
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (scene.true_labels[i] == 0) {
      outlier_cs.push_back(cs[i]);
      outlier_idx.push_back(i);
    }
  if (!outlier_cs.empty()) {
    const auto oc = euclidean_cluster(outlier_cs, scene.spec.tau);
    for (std::size_t k = 0; k < outlier_idx.size(); ++k)
      out.labels[outlier_idx[k]] = out.num_clusters + oc.labels[k];
    out.num_clusters += oc.num_clusters;
  }

  out = canonicalize(out);
  if (!check_goodness(out, scene, alpha, 1).pass)
    throw std::runtime_error("make_good_initial_clustering: constructed clustering is not good");
  return out;
}

GoodnessReport check_goodness(const Clustering& clustering, const LabeledScene& scene, double alpha,
                              std::size_t m0) {
  return check_goodness(clustering, scene.correspondences, scene.true_labels, scene.spec.num_objects,
                        scene.spec.tau, alpha, m0);
}

}  // namespace mmreg
