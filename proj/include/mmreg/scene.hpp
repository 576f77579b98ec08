#ifndef MMREG_SCENE_HPP
#define MMREG_SCENE_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmreg/clustering.hpp"
#include "mmreg/geometry.hpp"

namespace mmreg {

/// Raised when a SceneSpec cannot be realized.
class InfeasibleSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SceneSpec {
  int num_objects = 3;
  std::vector<std::size_t> points_per_object{500, 500, 500};
  double sigma = 0.0;        ///< half-width of the uniform per-axis noise
  double tau = 0.05;         ///< connectivity radius
  double bound_B = 1.0;      ///< ||a_i|| <= B
  std::size_t num_outliers = 0;
  double separation_margin = 0.1;  ///< minimum gap between objects, > tau
  double object_radius = 0.0;      ///< blob radius; 0 selects 3 * tau
  RngSeed seed = 0;

  std::size_t total_points() const;
  double effective_object_radius() const;
  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  bool operator==(const SceneSpec&) const = default;
};

struct LabeledScene {
  CorrespondenceSet correspondences;
  std::vector<int> true_labels;  ///< 0 = outlier, 1..M = object
  std::vector<RigidTransform> true_transforms;
  SceneSpec spec;

  /// Ground-truth partition; outliers carry label 0.
  Clustering truth() const { return Clustering{true_labels, spec.num_objects}; }
};

struct SceneValidation {
  bool noise = false;
  bool separation = false;
  bool bounded = false;
  bool outliers = false;
  bool connected = false;
  double max_noise = 0.0;          ///< largest ||b - R a - t||_inf over object points
  double min_separation = 0.0;     ///< smallest inter-object a-distance
  double min_outlier_distance = 0.0;

  bool pass() const { return noise && separation && bounded && outliers && connected; }
};

/// Samples a scene: tau-connected random-growth blobs, uniform bounded
/// noise, outliers kept more than 1.5 tau from every object.
/// Throws InfeasibleSpec("infeasible scene spec") when packing fails.
LabeledScene generate_scene(const SceneSpec& spec);

/// Brute-force check of the four ground-truth conditions plus per-object
/// tau-connectivity.
SceneValidation validate_scene(const LabeledScene& scene);

/// Splits every object into `num_fragments` tau-connected fragments whose
/// largest exceeds `alpha` times every other; outliers become their own
/// Euclidean clusters. `fragment_weights` overrides the default size ratio
/// 2*alpha : 1 : ... : 1. Throws std::invalid_argument when the requested
/// sizes cannot meet the ratio.
Clustering make_good_initial_clustering(const LabeledScene& scene, double alpha,
                                        int num_fragments, RngSeed seed,
                                        const std::optional<std::vector<double>>& fragment_weights = {});

GoodnessReport check_goodness(const Clustering& clustering, const LabeledScene& scene,
                              double alpha, std::size_t m0);

}  // namespace mmreg

#endif  // MMREG_SCENE_HPP
