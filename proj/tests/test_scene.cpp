#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mmreg/horn.hpp"
#include "mmreg/io.hpp"
#include "mmreg/scene.hpp"
#include "support.hpp"

using namespace mmreg;

namespace {

SceneSpec three_objects(RngSeed seed, double sigma = 0.01, std::size_t outliers = 0) {
  SceneSpec s;
  s.points_per_object = {400, 400, 400};
  s.sigma = sigma;
  s.separation_margin = 2.0 * s.tau;
  s.num_outliers = outliers;
  s.seed = seed;
  return s;
}

std::string serialize(const LabeledScene& scene) {
  std::ostringstream os;
  write_scene(os, scene);
  return os.str();
}

}  // namespace

TEST_CASE("SceneSpec: validation") {
  SceneSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.total_points() == 1500);
  CHECK(s.effective_object_radius() == doctest::Approx(3 * s.tau));
  s.separation_margin = s.tau;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = SceneSpec{};
  s.points_per_object = {10, 10};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = SceneSpec{};
  s.sigma = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = SceneSpec{};
  s.tau = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("generate_scene: single noiseless object is recovered exactly") {
  SceneSpec s;
  s.num_objects = 1;
  s.points_per_object = {100};
  s.seed = 4;
  const auto scene = generate_scene(s);
  CHECK(scene.correspondences.size() == 100);
  const auto est = horn_register(scene.correspondences);
  CHECK(geodesic_distance(est.transform.rotation, scene.true_transforms[0].rotation) <= 1e-9);
  CHECK((est.transform.translation - scene.true_transforms[0].translation).norm() <= 1e-9);
}

TEST_CASE("generate_scene: three objects pass validation") {
  for (RngSeed seed = 0; seed < 5; ++seed) {
    const auto scene = generate_scene(three_objects(seed, 0.01, 30));
    const auto v = validate_scene(scene);
    CHECK(v.noise);
    CHECK(v.separation);
    CHECK(v.bounded);
    CHECK(v.outliers);
    CHECK(v.connected);
    CHECK(v.max_noise <= 0.01);
    CHECK(v.min_separation > scene.spec.tau);
    CHECK(v.min_outlier_distance > scene.spec.tau);
    CHECK(scene.correspondences.size() == 1230);
    CHECK(std::count(scene.true_labels.begin(), scene.true_labels.end(), 0) == 30);
    for (const auto& T : scene.true_transforms) CHECK(test::so3_valid(T.rotation.matrix()));
  }
}

TEST_CASE("generate_scene: deterministic under seed") {
  const auto a = generate_scene(three_objects(9, 0.01, 10));
  const auto b = generate_scene(three_objects(9, 0.01, 10));
  CHECK(serialize(a) == serialize(b));
  const auto c = generate_scene(three_objects(10, 0.01, 10));
  CHECK(serialize(a) != serialize(c));
}

TEST_CASE("generate_scene: infeasible packing") {
  SceneSpec s;
  s.num_objects = 40;
  s.points_per_object.assign(40, 50);
  s.tau = 0.3;
  s.separation_margin = 0.6;
  CHECK_THROWS_WITH_AS(generate_scene(s), "infeasible scene spec", InfeasibleSpec);
}

TEST_CASE("validate_scene: constructed violations") {
  auto scene = generate_scene(three_objects(2, 0.01, 5));
  REQUIRE(validate_scene(scene).pass());

  auto relabeled = scene;
  relabeled.true_labels[0] = 0;
  CHECK_FALSE(validate_scene(relabeled).outliers);

  auto overstated = scene;
  overstated.spec.sigma *= 10.0;
  CHECK(validate_scene(overstated).noise);

  auto understated = scene;
  understated.spec.sigma *= 0.1;
  CHECK_FALSE(validate_scene(understated).noise);

  auto shrunk = scene;
  shrunk.spec.bound_B = 0.1;
  CHECK_FALSE(validate_scene(shrunk).bounded);
}

TEST_CASE("generate_scene: noise variance approaches sigma^2 / 3") {
  SceneSpec s;
  s.num_objects = 1;
  s.points_per_object = {100000};
  s.sigma = 0.02;
  s.object_radius = 0.5;
  s.seed = 1;
  const auto scene = generate_scene(s);
  const auto& T = scene.true_transforms[0];
  Eigen::Vector3d mean = Eigen::Vector3d::Zero(), sq = Eigen::Vector3d::Zero();
  for (const auto& c : scene.correspondences) {
    const Vec3 e = c.b - apply(T, c.a);
    mean += e;
    sq += e.cwiseProduct(e);
  }
  const double n = static_cast<double>(scene.correspondences.size());
  mean /= n;
  const Vec3 var = sq / n - mean.cwiseProduct(mean);
  const double expected = s.sigma * s.sigma / 3.0;
  for (int k = 0; k < 3; ++k) CHECK(std::abs(var[k] - expected) <= 0.03 * expected);
}

TEST_CASE("make_good_initial_clustering: one fragment is the ground truth") {
  const auto scene = generate_scene(three_objects(5));
  const auto c = make_good_initial_clustering(scene, 2.0, 1, 1);
  CHECK(canonicalize(c) == canonicalize(scene.truth()));
}

TEST_CASE("make_good_initial_clustering: 4:1:1 split passes goodness") {
  SceneSpec s = three_objects(6);
  s.num_objects = 2;
  s.points_per_object = {600, 600};
  const auto scene = generate_scene(s);
  const std::vector<double> weights{4, 1, 1};
  const auto c = make_good_initial_clustering(scene, 2.0, 3, 2, weights);
  CHECK(c.num_clusters == 6);
  const auto r = check_goodness(c, scene, 2.0, 50);
  CHECK(r.pass);
  for (double a : r.object_alpha) CHECK(a >= 2.0);
}

TEST_CASE("make_good_initial_clustering: default split with outliers") {
  const auto scene = generate_scene(three_objects(7, 0.005, 40));
  const auto c = make_good_initial_clustering(scene, 2.0, 3, 3);
  const auto r = check_goodness(c, scene, 2.0, 1);
  CHECK(r.pass);
  CHECK(r.pure);
  // Every point is in some cluster.
  CHECK(c.num_assigned() == scene.correspondences.size());
}

TEST_CASE("make_good_initial_clustering: infeasible ratio") {
  const auto scene = generate_scene(three_objects(8));
  const std::vector<double> equal{1, 1};
  CHECK_THROWS_AS(make_good_initial_clustering(scene, 2.0, 2, 1, equal), std::invalid_argument);
}
