#include <cmath>
#include <set>

#include "doctest.h"
#include "mmreg/baselines.hpp"
#include "mmreg/metrics.hpp"
#include "mmreg/scene.hpp"
#include "support.hpp"

using namespace mmreg;

namespace {

LabeledScene scene_of(int M, std::size_t per_object, double sigma, std::size_t outliers, RngSeed seed) {
  SceneSpec s;
  s.num_objects = M;
  s.points_per_object.assign(static_cast<std::size_t>(M), per_object);
  s.sigma = sigma;
  s.num_outliers = outliers;
  s.separation_margin = 2.0 * s.tau;
  s.seed = seed;
  return generate_scene(s);
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// True when every cluster of `fine` lies inside a single cluster of `coarse`.
bool is_coarsening(const Clustering& fine, const Clustering& coarse) {
  for (const auto& m : fine.members()) {
    std::set<int> targets;
    for (auto i : m) targets.insert(coarse.labels[i]);
    if (targets.size() != 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("RansacConfig and TLinkageConfig validation") {
  RansacConfig r;
  CHECK_NOTHROW(r.validate());
  r.min_model_inliers = 2;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  TLinkageConfig t;
  CHECK_NOTHROW(t.validate());
  t.tau_t = 0.0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("ransac_single: single noiseless body") {
  Rng rng(1);
  const auto T = test::random_transform(rng);
  const auto cs = test::noiseless_set(rng, T, 100);
  RansacConfig cfg;
  cfg.inlier_threshold = 1e-9;
  const auto idx = all_indices(cs.size());
  const auto m = ransac_single(cs, idx, cfg);
  REQUIRE(m.has_value());
  CHECK(m->inliers.size() == 100);
  CHECK(geodesic_distance(m->transform.rotation, T.rotation) <= 1e-9);
  CHECK((m->transform.translation - T.translation).norm() <= 1e-9);
}

TEST_CASE("ransac_single: 70/30 mix recovers the majority model") {
  Rng rng(2);
  const auto T1 = test::random_transform(rng);
  const auto T2 = test::random_transform(rng);
  CorrespondenceSet cs;
  std::vector<int> label;
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = rng.in_ball(1.0);
    const bool first = i % 10 < 7;
    cs.push_back({a, apply(first ? T1 : T2, a)});
    label.push_back(first ? 1 : 2);
  }
  RansacConfig cfg;
  cfg.inlier_threshold = 1e-6;
  cfg.seed = 3;
  const auto idx = all_indices(cs.size());
  const auto m = ransac_single(cs, idx, cfg);
  REQUIRE(m.has_value());
  std::vector<std::size_t> expected;
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (label[i] == 1) expected.push_back(i);
  CHECK(m->inliers == expected);
}

TEST_CASE("ransac_single: precondition and no-model") {
  CorrespondenceSet cs(2, Correspondence{Vec3::Zero(), Vec3::Zero()});
  const std::vector<std::size_t> two{0, 1};
  CHECK_THROWS_AS(ransac_single(cs, two, RansacConfig{}), std::invalid_argument);

  Rng rng(4);
  CorrespondenceSet noise;
  for (int i = 0; i < 60; ++i) {
    const Vec3 a = rng.in_ball(1.0);
    const Vec3 b = rng.in_ball(3.0);
    noise.push_back({a, b});
  }
  RansacConfig cfg;
  cfg.inlier_threshold = 1e-6;
  const auto idx = all_indices(noise.size());
  CHECK_FALSE(ransac_single(noise, idx, cfg).has_value());
}

TEST_CASE("sequential_ransac: two separated motions") {
  const auto scene = scene_of(2, 300, 0.001, 0, 5);
  RansacConfig cfg;
  cfg.inlier_threshold = std::sqrt(3.0) * 0.001;
  cfg.seed = 1;
  const auto c = sequential_ransac(scene.correspondences, cfg);
  CHECK(c.num_clusters == 2);
  CHECK(mask_iou(c, scene.truth()) >= 0.99);
}

TEST_CASE("sequential_ransac: pure outliers and single body") {
  Rng rng(6);
  CorrespondenceSet noise;
  for (int i = 0; i < 80; ++i) {
    const Vec3 a = rng.in_ball(1.0);
    const Vec3 b = rng.in_ball(3.0);
    noise.push_back({a, b});
  }
  RansacConfig cfg;
  cfg.inlier_threshold = 1e-6;
  const auto c = sequential_ransac(noise, cfg);
  CHECK(c.num_clusters == 0);
  CHECK(c.num_assigned() == 0);

  const auto one = scene_of(1, 200, 0.0, 0, 7);
  cfg.inlier_threshold = 1e-9;
  const auto c1 = sequential_ransac(one.correspondences, cfg);
  CHECK(c1.num_clusters == 1);
  CHECK(c1.num_assigned() == 200);
}

TEST_CASE("sequential_ransac: deterministic partition") {
  const auto scene = scene_of(3, 200, 0.002, 30, 8);
  RansacConfig cfg;
  cfg.inlier_threshold = std::sqrt(3.0) * 0.002;
  cfg.seed = 9;
  const auto a = sequential_ransac(scene.correspondences, cfg);
  const auto b = sequential_ransac(scene.correspondences, cfg);
  CHECK(a == b);
  CHECK(a.size() == scene.correspondences.size());
  for (int l : a.labels) {
    CHECK(l >= 0);
    CHECK(l <= a.num_clusters);
  }
}

TEST_CASE("tlinkage_preference: spot values") {
  TLinkageConfig cfg;
  cfg.tau_t = 0.01;
  cfg.tau = 0.05;
  const auto I = RigidTransform::identity();
  CHECK(tlinkage_preference({Vec3(1, 2, 3), Vec3(1, 2, 3)}, I, cfg) == 1.0);
  CHECK(std::abs(tlinkage_preference({Vec3::Zero(), Vec3(0.01, 0, 0)}, I, cfg) - std::exp(-1.0)) < 1e-15);
  CHECK(tlinkage_preference({Vec3::Zero(), Vec3(0.2501, 0, 0)}, I, cfg) == 0.0);
  CHECK(tlinkage_preference({Vec3::Zero(), Vec3(0.25, 0, 0)}, I, cfg) > 0.0);
}

TEST_CASE("tanimoto_distance: spot values") {
  const std::vector<double> u{1, 0}, v{1, 1}, w{0, 1}, z{0, 0};
  CHECK(tanimoto_distance(u, u) == 0.0);
  CHECK(tanimoto_distance(u, w) == 1.0);
  CHECK(tanimoto_distance(u, v) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tanimoto_distance(z, z) == 1.0);
}

TEST_CASE("tanimoto_distance: axioms on random pairs") {
  Rng rng(10);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + rng.index(20);
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
      v[i] = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    }
    const double d = tanimoto_distance(u, v);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d == tanimoto_distance(v, u));
    bool nonzero = false;
    for (double x : u) nonzero = nonzero || x != 0.0;
    if (nonzero) CHECK(tanimoto_distance(u, u) == 0.0);
  }
}

TEST_CASE("tlinkage_cluster: fragments of one object merge") {
  const auto scene = scene_of(1, 300, 0.0, 0, 11);
  const auto init = make_good_initial_clustering(scene, 2.0, 3, 1);
  REQUIRE(init.num_clusters == 3);
  TLinkageConfig cfg;
  cfg.tau_t = 1e-3;
  const auto c = tlinkage_cluster(scene.correspondences, init, cfg);
  CHECK(c.num_clusters == 1);
  CHECK(is_coarsening(init, c));
}

TEST_CASE("tlinkage_cluster: separate motions do not merge") {
  const auto scene = scene_of(2, 300, 0.0, 0, 12);
  TLinkageConfig cfg;
  cfg.tau_t = 1e-3;
  const auto c = tlinkage_cluster(scene.correspondences, scene.truth(), cfg);
  CHECK(c.num_clusters == 2);
  CHECK(mask_iou(c, scene.truth()) == 1.0);
}

TEST_CASE("tlinkage_cluster: coarsening of the initial partition") {
  const auto scene = scene_of(3, 200, 0.002, 20, 13);
  const auto init = make_good_initial_clustering(scene, 2.0, 3, 2);
  TLinkageConfig cfg;
  cfg.tau_t = 0.002;
  cfg.seed = 4;
  const auto c = tlinkage_cluster(scene.correspondences, init, cfg);
  CHECK(is_coarsening(init, c));
  CHECK(c.num_clusters >= 1);
  CHECK(c.num_clusters <= init.num_clusters);
  CHECK(c == tlinkage_cluster(scene.correspondences, init, cfg));
}

TEST_CASE("tlinkage_cluster: no hypotheses leaves the initial clustering") {
  CorrespondenceSet cs;
  for (int i = 0; i < 6; ++i) cs.push_back({Vec3(i, 0, 0), Vec3(i, 0, 0)});
  const auto init = Clustering::from_labels({1, 1, 2, 2, 3, 3});
  CHECK(tlinkage_cluster(cs, init, TLinkageConfig{}) == init);
}
