#include <cmath>

#include "doctest.h"
#include "mmreg/em.hpp"
#include "mmreg/metrics.hpp"
#include "mmreg/scene.hpp"
#include "support.hpp"

using namespace mmreg;

namespace {

std::vector<Vec3> line_points(std::size_t n, double spacing, const Vec3& origin) {
  std::vector<Vec3> p;
  for (std::size_t i = 0; i < n; ++i) p.push_back(origin + Vec3(spacing * static_cast<double>(i), 0, 0));
  return p;
}

LabeledScene small_scene(RngSeed seed, double sigma, std::size_t per_object = 400) {
  SceneSpec s;
  s.points_per_object.assign(3, per_object);
  s.sigma = sigma;
  s.separation_margin = 2.0 * s.tau;
  s.seed = seed;
  return generate_scene(s);
}

}  // namespace

TEST_CASE("EMConfig: validation") {
  EMConfig c;
  CHECK_NOTHROW(c.validate());
  c.m_min = 2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = EMConfig{};
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = EMConfig{};
  c.tau = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("fit_models: single noiseless cluster recovers the pose") {
  SceneSpec s;
  s.num_objects = 1;
  s.points_per_object = {200};
  s.seed = 2;
  const auto scene = generate_scene(s);
  const auto models = fit_models(scene.correspondences, scene.truth(), EMConfig{});
  REQUIRE(models.size() == 1);
  CHECK(models[0].weight == 1.0);
  CHECK(geodesic_distance(models[0].transform.rotation, scene.true_transforms[0].rotation) <= 1e-9);
  CHECK((models[0].transform.translation - scene.true_transforms[0].translation).norm() <= 1e-9);
}

TEST_CASE("fit_models: weights follow cluster sizes") {
  Rng rng(3);
  CorrespondenceSet cs;
  std::vector<int> labels;
  for (int i = 0; i < 400; ++i) {
    const Vec3 a = rng.in_ball(1.0);
    cs.push_back({a, a});
    labels.push_back(i < 300 ? 1 : 2);
  }
  const auto models = fit_models(cs, Clustering::from_labels(labels), EMConfig{});
  CHECK(models[0].weight == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(models[1].weight == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::abs(models[0].weight + models[1].weight - 1.0) < 1e-9);
}

TEST_CASE("fit_models: rejects clusters below three points") {
  CorrespondenceSet cs(5, Correspondence{Vec3::Zero(), Vec3::Zero()});
  CHECK_THROWS_AS(fit_models(cs, Clustering::from_labels({1, 1, 1, 2, 2}), EMConfig{}), std::logic_error);
}

TEST_CASE("fit_models: sigma_hat tracks sigma / sqrt(3) on a good split") {
  const double sigma = 0.05;
  SceneSpec s;
  s.points_per_object.assign(3, 3000);
  s.sigma = sigma;
  s.separation_margin = 2.0 * s.tau;
  s.seed = 5;
  const auto scene = generate_scene(s);
  const auto init = make_good_initial_clustering(scene, 2.0, 3, 1);
  for (const auto& m : fit_models(scene.correspondences, init, EMConfig{}))
    CHECK(std::abs(m.sigma_hat - sigma / std::sqrt(3.0)) <= 0.15 * sigma / std::sqrt(3.0));
}

TEST_CASE("e_step: identical models keep the mixing weights") {
  CorrespondenceSet cs;
  std::vector<int> labels;
  for (const auto& a : line_points(6, 0.01, Vec3::Zero())) {
    cs.push_back({a, a});
    labels.push_back(static_cast<int>(labels.size()) < 4 ? 1 : 2);
  }
  const std::vector<ClusterModel> models{{RigidTransform::identity(), 0.01, 2.0 / 3.0},
                                         {RigidTransform::identity(), 0.01, 1.0 / 3.0}};
  const auto W = e_step(cs, Clustering::from_labels(labels), models, EMConfig{});
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    CHECK(W(i, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(W(i, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("e_step: far point gets an all-zero row") {
  CorrespondenceSet cs;
  for (const auto& a : line_points(5, 0.01, Vec3::Zero())) cs.push_back({a, a});
  cs.push_back({Vec3(5, 5, 5), Vec3(5, 5, 5)});
  const Clustering c = Clustering::from_labels({1, 1, 1, 1, 1, 0});
  const std::vector<ClusterModel> models{{RigidTransform::identity(), 0.01, 1.0}};
  const auto W = e_step(cs, c, models, EMConfig{});
  CHECK(W(5, 0) == 0.0);
  CHECK(W(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("e_step: density ratio at three sigma") {
  const double s = 0.01;
  CorrespondenceSet cs;
  for (const auto& a : line_points(4, 0.01, Vec3::Zero())) cs.push_back({a, a});
  const Clustering c = Clustering::from_labels({1, 1, 2, 2});
  const RigidTransform shifted{RotationMatrix::identity(), Vec3(3 * s, 0, 0)};
  const std::vector<ClusterModel> models{{RigidTransform::identity(), s, 0.5}, {shifted, s, 0.5}};
  const auto W = e_step(cs, c, models, EMConfig{});
  CHECK(std::abs(W(0, 0) / W(0, 1) - std::exp(4.5)) < 0.5);
  CHECK(std::abs(W(0, 0) / W(0, 1) - std::exp(4.5)) < 1e-9 * std::exp(4.5));
}

TEST_CASE("e_step: rows sum to one when every indicator passes") {
  const auto scene = small_scene(4, 0.002, 200);
  const auto& cs = scene.correspondences;
  // One tau-connected initial cluster spanning the first object plus
  // fragments, so every point has all clusters within reach of itself.
  const auto init = make_good_initial_clustering(scene, 2.0, 2, 3);
  EMConfig cfg;
  cfg.tau = 10.0;  // every indicator passes
  const auto models = fit_models(cs, init, cfg);
  const auto W = e_step(cs, init, models, cfg);
  for (Eigen::Index i = 0; i < W.rows(); ++i) CHECK(std::abs(W.row(i).sum() - 1.0) <= 1e-9);

  cfg.tau = scene.spec.tau;
  const auto Wg = e_step(cs, init, models, cfg);
  for (Eigen::Index i = 0; i < Wg.rows(); ++i) {
    const double r = Wg.row(i).sum();
    CHECK(r >= 0.0);
    CHECK(r <= 1.0 + 1e-12);
  }
}

TEST_CASE("m_step: argmax, ties and retention") {
  Eigen::MatrixXd W(3, 3);
  W << 0.9, 0.1, 0.0,  //
      0.5, 0.5, 0.0,   //
      0.0, 0.0, 0.0;
  const auto next = m_step(W, Clustering::from_labels({2, 2, 3}), EMConfig{});
  CHECK(next.labels == std::vector<int>{1, 1, 3});
  const auto kept0 = m_step(W, Clustering{{2, 2, 0}, 3}, EMConfig{});
  CHECK(kept0.labels[2] == 0);
}

TEST_CASE("prune_small: dissolves and compacts") {
  EMConfig cfg;
  std::vector<int> labels(25, 1);
  labels[0] = 2;
  labels[1] = 2;
  for (int i = 2; i < 14; ++i) labels[static_cast<std::size_t>(i)] = 3;
  const auto p = prune_small(Clustering::from_labels(labels), cfg);
  CHECK(p.num_clusters == 2);
  CHECK(p.labels[0] == 0);
  CHECK(p.labels[1] == 0);
  CHECK(p.labels[2] == 2);
  CHECK(p.labels[20] == 1);
  const auto big = Clustering::from_labels(std::vector<int>(30, 1));
  CHECK(prune_small(big, cfg) == big);
}

TEST_CASE("run_em: pruned points rejoin a nearby cluster") {
  // 40 points on a line under one motion; initial clustering splits off
  // the last 3 as their own (too small) cluster.
  const RigidTransform T{RotationMatrix::from_axis_angle(Vec3::UnitZ(), 0.3), Vec3(0.1, 0, 0)};
  CorrespondenceSet cs;
  std::vector<int> labels;
  Rng rng(1);
  for (int i = 0; i < 40; ++i) {
    const Vec3 a(0.02 * i, 0.01 * std::sin(i), 0.01 * std::cos(3.0 * i));
    cs.push_back({a, apply(T, a)});
    labels.push_back(i < 37 ? 1 : 2);
  }
  const auto r = run_em(cs, Clustering::from_labels(labels), EMConfig{});
  CHECK(r.converged);
  CHECK(r.clustering.num_clusters == 1);
  CHECK(r.clustering.num_assigned() == 40);
  REQUIRE(r.trace.size() >= 1);
  CHECK(r.trace[0].sizes == std::vector<std::size_t>{37});
}

TEST_CASE("run_em: ground truth is a fixed point") {
  SceneSpec s;
  s.points_per_object = {300, 300, 300};
  s.separation_margin = 2.0 * s.tau;
  s.seed = 8;
  const auto scene = generate_scene(s);
  const auto r = run_em(scene.correspondences, scene.truth(), EMConfig{});
  CHECK(r.converged);
  CHECK(r.iterations_run == 1);
  CHECK(r.clustering == scene.truth());
  for (std::size_t j = 0; j < r.models.size(); ++j) {
    CHECK(geodesic_distance(r.models[j].transform.rotation, scene.true_transforms[j].rotation) <= 1e-9);
    CHECK((r.models[j].transform.translation - scene.true_transforms[j].translation).norm() <= 1e-9);
  }
}

TEST_CASE("run_em: good initialization recovers the objects") {
  for (RngSeed seed = 0; seed < 3; ++seed) {
    const auto scene = small_scene(seed, 0.005 * 0.05, 600);
    const auto init = make_good_initial_clustering(scene, 2.0, 3, seed);
    const auto r = run_em(scene.correspondences, init, EMConfig{});
    CHECK(r.converged);
    CHECK(mask_iou(r.clustering, scene.truth()) == 1.0);
    CHECK(r.models.size() == static_cast<std::size_t>(r.clustering.num_clusters));
    double wsum = 0.0;
    for (const auto& m : r.models) {
      wsum += m.weight;
      CHECK(test::so3_valid(m.transform.rotation.matrix()));
    }
    CHECK(std::abs(wsum - 1.0) < 1e-9);
    CHECK(r.changes_per_iteration.back() == 0);
  }
}

TEST_CASE("run_em: clusters stay inside one object on every iteration") {
  const auto scene = small_scene(12, 0.001, 500);
  const auto init = make_good_initial_clustering(scene, 2.0, 3, 4);
  const auto& cs = scene.correspondences;
  EMConfig cfg;
  Clustering cur = init;
  for (int it = 0; it < 10; ++it) {
    cur = prune_small(cur, cfg);
    const auto models = fit_models(cs, cur, cfg);
    cur = m_step(e_step(cs, cur, models, cfg), cur, cfg);
    const auto r = check_goodness(cur, scene, 1.0, 1);
    for (bool pure : r.cluster_pure) CHECK(pure);
  }
}

TEST_CASE("run_em: larger fragment grows monotonically") {
  SceneSpec s;
  s.num_objects = 1;
  s.points_per_object = {1000};
  s.sigma = 0.0005;
  s.seed = 13;
  const auto scene = generate_scene(s);
  const std::vector<double> weights{4, 1};
  const auto init = make_good_initial_clustering(scene, 2.0, 2, 6, weights);
  const auto r = run_em(scene.correspondences, init, EMConfig{});
  CHECK(r.converged);
  CHECK(r.clustering.num_clusters == 1);
  std::size_t prev = 0;
  for (const auto& t : r.trace) {
    CHECK(t.sizes[0] >= prev);
    prev = t.sizes[0];
  }
  CHECK(r.clustering.cluster_sizes()[0] == 1000);
}

TEST_CASE("run_em: deterministic") {
  const auto scene = small_scene(14, 0.002, 300);
  const auto init = make_good_initial_clustering(scene, 2.0, 3, 1);
  const auto a = run_em(scene.correspondences, init, EMConfig{});
  const auto b = run_em(scene.correspondences, init, EMConfig{});
  CHECK(a.clustering == b.clustering);
  CHECK(a.iterations_run == b.iterations_run);
  for (std::size_t j = 0; j < a.models.size(); ++j) {
    CHECK(a.models[j].transform.rotation.matrix() == b.models[j].transform.rotation.matrix());
    CHECK(a.models[j].sigma_hat == b.models[j].sigma_hat);
  }
}

TEST_CASE("run_em: no viable clusters") {
  CorrespondenceSet cs(9, Correspondence{Vec3::Zero(), Vec3::Zero()});
  const auto c = Clustering::from_labels({1, 1, 1, 2, 2, 2, 3, 3, 3});
  CHECK_THROWS_WITH_AS(run_em(cs, c, EMConfig{}), "no viable clusters", NoViableClusters);
}
