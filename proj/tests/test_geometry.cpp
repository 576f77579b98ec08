#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mmreg/geometry.hpp"
#include "support.hpp"

using namespace mmreg;
using std::numbers::pi;

namespace {

RotationMatrix about(const Vec3& axis, double angle) { return RotationMatrix::from_axis_angle(axis, angle); }

}  // namespace

TEST_CASE("apply: identity leaves points alone") {
  CHECK(apply(RigidTransform::identity(), Vec3(1, 2, 3)).isApprox(Vec3(1, 2, 3)));
}

TEST_CASE("apply: quarter turn about z") {
  const RigidTransform T{about(Vec3::UnitZ(), pi / 2), Vec3::Zero()};
  CHECK((apply(T, Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-15);
}

TEST_CASE("apply: half turn about x plus translation") {
  const RigidTransform T{about(Vec3::UnitX(), pi), Vec3(1, 1, 1)};
  const Vec3 p = apply(T, Vec3(0, 1, 0));
  CHECK((p - Vec3(1, 0, 1)).norm() < 1e-15);
  CHECK((apply(inverse(T), p) - Vec3(0, 1, 0)).norm() < 1e-15);
}

TEST_CASE("compose: identity and inverse") {
  Rng rng(7);
  const auto T = test::random_transform(rng);
  const auto L = compose(RigidTransform::identity(), T);
  CHECK((L.rotation.matrix() - T.rotation.matrix()).norm() < 1e-15);
  CHECK((L.translation - T.translation).norm() < 1e-15);
  const auto I = compose(T, inverse(T));
  CHECK((I.rotation.matrix() - Mat3::Identity()).norm() < 1e-12);
  CHECK(I.translation.norm() < 1e-12);
}

TEST_CASE("compose: pointwise definition on random transforms") {
  Rng rng(11);
  const auto T1 = test::random_transform(rng, 2.0);
  const auto T2 = test::random_transform(rng, 2.0);
  const auto T12 = compose(T1, T2);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = rng.in_ball(3.0);
    CHECK((apply(T12, p) - apply(T1, apply(T2, p))).norm() < 1e-12);
  }
}

TEST_CASE("compose: associative") {
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    const auto A = test::random_transform(rng);
    const auto B = test::random_transform(rng);
    const auto C = test::random_transform(rng);
    const auto L = compose(compose(A, B), C);
    const auto R = compose(A, compose(B, C));
    CHECK((L.rotation.matrix() - R.rotation.matrix()).norm() < 1e-12);
    CHECK((L.translation - R.translation).norm() < 1e-12);
  }
}

TEST_CASE("inverse: identity, pure translation and round trip") {
  const auto I = inverse(RigidTransform::identity());
  CHECK(I.rotation.matrix() == Mat3::Identity());
  CHECK(I.translation.norm() == 0.0);

  const auto P = inverse(RigidTransform{RotationMatrix::identity(), Vec3(1, -2, 3)});
  CHECK(P.translation.isApprox(Vec3(-1, 2, -3)));

  Rng rng(5);
  const auto T = test::random_transform(rng, 5.0);
  const auto Ti = inverse(T);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = rng.in_ball(2.0);
    CHECK((apply(Ti, apply(T, p)) - p).norm() < 1e-12);
  }
}

TEST_CASE("geodesic_distance: spot values") {
  Rng rng(3);
  const auto R = random_rotation(rng);
  CHECK(geodesic_distance(R, R) < 1e-15);
  CHECK(geodesic_distance(RotationMatrix::identity(), about(Vec3::UnitX(), pi)) ==
        doctest::Approx(pi).epsilon(1e-12));
  const Vec3 axis = Vec3(0.3, -0.5, 0.8).normalized();
  CHECK(std::abs(geodesic_distance(RotationMatrix::identity(), about(axis, 0.3)) - 0.3) < 1e-12);
}

TEST_CASE("geodesic_distance: symmetric and left-invariant") {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto R1 = random_rotation(rng);
    const auto R2 = random_rotation(rng);
    const auto Q = random_rotation(rng);
    const double d = geodesic_distance(R1, R2);
    CHECK(d >= 0.0);
    CHECK(d <= pi);
    CHECK(std::abs(d - geodesic_distance(R2, R1)) < 1e-12);
    CHECK(std::abs(d - geodesic_distance(Q * R1, Q * R2)) < 1e-12);
  }
}

TEST_CASE("geodesic_distance: rejects non-rotations") {
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(geodesic_distance(Mat3::Identity(), bad), std::invalid_argument);
  CHECK_THROWS_AS(geodesic_distance(2.0 * Mat3::Identity(), Mat3::Identity()), std::invalid_argument);
}

TEST_CASE("RotationMatrix: validating constructor") {
  CHECK_NOTHROW(RotationMatrix(Mat3::Identity()));
  CHECK_THROWS_AS(RotationMatrix(Mat3::Zero()), std::invalid_argument);
  Mat3 reflection = Mat3::Identity();
  reflection(2, 2) = -1.0;
  CHECK_THROWS_AS(RotationMatrix{reflection}, std::invalid_argument);
}

TEST_CASE("random_rotation: valid, deterministic, Haar trace moments") {
  for (RngSeed s = 0; s < 50; ++s) CHECK(test::so3_valid(random_rotation(s).matrix()));
  CHECK(random_rotation(RngSeed{42}).matrix() == random_rotation(RngSeed{42}).matrix());
  CHECK(random_rotation(RngSeed{42}).matrix() != random_rotation(RngSeed{43}).matrix());

  Rng rng(99);
  // Haar measure: E[tr R] = 0, E[(tr R)^2] = 1.
  double sum = 0.0, sum_sq = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double tr = random_rotation(rng).matrix().trace();
    sum += tr;
    sum_sq += tr * tr;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.06);
}

TEST_CASE("Rng: derived streams differ and reproduce") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  Rng a(derive_seed(9, 3)), b(derive_seed(9, 3));
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("Rng: ranges") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.index(7) < 7);
    CHECK(rng.in_ball(2.0).norm() <= 2.0);
    CHECK(std::abs(rng.unit_vector().norm() - 1.0) < 1e-12);
  }
}
