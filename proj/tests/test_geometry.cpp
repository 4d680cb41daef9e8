#include "scbf/geometry.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace scbf::geometry;
using testsupport::Rng;

namespace {

ConvexShape random_hull(Rng& rng, int max_points = 32, double scale = 0.5) {
  const int n = rng.integer(4, max_points);
  std::vector<Vec3> pts;
  const Vec3 stretch = rng.vec3(0.3, 1.0) * scale;
  for (int i = 0; i < n; ++i) pts.push_back(rng.vec3(-1, 1).cwiseProduct(stretch));
  return ConvexShape::hull(pts);
}

ConvexShape random_shape(Rng& rng) {
  switch (rng.integer(0, 3)) {
    case 0: return ConvexShape::sphere(rng.uniform(0.05, 0.5));
    case 1: return ConvexShape::box(rng.vec3(0.05, 0.5));
    case 2: return ConvexShape::capsule(rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.5));
    default: return random_hull(rng, 16);
  }
}

}  // namespace

TEST_CASE("support: sphere and box") {
  const Vec3 s = support(ConvexShape::sphere(1.0), Placement::identity(), Vec3::UnitX());
  CHECK((s - Vec3(1, 0, 0)).norm() < 1e-15);
  const Vec3 b = support(ConvexShape::box(Vec3(1, 1, 1)), Placement::identity(), Vec3(1, 1, 1).normalized());
  CHECK((b - Vec3(1, 1, 1)).norm() < 1e-15);
  CHECK_THROWS_AS(support(ConvexShape::sphere(1.0), Placement::identity(), Vec3::Zero()), std::invalid_argument);
}

TEST_CASE("support: hull matches vertex scan") {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const ConvexShape h = random_hull(rng);
    const Placement pl = rng.placement(1.0);
    const Vec3 d = rng.unit3();
    const Vec3 s = support(h, pl, d);
    double best = -1e300;
    for (const auto& p : h.points()) best = std::max(best, d.dot(pl.apply(p)));
    CHECK(d.dot(s) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("shape validation") {
  CHECK_THROWS(ConvexShape::sphere(0.0));
  CHECK_THROWS(ConvexShape::box(Vec3(1, -1, 1)));
  CHECK_THROWS(ConvexShape::capsule(-0.1, 1.0));
  CHECK_THROWS(ConvexShape::hull({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)}));
  CHECK_THROWS(ConvexShape::hull({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}));
  Placement p;
  p.rotation(0, 0) = 2.0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("placement algebra") {
  Rng rng(2);
  const Placement a = rng.placement(2.0), b = rng.placement(2.0);
  const Vec3 x = rng.vec3(-1, 1);
  CHECK(((a * b).apply(x) - a.apply(b.apply(x))).norm() < 1e-12);
  CHECK((a.inverse().apply(a.apply(x)) - x).norm() < 1e-12);
  const Placement r = Placement::from_rpy(Vec3::Zero(), 0, 0, testsupport::kPi / 2);
  CHECK((r.apply(Vec3::UnitX()) - Vec3::UnitY()).norm() < 1e-12);
}

TEST_CASE("signed_distance: analytic spheres") {
  const auto s = ConvexShape::sphere(1.0);
  const auto far = signed_distance(s, Placement::identity(), s, Placement::from_translation(Vec3(3, 0, 0)));
  CHECK(far.signed_distance == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(far.normal.x()) - 1.0) < 1e-12);
  const auto near = signed_distance(s, Placement::identity(), s, Placement::from_translation(Vec3(1, 0, 0)));
  CHECK(near.signed_distance == doctest::Approx(-1.0));
}

TEST_CASE("signed_distance: capsule and box analytic cases") {
  const auto cap = ConvexShape::capsule(0.1, 0.5);
  const auto r = signed_distance(cap, Placement::identity(), cap, Placement::from_translation(Vec3(1, 0, 0)));
  CHECK(r.signed_distance == doctest::Approx(0.8));
  const auto box = ConvexShape::box(Vec3(1, 1, 1));
  const auto d = signed_distance(box, Placement::identity(), box, Placement::from_translation(Vec3(2.5, 0, 0)));
  CHECK(d.signed_distance == doctest::Approx(0.5));
  const auto p = signed_distance(box, Placement::identity(), box, Placement::from_translation(Vec3(1.5, 0.2, 0)));
  CHECK(p.signed_distance == doctest::Approx(-0.5));
  const auto t = signed_distance(box, Placement::identity(), box, Placement::from_translation(Vec3(2.0, 0.3, 0.1)));
  CHECK(t.signed_distance == 0.0);
}

TEST_CASE("signed_distance: hull pairs match the exact polytope oracle") {
  Rng rng(3);
  int separated = 0, overlapping = 0;
  for (int t = 0; t < 300; ++t) {
    const ConvexShape a = random_hull(rng), b = random_hull(rng);
    const Placement pa = rng.placement(0.1), pb = rng.placement(rng.uniform(0.2, 1.2));
    const double ref = testsupport::oracle_signed_distance(a, pa, b, pb);
    const auto r = signed_distance(a, pa, b, pb);
    CHECK(r.converged);
    if (ref > 1e-9) {
      ++separated;
      CHECK(std::abs(r.signed_distance - ref) <= 1e-6);
    } else {
      ++overlapping;
      CHECK(r.signed_distance <= 1e-9);
      CHECK(std::abs(r.signed_distance - ref) <= 1e-6);
    }
  }
  CHECK(separated > 50);
  CHECK(overlapping > 50);
}

TEST_CASE("signed_distance: rounded and mixed shapes match the oracle") {
  Rng rng(4);
  for (int t = 0; t < 300; ++t) {
    const ConvexShape a = random_shape(rng), b = random_shape(rng);
    const Placement pa = rng.placement(0.1), pb = rng.placement(rng.uniform(0.1, 1.0));
    const double ref = testsupport::oracle_signed_distance(a, pa, b, pb);
    const auto r = signed_distance(a, pa, b, pb);
    CHECK(std::abs(r.signed_distance - ref) <= 1e-6);
  }
}

TEST_CASE("signed_distance: witness and normal consistency") {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const ConvexShape a = random_shape(rng), b = random_shape(rng);
    const Placement pa = rng.placement(0.1), pb = rng.placement(rng.uniform(0.1, 1.2));
    const auto r = signed_distance(a, pa, b, pb);
    CHECK(std::abs(r.normal.norm() - 1.0) <= 1e-9);
    if (r.signed_distance > 0.0) {
      CHECK(std::abs((r.witness_a - r.witness_b).norm() - r.signed_distance) <= 1e-7);
      CHECK(((r.witness_a - r.witness_b) - r.signed_distance * r.normal).norm() <= 1e-7);
    }
  }
}

TEST_CASE("signed_distance: symmetry, translation invariance and Lipschitz") {
  Rng rng(6);
  for (int t = 0; t < 300; ++t) {
    const ConvexShape a = random_shape(rng), b = random_shape(rng);
    Placement pa = rng.placement(0.1), pb = rng.placement(rng.uniform(0.1, 1.2));
    const auto ab = signed_distance(a, pa, b, pb);
    const auto ba = signed_distance(b, pb, a, pa);
    CHECK(std::abs(ab.signed_distance - ba.signed_distance) <= 1e-9);
    if (ab.signed_distance > 1e-6) CHECK((ab.witness_a - ba.witness_b).norm() <= 1e-6);

    const Vec3 shift = rng.vec3(-5, 5);
    Placement qa = pa, qb = pb;
    qa.translation += shift;
    qb.translation += shift;
    CHECK(std::abs(signed_distance(a, qa, b, qb).signed_distance - ab.signed_distance) <= 1e-9);

    if (ab.signed_distance > 0.0) {
      const Vec3 delta = rng.unit3() * rng.uniform(0.0, 0.05);
      Placement pc = pb;
      pc.translation += delta;
      const double moved = signed_distance(a, pa, b, pc).signed_distance;
      CHECK(std::abs(moved - ab.signed_distance) <= delta.norm() + 1e-7);
    }
  }
}

TEST_CASE("signed_distance: sign agrees with a point-membership test") {
  // A point of the segment between the two witness points lies in both bodies
  // when they overlap; for separated bodies the midpoint lies in neither.
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const ConvexShape a = ConvexShape::sphere(rng.uniform(0.1, 0.5));
    const ConvexShape b = ConvexShape::sphere(rng.uniform(0.1, 0.5));
    const Placement pb = Placement::from_translation(rng.vec3(-1, 1));
    const double centre = pb.translation.norm();
    const double truth = centre - a.radius() - b.radius();
    const auto r = signed_distance(a, Placement::identity(), b, pb);
    CHECK((r.signed_distance > 0) == (truth > 0));
  }
}
