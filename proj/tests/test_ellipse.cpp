#include <gtest/gtest.h>

#include "omnitopo/omnitopo.hpp"
#include "properties.hpp"

using namespace omnitopo;

namespace {

Chassis one_vertex(const Vec3& p) { return Chassis{"one", ChassisFamily::regular_polygon, {p}, p.norm()}; }

// disc images of lines spanning the tangent plane of p
std::vector<DirectionSet> tangent_circle(const Vec3& p, int count) {
  const auto c = one_vertex(p);
  std::vector<DirectionSet> out;
  for (int k = 0; k < count; ++k) out.push_back(canonicalize(direction_from_phase(c, {kPi * (k + 0.5) / count})));
  return out;
}

}  // namespace

TEST(SemiEllipse, DistanceToKnownPoints) {
  const SemiEllipse e{0.0, 0.5};
  // E(t) = (cos t, -0.5 sin t): the bulge points towards -y
  EXPECT_NEAR(distance_to_semi_ellipse(e, {1.0, 0.0}), 0.0, 1e-12);
  EXPECT_NEAR(distance_to_semi_ellipse(e, {0.0, -0.5}), 0.0, 1e-12);
  EXPECT_NEAR(distance_to_semi_ellipse(e, {0.0, 0.0}), 0.5, 1e-12);
  EXPECT_NEAR(distance_to_semi_ellipse(e, {0.0, 0.5}), 1.0, 1e-9);
}

TEST(SemiEllipse, FitDiagonalVertex) {
  const Vec3 p = Vec3(1, 1, 1).normalized();
  const auto rep = fit_semi_ellipses(tangent_circle(p, 90), one_vertex(p));
  ASSERT_EQ(rep.rotors.size(), 1u);
  EXPECT_NEAR(rep.rotors[0].b, 1.0 / std::sqrt(3.0), 1e-6);
  EXPECT_NEAR(rad_to_deg(rep.rotors[0].eta), 54.7356, 1e-3);
  EXPECT_LT(rep.rotors[0].rms_residual, 1e-6);
  EXPECT_TRUE(verify_tangent_collapse(rep, one_vertex(p), 0.01)[0]);
}

TEST(SemiEllipse, FitEquatorialVertex) {
  const Vec3 p(1, 0, 0);
  const auto rep = fit_semi_ellipses(tangent_circle(p, 60), one_vertex(p));
  EXPECT_NEAR(rep.rotors[0].b, 0.0, 1e-6);
  EXPECT_NEAR(rad_to_deg(rep.rotors[0].eta), 90.0, 1e-3);
  EXPECT_TRUE(verify_tangent_collapse(rep, one_vertex(p), 0.01)[0]);
}

TEST(SemiEllipse, FitPolarVertex) {
  const Vec3 p(0, 0, 1);
  const auto rep = fit_semi_ellipses(tangent_circle(p, 60), one_vertex(p));
  EXPECT_NEAR(rep.rotors[0].b, 1.0, 1e-6);
  EXPECT_NEAR(rep.rotors[0].eta, 0.0, 2e-3);
  EXPECT_TRUE(verify_tangent_collapse(rep, one_vertex(p), 0.5)[0]);
}

TEST(SemiEllipse, GenericTiltsRecovered) {
  for (std::uint64_t s = 1; s <= 6; ++s) {
    const Vec3 p = props::random_dirs(1, s).dirs[0];
    const auto rep = fit_semi_ellipses(tangent_circle(p, 64), one_vertex(p));
    const auto want = expected_semi_ellipse(p);
    EXPECT_NEAR(rep.rotors[0].b, want.b, 1e-6);
    EXPECT_TRUE(verify_tangent_collapse(rep, one_vertex(p), 0.01)[0]) << "seed " << s;
  }
}

TEST(SemiEllipse, RandomCloudsFailVerification) {
  const auto c = make_regular_polygon(6);
  std::vector<DirectionSet> sols;
  for (std::uint64_t s = 1; s <= 200; ++s) sols.push_back(canonicalize(props::random_dirs(6, s)));
  const auto rep = fit_semi_ellipses(sols, c);
  EXPECT_GT(rep.mean_distance(), 0.05);
  const auto ok = verify_tangent_collapse(rep, c, 1.0);
  EXPECT_LE(std::count(ok.begin(), ok.end(), true), 1);
}

TEST(SemiEllipse, OctahedronSolutionsCollapse) {
  const auto c = make_platonic(PlatonicSolid::octahedron);
  const auto set = global_exhaust(c, 200, kDefaultPruneTolerance, 1);
  const auto rep = fit_semi_ellipses(set, c);
  for (bool v : verify_tangent_collapse(rep, c, 1.0)) EXPECT_TRUE(v);
  EXPECT_LT(rep.mean_distance(), 1e-4);
}

TEST(SemiEllipse, TooFewPoints) {
  const Vec3 p(1, 0, 0);
  EXPECT_THROW(fit_semi_ellipses(tangent_circle(p, 7), one_vertex(p)), InsufficientDataError);
  EXPECT_THROW(fit_semi_ellipse(std::vector<Point2>(3, Point2::Zero())), InsufficientDataError);
}
