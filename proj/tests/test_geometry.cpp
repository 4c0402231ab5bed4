#include "rocs/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace rocs;
using namespace rocs::geometry;

namespace {

// Regular grid on the rectangle [x0,x1]x[y0,y1] at height z.
Cloud grid(double x0, double x1, double y0, double y1, double z, double step) {
  Cloud c;
  for (double x = x0; x <= x1 + 1e-12; x += step)
    for (double y = y0; y <= y1 + 1e-12; y += step) c.emplace_back(x, y, z);
  return c;
}

void append(Cloud& a, const Cloud& b) { a.insert(a.end(), b.begin(), b.end()); }

// Closed box resting on z = 0: four walls plus the top face.
Cloud box_surface(double l, double w, double h, double step) {
  Cloud c = grid(-l / 2, l / 2, -w / 2, w / 2, h, step);
  for (double z = step; z < h; z += step) {
    for (double x = -l / 2; x <= l / 2 + 1e-12; x += step) {
      c.emplace_back(x, -w / 2, z);
      c.emplace_back(x, w / 2, z);
    }
    for (double y = -w / 2 + step; y < w / 2 - 1e-12; y += step) {
      c.emplace_back(-l / 2, y, z);
      c.emplace_back(l / 2, y, z);
    }
  }
  return c;
}

}  // namespace

TEST(Voxel, ZeroLeafIsIdentity) {
  Cloud c{{0, 0, 0}, {1, 2, 3}};
  EXPECT_EQ(voxel_downsample(c, 0.0), c);
}

TEST(Voxel, OneCentroidPerLeaf) {
  Cloud c{{0.1, 0.1, 0.1}, {0.3, 0.3, 0.3}, {1.2, 0.5, 0.5}, {1.4, 0.5, 0.5}};
  auto d = voxel_downsample(c, 1.0);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_TRUE(d[0].isApprox(Point(0.2, 0.2, 0.2)));
  EXPECT_TRUE(d[1].isApprox(Point(1.3, 0.5, 0.5)));
}

TEST(Plane, ThreePointsDefineNormal) {
  Eigen::Vector3d n;
  double d = 0;
  ASSERT_TRUE(detail::plane_from_points({0, 0, 1}, {1, 0, 1}, {0, 1, 1}, n, d));
  EXPECT_NEAR(std::abs(n.z()), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(d), 1.0, 1e-12);
  EXPECT_FALSE(detail::plane_from_points({0, 0, 0}, {1, 1, 1}, {2, 2, 2}, n, d));
}

TEST(Ransac, RecoversTiltedPlaneAmongOutliers) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Vector3d n = Eigen::Vector3d(0.1, -0.2, 1.0).normalized();
  Cloud c;
  for (int i = 0; i < 400; ++i) {
    double x = u(rng), y = u(rng);
    double z = -(n.x() * x + n.y() * y + 0.3) / n.z();
    c.emplace_back(x, y, z);
  }
  for (int i = 0; i < 100; ++i) c.emplace_back(u(rng), u(rng), u(rng) * 5.0 + 3.0);
  auto pl = ransac_plane(c, 0.01, 2000, 0.99, 11);
  EXPECT_EQ(pl.inliers.size(), 400u);
  EXPECT_NEAR(std::abs(pl.normal.dot(n)), 1.0, 1e-9);
}

TEST(Ransac, SameSeedSameModel) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.003);
  Cloud c = grid(0, 1, 0, 1, 0, 0.05);
  for (auto& p : c) p.z() += g(rng);
  auto a = ransac_plane(c, 0.005, 500, 0.99, 9);
  auto b = ransac_plane(c, 0.005, 500, 0.99, 9);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(a.normal, b.normal);
}

TEST(Ransac, MoreIterationsNeverLoseInliers) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 0.01);
  Cloud c = grid(0, 1, 0, 1, 0, 0.05);
  for (auto& p : c) p.z() += g(rng);
  std::size_t prev = 0;
  for (int it : {1, 5, 20, 100, 500}) {
    auto pl = ransac_plane(c, 0.01, it, 1.0, 21);
    EXPECT_GE(pl.inliers.size(), prev);
    prev = pl.inliers.size();
  }
}

TEST(Tabletop, SeparatesObjectFromTable) {
  Cloud c = grid(-0.5, 0.5, -0.5, 0.5, 0.0, 0.01);
  std::size_t table = c.size();
  append(c, box_surface(0.2, 0.1, 0.05, 0.01));
  RansacParams p;
  auto seg = segment_tabletop(c, p);
  EXPECT_GT(seg.object.size(), 0u);
  EXPECT_LT(seg.object.size(), c.size() - table + 1);
  auto size = compute_size_on_support(seg.object);
  EXPECT_NEAR(size.extents.x(), 0.2, 1e-9);
  EXPECT_NEAR(size.extents.y(), 0.1, 1e-9);
  EXPECT_NEAR(size.extents.z(), 0.05, 1e-9);
}

TEST(Tabletop, TinyCloudFails) {
  Cloud c{{0, 0, 0}, {1, 0, 0}};
  try {
    segment_tabletop(c, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::segmentation_failure);
  }
}

TEST(Tabletop, NoDominantPlaneFails) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Cloud c;
  for (int i = 0; i < 300; ++i) c.emplace_back(u(rng), u(rng), u(rng));
  RansacParams p;
  p.distance_threshold = 0.001;
  try {
    segment_tabletop(c, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::segmentation_failure);
  }
}

TEST(Size, NormalisedByLargestExtent) {
  Cloud c{{0, 0, 0}, {0.2, 0.1, 0.05}};
  auto s = compute_size(c);
  EXPECT_DOUBLE_EQ(s.si.l, 1.0);
  EXPECT_DOUBLE_EQ(s.si.w, 0.5);
  EXPECT_DOUBLE_EQ(s.si.h, 0.25);
}

TEST(Size, ScaleInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Cloud c;
    for (int i = 0; i < 20; ++i) c.emplace_back(u(rng), u(rng) * 0.5, u(rng) * 0.3);
    double k = 0.1 + u(rng) * 10.0;
    Cloud d = c;
    for (auto& p : d) p *= k;
    auto a = compute_size(c).si, b = compute_size(d).si;
    EXPECT_NEAR(a.l, b.l, 1e-12);
    EXPECT_NEAR(a.w, b.w, 1e-12);
    EXPECT_NEAR(a.h, b.h, 1e-12);
    EXPECT_LE(std::max({a.l, a.w, a.h}), 1.0);
  }
}

TEST(Size, DegenerateCloud) {
  Cloud c{{1, 1, 1}, {1, 1, 1}};
  try {
    compute_size(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_geometry);
  }
  EXPECT_THROW(compute_size(Cloud{}), Error);
}

TEST(Flatness, FlatTopIsAccepted) {
  // Top view of a box: only the top face.
  Cloud c = grid(-0.1, 0.1, -0.05, 0.05, 0.05, 0.01);
  auto r = compute_flatness(c);
  EXPECT_TRUE(r.accepted);
  EXPECT_DOUBLE_EQ(r.fl, 1.0);
  EXPECT_NEAR(std::abs(r.top_plane.normal.z()), 1.0, 1e-9);
}

TEST(Flatness, PartialTopGivesInlierShare) {
  // Half of the visible points on the top face, half on an adjoining lower step.
  Cloud c = grid(0.0, 0.1, 0.0, 0.1, 0.10, 0.01);
  std::size_t top = c.size();
  append(c, grid(0.11, 0.21, 0.0, 0.1, 0.03, 0.01));
  auto r = compute_flatness(c);
  EXPECT_TRUE(r.accepted);
  EXPECT_NEAR(r.fl, static_cast<double>(top) / static_cast<double>(c.size()), 1e-12);
}

TEST(Flatness, DomeIsRejected) {
  Cloud c;
  for (double x = -0.05; x <= 0.05; x += 0.004)
    for (double y = -0.05; y <= 0.05; y += 0.004) {
      double r2 = x * x + y * y;
      if (r2 <= 0.0025) c.emplace_back(x, y, std::sqrt(0.0025 - r2));
    }
  auto r = compute_flatness(c);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.fl, 0.0);
}

TEST(Flatness, RangeIsUnitInterval) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  for (int t = 0; t < 10; ++t) {
    Cloud c;
    for (int i = 0; i < 200; ++i) c.emplace_back(u(rng), u(rng), u(rng));
    auto r = compute_flatness(c);
    EXPECT_GE(r.fl, 0.0);
    EXPECT_LE(r.fl, 1.0);
  }
}

TEST(Hollowness, Formula) {
  auto r = compute_hollowness(0.1, 0.15, 0.07);  // base 0.08, cavity 0.02
  EXPECT_FALSE(r.sanitized);
  EXPECT_NEAR(r.ho, 0.2, 1e-12);
  EXPECT_NEAR(r.base, 0.08, 1e-12);
}

TEST(Hollowness, SanitisesShallowCavities) {
  EXPECT_TRUE(compute_hollowness(0.1, 0.2, 0.1095).sanitized);  // cavity 0.0095
  EXPECT_EQ(compute_hollowness(0.1, 0.2, 0.1095).ho, 0.0);
  EXPECT_FALSE(compute_hollowness(0.1, 0.2, 0.11).sanitized);  // cavity 0.01
  EXPECT_TRUE(compute_hollowness(0.1, 0.2, 0.1).sanitized);     // solid
}

TEST(Hollowness, BaseAboveRimIsInconsistent) {
  try {
    compute_hollowness(0.1, 0.3, 0.1);  // base 0.2 > h + tolerance
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::inconsistent_measurement);
  }
  // Within the rim tolerance: clamps to zero.
  EXPECT_EQ(compute_hollowness(0.1, 0.205, 0.1).ho, 0.0);
}

TEST(Hollowness, RejectsBadInput) {
  EXPECT_THROW(compute_hollowness(0.0, 0.1, 0.05), Error);
  EXPECT_THROW(compute_hollowness(0.1, 0.05, 0.1), Error);
  EXPECT_THROW(compute_hollowness(0.1, 0.1, -0.01), Error);
}

TEST(Ransac, TruncatedQuadraticPrefersOneLevelOfAStep) {
  // Terraces 25 mm apart with a 20 mm threshold: a slightly tilted plane
  // holds every lower point plus the strip above, so counting inliers
  // favours it over the lower terrace alone.
  Cloud c = grid(0.0, 0.4, 0.0, 0.3, 0.0, 0.01);
  std::size_t lower = c.size();
  append(c, grid(0.0, 0.4, 0.31, 0.34, 0.025, 0.01));
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto pl = ransac_plane(c, 0.02, 3000, 1.0, s, {}, PlaneScore::truncated_quadratic);
    std::size_t low = 0;
    for (auto i : pl.inliers) low += i < lower;
    EXPECT_EQ(low, lower);
    EXPECT_EQ(pl.inliers.size(), lower);
    EXPECT_NEAR(std::abs(pl.normal.z()), 1.0, 1e-9);
  }
}
