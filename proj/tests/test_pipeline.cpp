#include "rocs/catalog.hpp"
#include "rocs/pipeline.hpp"

#include <gtest/gtest.h>

using namespace rocs;
using sim::ShapeKind;
using sim::SyntheticObject;

namespace {

SyntheticObject make(ShapeKind k, double l, double w, double h, double cavity = 0.0) {
  SyntheticObject o;
  o.class_label = std::string(sim::shape_name(k));
  o.instance_id = "x";
  o.shape = k;
  o.length = l;
  o.width = w;
  o.height = h;
  o.cavity_depth = cavity;
  o.wall_thickness = 0.004;
  o.true_rigidity = 0.9;
  o.true_slide_angle = 0.35;
  o.mass = 0.3204;
  return o;
}

void expect_matches_truth(const SyntheticObject& o) {
  SCOPED_TRACE(o.class_label);
  auto x = extract_observation(sim::synthesize_bundle(o, {}, 1));
  auto g = sim::ground_truth(o);
  const auto& r = x.record;
  EXPECT_NEAR(r.size_length, g.si_l, 0.02 * g.si_l);
  EXPECT_NEAR(r.size_width, g.si_w, 0.02 * g.si_w);
  EXPECT_NEAR(r.size_height, g.si_h, 0.02 * g.si_h);
  EXPECT_NEAR(r.flatness, g.fl, 0.02);
  EXPECT_NEAR(r.hollowness, g.ho, 0.02);
  EXPECT_EQ(x.hollowness.sanitized, g.ho_sanitized);
  EXPECT_NEAR(r.rigidity, g.ri, 0.02);
  ASSERT_TRUE(r.roughness);
  EXPECT_NEAR(*r.roughness, g.ro, 0.02);
  EXPECT_EQ(r.heaviness, g.he);
}

}  // namespace

TEST(Extraction, BoxMatchesTruth) { expect_matches_truth(make(ShapeKind::box, 0.2, 0.12, 0.06)); }
TEST(Extraction, OpenBoxMatchesTruth) { expect_matches_truth(make(ShapeKind::open_box, 0.2, 0.15, 0.1, 0.09)); }
TEST(Extraction, CupMatchesTruth) { expect_matches_truth(make(ShapeKind::cylinder_cup, 0.08, 0.08, 0.1, 0.092)); }
TEST(Extraction, SphereMatchesTruth) { expect_matches_truth(make(ShapeKind::sphere, 0.1, 0.1, 0.1)); }
TEST(Extraction, DeepOpenBoxRimIsTopPlane) {
  // Early termination used to settle on a plane tilted across rim and floor.
  for (double c : {0.03, 0.04, 0.05}) expect_matches_truth(make(ShapeKind::open_box, 0.1, 0.1, 0.06, c));
}
TEST(Extraction, SheetMatchesTruth) { expect_matches_truth(make(ShapeKind::flat_sheet, 0.24, 0.24, 0.02)); }

TEST(Extraction, ShallowCavitySanitised) {
  auto o = make(ShapeKind::open_box, 0.2, 0.15, 0.1, 0.008);
  auto x = extract_observation(sim::synthesize_bundle(o, {}, 1));
  EXPECT_TRUE(x.hollowness.sanitized);
  EXPECT_EQ(x.record.hollowness, 0.0);
}

TEST(Extraction, WithoutTable) {
  sim::SimulationParams p;
  p.with_table = false;
  auto o = make(ShapeKind::box, 0.2, 0.1, 0.05);
  auto x = extract_observation(sim::synthesize_bundle(o, {}, 1, p));
  EXPECT_NEAR(x.record.size_width, 0.5, 0.01);
  EXPECT_NEAR(x.record.size_height, 0.25, 0.01);
}

TEST(Extraction, MissingRampLeavesRoughnessEmpty) {
  auto b = sim::synthesize_bundle(make(ShapeKind::box, 0.2, 0.1, 0.05), {}, 1);
  b.ramp.reset();
  auto x = extract_observation(b);
  EXPECT_FALSE(x.record.roughness);
  EXPECT_TRUE(x.roughness_note);
  b = sim::synthesize_bundle(make(ShapeKind::box, 0.2, 0.1, 0.05), {}, 1);
  b.ramp->slide_detected_at.reset();
  x = extract_observation(b);
  EXPECT_FALSE(x.record.roughness);
}

TEST(Extraction, IncompletePressFails) {
  auto b = sim::synthesize_bundle(make(ShapeKind::box, 0.2, 0.1, 0.05), {}, 1);
  b.press.samples.resize(3);
  try {
    extract_observation(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::press_incomplete);
  }
}

TEST(Extraction, Deterministic) {
  auto o = make(ShapeKind::cylinder_cup, 0.08, 0.08, 0.1, 0.092);
  sim::NoiseSpec n{0.001, 0.0005, 0.02};
  auto a = simulate_dataset({o}, n, 3, 7), b = simulate_dataset({o}, n, 3, 7);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(a[2].repetition, 3);
}

TEST(Extraction, NoisyRepetitionsStayClose) {
  auto o = make(ShapeKind::box, 0.2, 0.12, 0.06);
  auto g = sim::ground_truth(o);
  for (const auto& r : simulate_dataset({o}, {0.001, 0.0, 0.0}, 5, 3)) {
    EXPECT_NEAR(r.size_height, g.si_h, 0.05);
    EXPECT_NEAR(r.flatness, g.fl, 0.1);
  }
}

TEST(Extraction, CatalogSampleMatchesTruth) {
  auto objs = catalog::household_catalog(1, 2);
  for (const auto& o : objs) {
    SCOPED_TRACE(o.class_label + "/" + o.instance_id);
    auto x = extract_observation(sim::synthesize_bundle(o, {}, 1));
    auto g = sim::ground_truth(o);
    EXPECT_NEAR(x.record.flatness, g.fl, 0.02);
    EXPECT_NEAR(x.record.hollowness, g.ho, 0.02);
    EXPECT_NEAR(x.record.size_height, g.si_h, 0.02 * g.si_h);
  }
}
