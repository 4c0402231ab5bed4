#include "rocs/interaction.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace rocs;
using namespace rocs::interaction;

namespace {

// Gripper descends at 1 cm/s; contact at t_c, then efforts ramp and the
// object compresses by `squash` before the cutoff.
PressLog make_press(double t_c, double squash, double ramp = 2.0) {
  PressLog log;
  log.joint_names = {"j1", "j2"};
  for (int i = 0; i <= 400; ++i) {
    double t = i * 0.01;
    PressSample s;
    s.t = t;
    double z = 0.2 - 0.01 * t;
    double e = 0.0;
    if (t >= t_c) {
      double u = t - t_c;
      e = ramp * u * 10.0;
      double zc = 0.2 - 0.01 * t_c;
      z = zc - std::min(squash, 0.01 * u);
    }
    s.z = z;
    s.efforts = {0.5, 1.0 + e};
    log.samples.push_back(s);
  }
  return log;
}

}  // namespace

TEST(Contact, FindsOnsetAndCutoff) {
  auto log = make_press(1.0, 0.004);
  auto c = detect_contact(log);
  EXPECT_NEAR(c.t0, 1.01, 1e-9);  // first sample past the noise floor
  // 1 + 20 u >= 8  ->  u = 0.35
  EXPECT_NEAR(c.t1, 1.35, 0.0101);
  EXPECT_LE(c.i0, c.i1);
}

TEST(Contact, CutoffNeverReached) {
  auto log = make_press(1.0, 0.0, 0.0);
  try {
    detect_contact(log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::press_incomplete);
  }
}

TEST(Contact, ImmediateCutoffGivesEqualTimes) {
  PressLog log;
  log.joint_names = {"j"};
  log.samples = {{0.0, 0.1, {9.0}}, {0.1, 0.1, {9.0}}};
  auto c = detect_contact(log);
  EXPECT_EQ(c.t0, c.t1);
}

TEST(Contact, RejectsMalformedLogs) {
  PressLog empty;
  EXPECT_THROW(detect_contact(empty), Error);
  PressLog ragged;
  ragged.samples = {{0.0, 0.1, {0.0}}, {0.1, 0.1, {0.0, 1.0}}};
  EXPECT_THROW(detect_contact(ragged), Error);
  PressLog backwards;
  backwards.samples = {{0.1, 0.1, {0.0}}, {0.0, 0.1, {9.0}}};
  EXPECT_THROW(detect_contact(backwards), Error);
}

TEST(Rigidity, DeformationOverHeight) {
  auto log = make_press(1.0, 0.004);
  auto r = compute_rigidity(log, 0.1);
  // z(t0) - z(t1): squash saturates at 0.004 after 0.4 s, cutoff at 0.35 s.
  double expected = 0.01 * (r.contact.t1 - 1.0) - 0.01 * (r.contact.t0 - 1.0);
  EXPECT_NEAR(r.deformation, expected, 1e-9);
  EXPECT_NEAR(r.deformation, 0.0034, 1e-4);
  EXPECT_NEAR(r.ri, r.deformation / 0.1, 1e-12);
}

TEST(Rigidity, RigidObjectIsZero) {
  auto log = make_press(1.0, 0.0);
  EXPECT_NEAR(compute_rigidity(log, 0.1).ri, 0.0, 1e-12);
}

TEST(Rigidity, ClampedToOne) {
  auto log = make_press(1.0, 1.0);
  EXPECT_EQ(compute_rigidity(log, 0.001).ri, 1.0);
  EXPECT_THROW(compute_rigidity(log, 0.0), Error);
}

TEST(Roughness, SlideAngleOverRightAngle) {
  RampLog log;
  for (int i = 0; i <= 100; ++i) log.samples.push_back({i * 0.1, i * 0.01});
  log.slide_detected_at = 5.0;  // angle 0.5 rad
  EXPECT_NEAR(compute_roughness(log), 0.5 / (std::numbers::pi / 2), 1e-12);
  log.slide_detected_at = 5.05;  // interpolated 0.505
  EXPECT_NEAR(compute_roughness(log), 0.505 / (std::numbers::pi / 2), 1e-12);
}

TEST(Roughness, NoSlide) {
  RampLog log;
  log.samples = {{0, 0}, {1, 0.5}};
  try {
    compute_roughness(log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::slide_not_observed);
  }
}

TEST(Roughness, MonotoneInSlideAngle) {
  RampLog log;
  for (int i = 0; i <= 100; ++i) log.samples.push_back({i * 0.1, i * 0.015});
  double prev = -1.0;
  for (int k = 0; k <= 100; ++k) {
    log.slide_detected_at = k * 0.1;
    double ro = compute_roughness(log);
    EXPECT_GE(ro, prev);
    EXPECT_LE(ro, 1.0);
    prev = ro;
  }
}

TEST(Heaviness, RoundsHalfDown) {
  EXPECT_EQ(compute_heaviness(0.0), 0.0);
  EXPECT_EQ(compute_heaviness(0.4), 0.0);
  EXPECT_EQ(compute_heaviness(0.5), 0.0);
  EXPECT_EQ(compute_heaviness(0.51), 1.0);
  EXPECT_EQ(compute_heaviness(1.5), 1.0);
  EXPECT_EQ(compute_heaviness(250.2), 250.0);
  EXPECT_FALSE(std::signbit(compute_heaviness(0.2)));
  EXPECT_THROW(compute_heaviness(-1.0), Error);
}
