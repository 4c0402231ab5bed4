#pragma once

// Parametric objects with known ground truth, rendered into the same feature
// data the camera, arm and scale produce: lateral and top-view point clouds
// over a table patch, marker distances, a press log, a ramp log and a scale
// reading.

#include "rocs/core.hpp"
#include "rocs/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace rocs::sim {

enum class ShapeKind { box, open_box, cylinder_cup, sphere, flat_sheet };

inline std::string_view shape_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::box: return "box";
    case ShapeKind::open_box: return "open_box";
    case ShapeKind::cylinder_cup: return "cylinder_cup";
    case ShapeKind::sphere: return "sphere";
    case ShapeKind::flat_sheet: return "flat_sheet";
  }
  return "box";
}

inline std::optional<ShapeKind> parse_shape(std::string_view s) {
  for (auto k : {ShapeKind::box, ShapeKind::open_box, ShapeKind::cylinder_cup, ShapeKind::sphere, ShapeKind::flat_sheet})
    if (shape_name(k) == s) return k;
  return std::nullopt;
}

inline bool is_open(ShapeKind k) { return k == ShapeKind::open_box || k == ShapeKind::cylinder_cup; }

struct SyntheticObject {
  std::string class_label = "object";
  std::string instance_id = "0";
  ShapeKind shape = ShapeKind::box;
  double length = 0.1;  // x
  double width = 0.1;   // y
  double height = 0.1;  // z
  double cavity_depth = 0.0;
  double wall_thickness = 0.005;  // open shapes only
  double true_rigidity = 1.0;     // 1 = no deformation under the press
  double true_slide_angle = 0.3;  // radians
  double mass = 0.1;              // kg

  double base_thickness() const { return height - cavity_depth; }
};

struct NoiseSpec {
  double point_sigma = 0.0;   // m, isotropic per coordinate
  double marker_sigma = 0.0;  // m, on both marker distances
  double effort_sigma = 0.0;  // N*m, per joint sample
};

struct SimulationParams {
  double density = 1e4;  // surface points per m^2
  bool with_table = true;
  double table_border = 0.1;
  double camera_height = 1.0;  // top camera above the table

  double press_speed = 0.01;  // m/s
  double press_dt = 0.01;
  double press_gap = 0.05;  // approach distance above the top
  int press_hold_samples = 20;
  double effort_cutoff = 8.0;
  std::vector<std::string> joint_names{"arm_joint_1", "arm_joint_2", "arm_joint_3", "arm_joint_4",
                                       "arm_joint_5"};
  std::vector<double> joint_baseline{0.0, 1.5, -1.0, 0.3, 0.0};
  std::vector<double> joint_gain{0.05, 1.0, -0.6, 0.2, 0.0};  // index 1 carries the press

  double ramp_speed = 0.05;  // rad/s
  double ramp_dt = 0.02;
  double ramp_limit = std::numbers::pi / 2.0;
  int ramp_tail_samples = 10;
};

enum class PointLabel : std::uint8_t { table, wall, top, floor };

struct FeatureBundle {
  std::string class_label;
  std::string instance_id;
  int repetition = 1;
  bool has_table = true;
  Cloud side_cloud;
  Cloud top_cloud;
  double d_r = 0.0;
  double d_h = 0.0;
  interaction::PressLog press;
  std::optional<interaction::RampLog> ramp;
  double scale_reading = 0.0;  // grams

  // Simulator-only membership labels; empty for recorded data.
  std::vector<PointLabel> side_labels;
  std::vector<PointLabel> top_labels;
  std::optional<double> true_contact_time;
};

struct GroundTruth {
  double length = 0.0, width = 0.0, height = 0.0;
  double si_l = 0.0, si_w = 0.0, si_h = 0.0;
  double fl = 0.0;
  double ho = 0.0;
  bool ho_sanitized = false;
  double ri = 0.0;
  double ro = 0.0;
  double he = 0.0;
};

inline void validate(const SyntheticObject& o) {
  auto bad = [&](const std::string& m) { fail(ErrorCode::degenerate_geometry, o.instance_id + ": " + m); };
  if (!(o.length > 0.0) || !(o.width > 0.0) || !(o.height > 0.0)) bad("extents must be positive");
  if (!(o.cavity_depth >= 0.0) || o.cavity_depth > o.height) bad("cavity depth must lie in [0, height]");
  if (!is_open(o.shape) && o.cavity_depth != 0.0) bad("only open shapes carry a cavity");
  if (o.shape == ShapeKind::sphere && (o.length != o.width || o.width != o.height))
    bad("a sphere needs equal extents");
  if (o.shape == ShapeKind::cylinder_cup && o.length != o.width) bad("a cup needs equal length and width");
  if (is_open(o.shape) && (!(o.wall_thickness > 0.0) || 2.0 * o.wall_thickness >= std::min(o.length, o.width)))
    bad("wall thickness must be positive and below half the footprint");
  if (!(o.true_rigidity >= 0.0 && o.true_rigidity <= 1.0)) fail(ErrorCode::out_of_range, o.instance_id + ": rigidity outside [0,1]");
  if (!(o.true_slide_angle >= 0.0 && o.true_slide_angle < std::numbers::pi / 2.0))
    fail(ErrorCode::out_of_range, o.instance_id + ": slide angle outside [0, pi/2)");
  if (!(o.mass >= 0.0)) fail(ErrorCode::out_of_range, o.instance_id + ": negative mass");
}

inline void validate(const NoiseSpec& n) {
  if (!(n.point_sigma >= 0.0) || !(n.marker_sigma >= 0.0) || !(n.effort_sigma >= 0.0))
    fail(ErrorCode::invalid_argument, "noise standard deviations must be non-negative");
}

namespace detail {

inline std::vector<double> linspace(double a, double b, double spacing) {
  auto n = static_cast<std::size_t>(std::max(2.0, std::ceil((b - a) / spacing - 1e-9) + 1.0));
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

inline std::size_t ring_count(double radius, double spacing) {
  if (radius <= 1e-12) return 1;
  auto quarter = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi * radius / (4.0 * spacing)));
  return 4 * std::max<std::size_t>(1, quarter);
}

struct HeightCell {
  double x, y, z;
  int i, j;
  PointLabel label;
};

inline bool in_footprint(const SyntheticObject& o, double x, double y) {
  constexpr double eps = 1e-12;
  switch (o.shape) {
    case ShapeKind::sphere:
    case ShapeKind::cylinder_cup: {
      double r = o.length / 2.0;
      return x * x + y * y <= r * r * (1.0 + eps);
    }
    default: return std::abs(x) <= o.length / 2.0 + eps && std::abs(y) <= o.width / 2.0 + eps;
  }
}

// Visible surface seen from straight above, one sample per grid cell.
inline std::vector<HeightCell> top_heightfield(const SyntheticObject& o, double spacing) {
  std::vector<HeightCell> cells;
  auto xs = linspace(-o.length / 2.0, o.length / 2.0, spacing);
  auto ys = linspace(-o.width / 2.0, o.width / 2.0, spacing);
  const double t = o.wall_thickness;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      double x = xs[i], y = ys[j];
      if (!in_footprint(o, x, y)) continue;
      HeightCell c{x, y, o.height, static_cast<int>(i), static_cast<int>(j), PointLabel::top};
      switch (o.shape) {
        case ShapeKind::open_box:
          if (o.cavity_depth > 0.0 && std::abs(x) < o.length / 2.0 - t && std::abs(y) < o.width / 2.0 - t) {
            c.z = o.base_thickness();
            c.label = PointLabel::floor;
          }
          break;
        case ShapeKind::cylinder_cup: {
          double r = o.length / 2.0 - t;
          if (o.cavity_depth > 0.0 && x * x + y * y < r * r) {
            c.z = o.base_thickness();
            c.label = PointLabel::floor;
          }
          break;
        }
        case ShapeKind::sphere: {
          double r = o.length / 2.0;
          c.z = r + std::sqrt(std::max(0.0, r * r - x * x - y * y));
          break;
        }
        default: break;
      }
      cells.push_back(c);
    }
  }
  return cells;
}

inline void add_walls(const SyntheticObject& o, double spacing, Cloud& pts, std::vector<PointLabel>& labels) {
  auto push = [&](double x, double y, double z) {
    pts.emplace_back(x, y, z);
    labels.push_back(PointLabel::wall);
  };
  const double hl = o.length / 2.0, hw = o.width / 2.0;
  switch (o.shape) {
    case ShapeKind::box:
    case ShapeKind::open_box:
    case ShapeKind::flat_sheet: {
      auto zs = linspace(0.0, o.height, spacing);
      auto xs = linspace(-hl, hl, spacing);
      auto ys = linspace(-hw, hw, spacing);
      for (double z : zs) {
        for (double y : ys) {
          push(-hl, y, z);
          push(hl, y, z);
        }
        for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
          push(xs[k], -hw, z);
          push(xs[k], hw, z);
        }
      }
      break;
    }
    case ShapeKind::cylinder_cup: {
      auto zs = linspace(0.0, o.height, spacing);
      std::size_t n = ring_count(hl, spacing);
      for (double z : zs)
        for (std::size_t k = 0; k < n; ++k) {
          double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
          push(hl * std::cos(a), hl * std::sin(a), z);
        }
      break;
    }
    case ShapeKind::sphere: {
      double r = hl;
      auto zs = linspace(0.0, 2.0 * r, spacing * 2.0 / std::numbers::pi);  // arc-length spacing along meridians
      for (double z : zs) {
        double rho = std::sqrt(std::max(0.0, r * r - (z - r) * (z - r)));
        std::size_t n = ring_count(rho, spacing);
        for (std::size_t k = 0; k < n; ++k) {
          double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
          push(rho * std::cos(a), rho * std::sin(a), z);
        }
      }
      break;
    }
  }
}

inline void add_table(const SyntheticObject& o, const SimulationParams& p, double spacing, Cloud& pts,
                      std::vector<PointLabel>& labels) {
  double border = std::max(p.table_border, 0.5 * std::max(o.length, o.width));
  auto xs = linspace(-o.length / 2.0 - border, o.length / 2.0 + border, spacing);
  auto ys = linspace(-o.width / 2.0 - border, o.width / 2.0 + border, spacing);
  for (double x : xs)
    for (double y : ys) {
      if (in_footprint(o, x, y)) continue;
      pts.emplace_back(x, y, 0.0);
      labels.push_back(PointLabel::table);
    }
}

}  // namespace detail

/// Deterministic ground truth. Flatness is counted on the noise-free top view:
/// the share of object points within `plane_band` below the top, or zero when
/// the surface is curved or a step inside the band touches more than
/// (1 - consensus) of those points (mixed-level neighbourhoods break normal
/// agreement).
inline GroundTruth ground_truth(const SyntheticObject& o, const SimulationParams& p = {}, double plane_band = 0.02,
                                double consensus = 0.95, double min_cavity = 0.01, double object_margin = 0.005) {
  validate(o);
  GroundTruth g;
  g.length = o.length;
  g.width = o.width;
  g.height = o.height;
  double m = std::max({o.length, o.width, o.height});
  g.si_l = o.length / m;
  g.si_w = o.width / m;
  g.si_h = o.height / m;

  const double spacing = 1.0 / std::sqrt(p.density);
  if (o.shape != ShapeKind::sphere) {
    auto cells = detail::top_heightfield(o, spacing);
    std::map<std::pair<int, int>, double> band;
    std::size_t above_table = 0;
    for (const auto& c : cells) {
      if (c.z <= object_margin) continue;  // indistinguishable from the table
      ++above_table;
      if (c.z >= o.height - plane_band) band[{c.i, c.j}] = c.z;
    }
    std::size_t edges = 0;
    for (const auto& [ij, z] : band) {
      bool edge = false;
      for (int di = -1; di <= 1 && !edge; ++di)
        for (int dj = -1; dj <= 1 && !edge; ++dj) {
          auto it = band.find({ij.first + di, ij.second + dj});
          if (it != band.end() && std::abs(it->second - z) > 1e-9) edge = true;
        }
      if (edge) ++edges;
    }
    if (above_table > 0 && !band.empty() &&
        static_cast<double>(edges) <= (1.0 - consensus) * static_cast<double>(band.size()))
      g.fl = static_cast<double>(band.size()) / static_cast<double>(above_table);
  }

  g.ho_sanitized = o.cavity_depth < min_cavity;
  g.ho = g.ho_sanitized ? 0.0 : o.cavity_depth / o.height;
  g.ri = 1.0 - o.true_rigidity;
  g.ro = o.true_slide_angle / (std::numbers::pi / 2.0);
  g.he = interaction::compute_heaviness(o.mass * 1000.0);
  return g;
}

inline interaction::PressLog simulate_press(const SyntheticObject& o, const SimulationParams& p,
                                            const NoiseSpec& noise, std::mt19937_64& rng,
                                            std::optional<double>* contact_time = nullptr) {
  interaction::PressLog log;
  log.joint_names = p.joint_names;
  const std::size_t joints = p.joint_names.size();
  const std::size_t dom = static_cast<std::size_t>(
      std::max_element(p.joint_gain.begin(), p.joint_gain.end(),
                       [](double a, double b) { return std::abs(a) < std::abs(b); }) -
      p.joint_gain.begin());
  const double budget = p.effort_cutoff - std::abs(p.joint_baseline[dom]);
  const double travel = (1.0 - o.true_rigidity) * o.height;  // penetration at the cutoff
  const double stiffness = travel > 1e-12 ? budget / (std::abs(p.joint_gain[dom]) * travel) : 0.0;
  const double gap = std::max(p.press_gap, 0.25 * o.height);
  const double step = p.press_speed * p.press_dt;
  std::normal_distribution<double> en(0.0, 1.0);

  auto efforts_at = [&](double pen) {
    std::vector<double> e(joints);
    double load = 0.0;
    if (pen > 0.0) load = travel > 1e-12 ? stiffness * pen : budget / std::abs(p.joint_gain[dom]);
    for (std::size_t j = 0; j < joints; ++j) {
      double v = p.joint_baseline[j] + p.joint_gain[j] * load;
      if (noise.effort_sigma > 0.0) v += noise.effort_sigma * en(rng);
      e[j] = std::clamp(v, -p.effort_cutoff, p.effort_cutoff);
    }
    if (pen > 0.0 && (travel <= 1e-12 || pen >= travel)) e[dom] = std::copysign(p.effort_cutoff, p.joint_gain[dom]);
    return e;
  };

  bool contacted = false;
  for (long long k = 0;; ++k) {
    double t = static_cast<double>(k) * p.press_dt;
    double z = o.height + gap - static_cast<double>(k) * step;
    double pen = o.height - z;
    auto e = efforts_at(pen);
    if (pen > 0.0 && !contacted) {
      contacted = true;
      if (contact_time) *contact_time = t;
    }
    bool stop = std::any_of(e.begin(), e.end(), [&](double v) { return std::abs(v) >= p.effort_cutoff; });
    log.samples.push_back({t, z, e});
    if (stop) {
      for (int h = 1; h <= p.press_hold_samples; ++h)
        log.samples.push_back(
            {static_cast<double>(k + h) * p.press_dt, z, efforts_at(pen)});
      break;
    }
  }
  return log;
}

inline std::optional<interaction::RampLog> simulate_ramp(const SyntheticObject& o, const SimulationParams& p) {
  interaction::RampLog log;
  for (long long k = 0;; ++k) {
    double t = static_cast<double>(k) * p.ramp_dt;
    double a = static_cast<double>(k) * p.ramp_speed * p.ramp_dt;
    if (a > p.ramp_limit) break;
    log.samples.push_back({t, a});
    if (!log.slide_detected_at && a >= o.true_slide_angle) log.slide_detected_at = t;
    if (log.slide_detected_at && t >= *log.slide_detected_at + p.ramp_tail_samples * p.ramp_dt - 1e-12) break;
  }
  return log;
}

/// Renders one observation. Identical (object, noise, params, seed) give
/// bit-identical bundles.
inline FeatureBundle synthesize_bundle(const SyntheticObject& o, const NoiseSpec& noise, std::uint64_t seed,
                                       const SimulationParams& p = {}, int repetition = 1) {
  validate(o);
  validate(noise);
  if (!(p.density > 0.0)) fail(ErrorCode::invalid_argument, "sampling density must be positive");
  if (p.joint_baseline.size() != p.joint_names.size() || p.joint_gain.size() != p.joint_names.size())
    fail(ErrorCode::invalid_argument, "joint model size mismatch");
  const double spacing = 1.0 / std::sqrt(p.density);

  FeatureBundle b;
  b.class_label = o.class_label;
  b.instance_id = o.instance_id;
  b.repetition = repetition;
  b.has_table = p.with_table;

  auto cells = detail::top_heightfield(o, spacing);
  auto add_top = [&](Cloud& pts, std::vector<PointLabel>& labels) {
    for (const auto& c : cells) {
      pts.emplace_back(c.x, c.y, c.z);
      labels.push_back(c.label);
    }
  };
  // The lateral view sees the walls and the top; the sphere's rings already cover it.
  detail::add_walls(o, spacing, b.side_cloud, b.side_labels);
  if (o.shape != ShapeKind::sphere) add_top(b.side_cloud, b.side_labels);
  add_top(b.top_cloud, b.top_labels);
  if (p.with_table) {
    detail::add_table(o, p, spacing, b.side_cloud, b.side_labels);
    detail::add_table(o, p, spacing, b.top_cloud, b.top_labels);
  }

  std::mt19937_64 rng(derive_seed(seed, "bundle"));
  std::normal_distribution<double> unit(0.0, 1.0);
  if (noise.point_sigma > 0.0) {
    for (auto* cloud : {&b.side_cloud, &b.top_cloud})
      for (auto& q : *cloud) q += noise.point_sigma * Eigen::Vector3d(unit(rng), unit(rng), unit(rng));
  }

  double marker_height = is_open(o.shape) ? o.base_thickness() : o.height;
  b.d_r = p.camera_height;
  b.d_h = p.camera_height - marker_height;
  if (noise.marker_sigma > 0.0) {
    b.d_r += noise.marker_sigma * unit(rng);
    b.d_h += noise.marker_sigma * unit(rng);
  }
  b.d_h = std::clamp(b.d_h, 0.0, b.d_r);

  std::mt19937_64 effort_rng(derive_seed(seed, "press"));
  b.press = simulate_press(o, p, noise, effort_rng, &b.true_contact_time);
  b.ramp = simulate_ramp(o, p);
  b.scale_reading = o.mass * 1000.0;
  return b;
}

}  // namespace rocs::sim
