#pragma once

// Parametric household catalog: ten randomised instances for each of eleven
// everyday object classes, used to generate a full synthetic dataset.

#include "rocs/core.hpp"
#include "rocs/simulator.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace rocs::catalog {

inline const std::vector<std::string>& household_classes() {
  static const std::vector<std::string> c{"ball",        "book",  "bowl",   "cup",       "metal_box", "paper_box",
                                          "plastic_box", "plate", "sponge", "to_go_cup", "tray"};
  return c;
}

struct Range {
  double lo, hi;
};

struct ClassTemplate {
  std::string label;
  sim::ShapeKind shape;
  Range length, width, height;
  Range base;  // floor thickness for open shapes
  Range rigidity, slide_angle, mass;
};

inline const std::vector<ClassTemplate>& templates() {
  using sim::ShapeKind;
  static const std::vector<ClassTemplate> t{
      {"ball", ShapeKind::sphere, {0.06, 0.12}, {0, 0}, {0, 0}, {0, 0}, {0.3, 0.9}, {0.05, 0.15}, {0.05, 0.4}},
      {"book", ShapeKind::box, {0.15, 0.28}, {0.10, 0.20}, {0.015, 0.05}, {0, 0}, {0.85, 1.0}, {0.25, 0.45}, {0.2, 1.2}},
      {"bowl", ShapeKind::cylinder_cup, {0.12, 0.20}, {0, 0}, {0.05, 0.09}, {0.006, 0.010}, {0.9, 1.0}, {0.2, 0.4}, {0.15, 0.5}},
      {"cup", ShapeKind::cylinder_cup, {0.07, 0.09}, {0, 0}, {0.08, 0.11}, {0.006, 0.012}, {0.9, 1.0}, {0.25, 0.4}, {0.2, 0.35}},
      {"metal_box", ShapeKind::box, {0.10, 0.20}, {0.08, 0.15}, {0.05, 0.10}, {0, 0}, {0.97, 1.0}, {0.15, 0.3}, {0.2, 0.8}},
      {"paper_box", ShapeKind::box, {0.10, 0.30}, {0.08, 0.20}, {0.05, 0.15}, {0, 0}, {0.6, 0.85}, {0.3, 0.5}, {0.05, 0.2}},
      {"plastic_box", ShapeKind::open_box, {0.12, 0.30}, {0.10, 0.20}, {0.06, 0.15}, {0.006, 0.010}, {0.75, 0.95}, {0.2, 0.4}, {0.1, 0.4}},
      {"plate", ShapeKind::flat_sheet, {0.18, 0.28}, {0, 0}, {0.015, 0.03}, {0, 0}, {0.95, 1.0}, {0.25, 0.4}, {0.2, 0.6}},
      {"sponge", ShapeKind::box, {0.08, 0.12}, {0.05, 0.08}, {0.02, 0.05}, {0, 0}, {0.2, 0.5}, {0.6, 0.9}, {0.005, 0.03}},
      {"to_go_cup", ShapeKind::cylinder_cup, {0.07, 0.10}, {0, 0}, {0.10, 0.16}, {0.006, 0.008}, {0.4, 0.7}, {0.25, 0.45}, {0.01, 0.03}},
      {"tray", ShapeKind::open_box, {0.30, 0.45}, {0.20, 0.35}, {0.02, 0.04}, {0.006, 0.008}, {0.9, 1.0}, {0.2, 0.35}, {0.2, 0.8}},
  };
  return t;
}

/// Round to whole millimetres so instance geometry aligns with printed scene files.
inline double mm(double v) { return std::round(v * 1000.0) / 1000.0; }

inline sim::SyntheticObject draw_instance(const ClassTemplate& t, int index, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, "catalog-" + t.label, static_cast<std::uint64_t>(index)));
  auto u = [&](Range r) { return r.lo + (r.hi - r.lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53); };
  sim::SyntheticObject o;
  o.class_label = t.label;
  char id[16];
  std::snprintf(id, sizeof id, "%02d", index + 1);
  o.instance_id = id;
  o.shape = t.shape;
  o.length = mm(u(t.length));
  switch (t.shape) {
    case sim::ShapeKind::sphere: o.width = o.height = o.length; break;
    case sim::ShapeKind::cylinder_cup:
    case sim::ShapeKind::flat_sheet:
      o.width = o.length;
      o.height = mm(u(t.height));
      break;
    default:
      o.width = mm(u(t.width));
      o.height = mm(u(t.height));
      break;
  }
  if (sim::is_open(t.shape)) o.cavity_depth = mm(o.height - u(t.base));
  o.true_rigidity = u(t.rigidity);
  o.true_slide_angle = u(t.slide_angle);
  o.mass = u(t.mass);
  sim::validate(o);
  return o;
}

inline std::vector<sim::SyntheticObject> household_catalog(std::uint64_t seed, int instances_per_class = 10) {
  std::vector<sim::SyntheticObject> out;
  for (const auto& t : templates())
    for (int i = 0; i < instances_per_class; ++i) out.push_back(draw_instance(t, i, seed));
  return out;
}

}  // namespace rocs::catalog
