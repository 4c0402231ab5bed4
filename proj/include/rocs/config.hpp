#pragma once

// Pipeline configuration, stored as sectioned key=value text.

#include "rocs/core.hpp"
#include "rocs/dataset.hpp"
#include "rocs/geometry.hpp"
#include "rocs/interaction.hpp"
#include "rocs/knowledge.hpp"
#include "rocs/substitution.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <type_traits>
#include <vector>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace rocs {

struct PipelineConfig {
  std::uint64_t seed = 0;

  std::string dataset_path;
  std::string kb_path;
  std::string bundle_dir;

  geometry::RansacParams ransac;
  geometry::FlatnessParams flatness;
  geometry::HollownessParams hollowness;
  interaction::ContactParams contact;

  int default_eta = 4;
  std::map<std::string, int> eta;

  dataset::VarianceFlavor variance = dataset::VarianceFlavor::population;
  double threshold = substitution::kDefaultThreshold;

  knowledge::BuildConfig build_config() const { return {derive_seed(seed, "knowledge"), default_eta, eta}; }
};

inline std::string_view variance_name(dataset::VarianceFlavor v) {
  return v == dataset::VarianceFlavor::population ? "population" : "sample";
}

inline dataset::VarianceFlavor parse_variance(std::string_view s) {
  if (s == "population") return dataset::VarianceFlavor::population;
  if (s == "sample") return dataset::VarianceFlavor::sample;
  fail(ErrorCode::invalid_argument, "variance must be population or sample, got '" + std::string(s) + "'");
}

inline void validate(const PipelineConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::out_of_range, "config: " + what);
  };
  need(c.ransac.leaf_size >= 0.0 && c.ransac.leaf_size < 1.0, "ransac.leaf_size must lie in [0, 1) m");
  need(c.ransac.max_iterations >= 1 && c.ransac.max_iterations <= 10000000, "ransac.max_iterations must lie in [1, 1e7]");
  need(c.ransac.distance_threshold > 0.0 && c.ransac.distance_threshold < 1.0,
       "ransac.distance_threshold must lie in (0, 1) m");
  need(c.ransac.probability > 0.0 && c.ransac.probability <= 1.0, "ransac.probability must lie in (0, 1]");
  need(c.ransac.min_inlier_fraction >= 0.0 && c.ransac.min_inlier_fraction <= 1.0,
       "ransac.min_inlier_fraction must lie in [0, 1]");
  need(c.ransac.object_margin >= 0.0 && c.ransac.object_margin < 1.0, "ransac.object_margin must lie in [0, 1) m");
  need(c.flatness.consensus > 0.0 && c.flatness.consensus <= 1.0, "flatness.consensus must lie in (0, 1]");
  need(c.flatness.max_normal_angle > 0.0 && c.flatness.max_normal_angle < std::numbers::pi / 2.0,
       "flatness.max_normal_angle_deg must lie in (0, 90)");
  need(c.flatness.normal_neighbors >= 3, "flatness.normal_neighbors must be at least 3");
  need(c.hollowness.min_cavity_depth >= 0.0, "hollowness.min_cavity_depth must be non-negative");
  need(c.hollowness.rim_tolerance >= 0.0, "hollowness.rim_tolerance must be non-negative");
  need(c.contact.effort_cutoff > 0.0, "interaction.effort_cutoff must be positive");
  need(c.contact.baseline_fraction > 0.0 && c.contact.baseline_fraction < 1.0,
       "interaction.baseline_fraction must lie in (0, 1)");
  need(c.default_eta >= 2, "knowledge.eta must be at least 2");
  for (const auto& [p, e] : c.eta) {
    need(knowledge::parse_prop(p).has_value(), "unknown property '" + p + "' in knowledge.eta");
    need(e >= 2, "knowledge.eta." + p + " must be at least 2");
  }
  need(c.threshold >= 0.0 && c.threshold <= 1.0, "substitution.threshold must lie in [0, 1]");
}

namespace detail {

template <typename T>
T get_num(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
  auto v = pt.get_optional<std::string>(key);
  if (!v) return fallback;
  if constexpr (std::is_floating_point_v<T>) {
    auto d = parse_double(*v);
    if (!d) fail(ErrorCode::parse_error, "config: " + key + " is not a number");
    return static_cast<T>(*d);
  } else {
    auto i = parse_int(*v);
    if (!i || *i < 0) fail(ErrorCode::parse_error, "config: " + key + " is not a non-negative integer");
    return static_cast<T>(*i);
  }
}

}  // namespace detail

inline PipelineConfig config_from_ptree(const boost::property_tree::ptree& pt) {
  static const std::map<std::string, std::vector<std::string>> known{
      {"run", {"seed"}},
      {"paths", {"dataset", "kb", "bundles"}},
      {"ransac", {"leaf_size", "max_iterations", "distance_threshold", "probability", "min_iterations",
                  "min_inlier_fraction", "object_margin"}},
      {"flatness", {"consensus", "max_normal_angle_deg", "normal_neighbors"}},
      {"hollowness", {"min_cavity_depth", "rim_tolerance"}},
      {"interaction", {"effort_cutoff", "baseline_fraction"}},
      {"knowledge", {"eta"}},
      {"dataset", {"variance"}},
      {"substitution", {"threshold"}},
  };
  for (const auto& [section, body] : pt) {
    auto it = known.find(section);
    if (it == known.end()) fail(ErrorCode::parse_error, "config: unknown section [" + section + "]");
    for (const auto& [key, _] : body) {
      bool ok = std::find(it->second.begin(), it->second.end(), key) != it->second.end() ||
                (section == "knowledge" && key.rfind("eta.", 0) == 0);
      if (!ok) fail(ErrorCode::parse_error, "config: unknown key '" + key + "' in [" + section + "]");
    }
  }

  PipelineConfig c;
  using detail::get_num;
  c.seed = get_num<std::uint64_t>(pt, "run.seed", c.seed);
  c.dataset_path = pt.get<std::string>("paths.dataset", "");
  c.kb_path = pt.get<std::string>("paths.kb", "");
  c.bundle_dir = pt.get<std::string>("paths.bundles", "");
  c.ransac.leaf_size = get_num(pt, "ransac.leaf_size", c.ransac.leaf_size);
  c.ransac.max_iterations = get_num(pt, "ransac.max_iterations", c.ransac.max_iterations);
  c.ransac.distance_threshold = get_num(pt, "ransac.distance_threshold", c.ransac.distance_threshold);
  c.ransac.probability = get_num(pt, "ransac.probability", c.ransac.probability);
  c.ransac.min_iterations = get_num(pt, "ransac.min_iterations", c.ransac.min_iterations);
  c.ransac.min_inlier_fraction = get_num(pt, "ransac.min_inlier_fraction", c.ransac.min_inlier_fraction);
  c.ransac.object_margin = get_num(pt, "ransac.object_margin", c.ransac.object_margin);
  c.flatness.consensus = get_num(pt, "flatness.consensus", c.flatness.consensus);
  c.flatness.max_normal_angle =
      get_num(pt, "flatness.max_normal_angle_deg", c.flatness.max_normal_angle * 180.0 / std::numbers::pi) *
      std::numbers::pi / 180.0;
  c.flatness.normal_neighbors = get_num(pt, "flatness.normal_neighbors", c.flatness.normal_neighbors);
  c.hollowness.min_cavity_depth = get_num(pt, "hollowness.min_cavity_depth", c.hollowness.min_cavity_depth);
  c.hollowness.rim_tolerance = get_num(pt, "hollowness.rim_tolerance", c.hollowness.rim_tolerance);
  c.contact.effort_cutoff = get_num(pt, "interaction.effort_cutoff", c.contact.effort_cutoff);
  c.contact.baseline_fraction = get_num(pt, "interaction.baseline_fraction", c.contact.baseline_fraction);
  c.default_eta = get_num(pt, "knowledge.eta", c.default_eta);
  if (auto k = pt.get_child_optional("knowledge"))
    for (const auto& [key, v] : *k)
      if (key.rfind("eta.", 0) == 0) {
        auto e = parse_int(v.data());
        if (!e || *e < 0) fail(ErrorCode::parse_error, "config: knowledge." + key + " is not a non-negative integer");
        c.eta[key.substr(4)] = static_cast<int>(*e);
      }
  c.variance = parse_variance(pt.get<std::string>("dataset.variance", "population"));
  c.threshold = get_num(pt, "substitution.threshold", c.threshold);
  validate(c);
  return c;
}

inline PipelineConfig parse_config(std::istream& in) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
  return config_from_ptree(pt);
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open config '" + path + "'");
  try {
    return parse_config(in);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

inline void write_config(std::ostream& out, const PipelineConfig& c) {
  auto f = [](double v) { return format_double(v); };
  out << "[run]\nseed = " << c.seed << "\n\n";
  out << "[paths]\ndataset = " << c.dataset_path << "\nkb = " << c.kb_path << "\nbundles = " << c.bundle_dir << "\n\n";
  out << "[ransac]\nleaf_size = " << f(c.ransac.leaf_size) << "\nmax_iterations = " << c.ransac.max_iterations
      << "\ndistance_threshold = " << f(c.ransac.distance_threshold) << "\nprobability = " << f(c.ransac.probability)
      << "\nmin_iterations = " << c.ransac.min_iterations
      << "\nmin_inlier_fraction = " << f(c.ransac.min_inlier_fraction)
      << "\nobject_margin = " << f(c.ransac.object_margin) << "\n\n";
  out << "[flatness]\nconsensus = " << f(c.flatness.consensus)
      << "\nmax_normal_angle_deg = " << f(c.flatness.max_normal_angle * 180.0 / std::numbers::pi)
      << "\nnormal_neighbors = " << c.flatness.normal_neighbors << "\n\n";
  out << "[hollowness]\nmin_cavity_depth = " << f(c.hollowness.min_cavity_depth)
      << "\nrim_tolerance = " << f(c.hollowness.rim_tolerance) << "\n\n";
  out << "[interaction]\neffort_cutoff = " << f(c.contact.effort_cutoff)
      << "\nbaseline_fraction = " << f(c.contact.baseline_fraction) << "\n\n";
  out << "[knowledge]\neta = " << c.default_eta << '\n';
  for (const auto& [p, e] : c.eta) out << "eta." << p << " = " << e << '\n';
  out << "\n[dataset]\nvariance = " << variance_name(c.variance) << "\n\n";
  out << "[substitution]\nthreshold = " << f(c.threshold) << '\n';
}

}  // namespace rocs
