#pragma once

// One feature bundle in, one observation record out.

#include "rocs/config.hpp"
#include "rocs/dataset.hpp"
#include "rocs/geometry.hpp"
#include "rocs/interaction.hpp"
#include "rocs/simulator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rocs {

struct Extraction {
  dataset::ObservationRecord record;
  geometry::SizeResult size;
  geometry::FlatnessResult flatness;
  geometry::HollownessResult hollowness;
  interaction::RigidityResult rigidity;
  std::optional<std::string> roughness_note;  // why roughness is missing
};

namespace detail {

inline Cloud object_points(const Cloud& cloud, bool has_table, const geometry::RansacParams& rp,
                           std::uint64_t seed) {
  Cloud pts = rp.leaf_size > 0.0 ? geometry::voxel_downsample(cloud, rp.leaf_size) : cloud;
  if (!has_table) return pts;
  auto params = rp;
  params.seed = seed;
  auto seg = geometry::segment_tabletop(pts, params);
  if (seg.empty()) fail(ErrorCode::segmentation_failure, "nothing above the support plane");
  return seg.object;
}

}  // namespace detail

/// Runs every extraction on a bundle. The seed feeds the RANSAC streams.
inline Extraction extract_observation(const sim::FeatureBundle& b, const PipelineConfig& cfg = {}) {
  if (b.side_cloud.empty() || b.top_cloud.empty()) fail(ErrorCode::invalid_argument, "bundle has an empty point cloud");
  const std::uint64_t root = derive_seed(cfg.seed, "extract");
  auto key_seed = [&](std::string_view stream) {
    std::uint64_t s = derive_seed(root, stream, static_cast<std::uint64_t>(b.repetition));
    for (char c : b.class_label + "/" + b.instance_id) s = mix64(s ^ static_cast<unsigned char>(c));
    return s;
  };

  Extraction x;
  auto& r = x.record;
  r.class_label = b.class_label;
  r.instance_id = b.instance_id;
  r.repetition = b.repetition;

  Cloud side = detail::object_points(b.side_cloud, b.has_table, cfg.ransac, key_seed("side"));
  x.size = b.has_table ? geometry::compute_size_on_support(side) : geometry::compute_size(side);
  const double h = x.size.extents.z();
  r.size_length = x.size.si.l;
  r.size_width = x.size.si.w;
  r.size_height = x.size.si.h;

  Cloud top = detail::object_points(b.top_cloud, b.has_table, cfg.ransac, key_seed("top"));
  auto fp = cfg.flatness;
  fp.ransac = cfg.ransac;
  fp.ransac.seed = key_seed("flatness");
  x.flatness = geometry::compute_flatness(top, fp);
  r.flatness = x.flatness.fl;

  x.hollowness = geometry::compute_hollowness(h, b.d_r, b.d_h, cfg.hollowness);
  r.hollowness = x.hollowness.ho;

  x.rigidity = interaction::compute_rigidity(b.press, h, cfg.contact);
  r.rigidity = x.rigidity.ri;

  if (!b.ramp) {
    x.roughness_note = "no ramp log";
  } else {
    try {
      r.roughness = interaction::compute_roughness(*b.ramp);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::slide_not_observed) throw;
      x.roughness_note = e.what();
    }
  }

  r.heaviness = interaction::compute_heaviness(b.scale_reading);
  return x;
}

/// Seed of repetition `rep` of the `index`-th object of a scene.
inline std::uint64_t bundle_seed(std::uint64_t root, std::size_t index, int rep) {
  return derive_seed(derive_seed(root, "simulate", index), "repetition", static_cast<std::uint64_t>(rep));
}

/// Simulates and extracts every repetition of every object, in object order.
inline std::vector<dataset::ObservationRecord> simulate_dataset(const std::vector<sim::SyntheticObject>& objects,
                                                                const sim::NoiseSpec& noise, int repetitions,
                                                                std::uint64_t seed, const PipelineConfig& cfg = {},
                                                                const sim::SimulationParams& params = {}) {
  std::vector<dataset::ObservationRecord> out;
  for (std::size_t i = 0; i < objects.size(); ++i)
    for (int rep = 1; rep <= repetitions; ++rep) {
      auto b = sim::synthesize_bundle(objects[i], noise, bundle_seed(seed, i, rep), params, rep);
      out.push_back(extract_observation(b, cfg).record);
    }
  return out;
}

}  // namespace rocs
