#pragma once

// Non-invasive extractions: table-top segmentation, size, flatness and
// hollowness from point clouds and marker distances.

#include "rocs/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

namespace rocs::geometry {

struct RansacParams {
  double leaf_size = 0.0025;
  int max_iterations = 10000;
  double distance_threshold = 0.02;
  // Adaptive termination confidence; 1.0 always runs max_iterations.
  double probability = 0.99;
  // Adaptive termination never stops before this many samples.
  int min_iterations = 200;
  double min_inlier_fraction = 0.2;
  // Points must rise this far above the support plane to belong to the object.
  double object_margin = 0.005;
  std::uint64_t seed = 0;
};

struct PlaneModel {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;  // normal.dot(p) + offset == 0 on the plane
  std::vector<std::size_t> inliers;

  double signed_distance(const Point& p) const { return normal.dot(p) + offset; }
};

struct BoundingBox {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();
  Eigen::Vector3d extents() const { return max - min; }
};

struct SizeTriple {
  double l = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct SizeResult {
  BoundingBox box;
  Eigen::Vector3d extents = Eigen::Vector3d::Zero();
  SizeTriple si;
};

/// Voxel-grid filter: one centroid per occupied leaf, in first-seen order.
inline Cloud voxel_downsample(std::span<const Point> cloud, double leaf) {
  if (leaf <= 0.0) return Cloud(cloud.begin(), cloud.end());
  struct Cell {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    std::size_t n = 0;
  };
  struct KeyHash {
    std::size_t operator()(const std::array<long long, 3>& k) const noexcept {
      std::uint64_t h = mix64(static_cast<std::uint64_t>(k[0]));
      h = mix64(h ^ static_cast<std::uint64_t>(k[1]));
      return static_cast<std::size_t>(mix64(h ^ static_cast<std::uint64_t>(k[2])));
    }
  };
  std::unordered_map<std::array<long long, 3>, std::size_t, KeyHash> index;
  std::vector<Cell> cells;
  for (const auto& p : cloud) {
    std::array<long long, 3> key{static_cast<long long>(std::floor(p.x() / leaf)),
                                 static_cast<long long>(std::floor(p.y() / leaf)),
                                 static_cast<long long>(std::floor(p.z() / leaf))};
    auto [it, inserted] = index.try_emplace(key, cells.size());
    if (inserted) cells.emplace_back();
    cells[it->second].sum += p;
    ++cells[it->second].n;
  }
  Cloud out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(c.sum / static_cast<double>(c.n));
  return out;
}

namespace detail {

inline bool plane_from_points(const Point& a, const Point& b, const Point& c, Eigen::Vector3d& n,
                              double& d) {
  Eigen::Vector3d cr = (b - a).cross(c - a);
  double len = cr.norm();
  if (len < 1e-12) return false;
  n = cr / len;
  if (n.z() < 0.0 || (n.z() == 0.0 && (n.y() < 0.0 || (n.y() == 0.0 && n.x() < 0.0)))) n = -n;
  d = -n.dot(a);
  return true;
}

// Smallest-eigenvalue direction of the scatter of the selected points.
inline Eigen::Vector3d pca_normal(std::span<const Point> pts, std::span<const std::size_t> sel,
                                  Eigen::Vector3d* centroid_out = nullptr) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (auto i : sel) c += pts[i];
  c /= static_cast<double>(sel.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (auto i : sel) {
    Eigen::Vector3d q = pts[i] - c;
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  Eigen::Vector3d n = es.eigenvectors().col(0);
  if (n.z() < 0.0) n = -n;
  if (centroid_out) *centroid_out = c;
  return n.normalized();
}

}  // namespace detail

enum class PlaneScore {
  inliers,            // most inliers, ties to the smaller residual sum
  truncated_quadratic // least sum of min(d^2, threshold^2) (MSAC)
};

/// RANSAC plane fit over `subset` of `cloud` (all points when empty). Inlier
/// indices refer to `cloud`.
inline PlaneModel ransac_plane(std::span<const Point> cloud, double threshold, int max_iterations,
                               double probability, std::uint64_t seed,
                               std::span<const std::size_t> subset = {},
                               PlaneScore score = PlaneScore::inliers, int min_iterations = 0) {
  std::vector<std::size_t> all;
  if (subset.empty()) {
    all.resize(cloud.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    subset = all;
  }
  PlaneModel best;
  const std::size_t n = subset.size();
  if (n < 3) return best;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::size_t best_count = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  double best_cost = std::numeric_limits<double>::infinity();
  const double t2 = threshold * threshold;
  Eigen::Vector3d best_n = Eigen::Vector3d::UnitZ();
  double best_d = 0.0;
  bool found = false;
  long long needed = max_iterations;
  const long long floor_iterations = std::max(min_iterations, 0);

  for (long long it = 0; (it < needed || it < floor_iterations) && it < max_iterations; ++it) {
    std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    if (a == b || b == c || a == c) continue;
    Eigen::Vector3d nrm;
    double d = 0.0;
    if (!detail::plane_from_points(cloud[subset[a]], cloud[subset[b]], cloud[subset[c]], nrm, d))
      continue;

    std::size_t count = 0;
    double residual = 0.0;
    double cost = 0.0;
    bool hopeless = false;
    for (std::size_t k = 0; k < n; ++k) {
      double dist = std::abs(nrm.dot(cloud[subset[k]]) + d);
      if (dist <= threshold) {
        ++count;
        residual += dist;
        cost += dist * dist;
      } else {
        cost += t2;
      }
      if (score == PlaneScore::inliers ? count + (n - k - 1) < best_count : found && cost > best_cost) {
        hopeless = true;
        break;
      }
    }
    if (hopeless) continue;
    bool better = score == PlaneScore::inliers
                      ? count > best_count || (count == best_count && residual < best_residual)
                      : cost < best_cost;
    if (!found || better) {
      found = true;
      best_count = count;
      best_residual = residual;
      best_cost = cost;
      best_n = nrm;
      best_d = d;
      if (probability < 1.0) {
        double w = static_cast<double>(count) / static_cast<double>(n);
        double p_none = 1.0 - w * w * w;
        if (p_none <= 0.0) {
          needed = it + 1;
        } else {
          double k = std::log(1.0 - probability) / std::log(p_none);
          needed = std::min<long long>(max_iterations, static_cast<long long>(std::ceil(k)));
        }
      }
    }
  }
  if (!found) return best;
  best.normal = best_n;
  best.offset = best_d;
  for (auto i : subset)
    if (std::abs(best_n.dot(cloud[i]) + best_d) <= threshold) best.inliers.push_back(i);
  return best;
}

/// k-nearest-neighbour PCA normals, with neighbourhoods drawn from `subset`
/// (all points when empty). Returned in subset order.
inline std::vector<Eigen::Vector3d> estimate_normals(std::span<const Point> cloud, int k,
                                                     std::span<const std::size_t> subset = {}) {
  std::vector<std::size_t> all;
  if (subset.empty()) {
    all.resize(cloud.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    subset = all;
  }
  const std::size_t n = subset.size();
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 3)), n);
  std::vector<Eigen::Vector3d> normals(n, Eigen::Vector3d::UnitZ());
  if (n < 3) return normals;
  std::vector<std::pair<double, std::size_t>> dist(n);
  std::vector<std::size_t> nb(kk);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = cloud[subset[i]];
    for (std::size_t j = 0; j < n; ++j) dist[j] = {(cloud[subset[j]] - p).squaredNorm(), j};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    for (std::size_t j = 0; j < kk; ++j) nb[j] = subset[dist[j].second];
    normals[i] = detail::pca_normal(cloud, nb);
  }
  return normals;
}

struct TabletopSegmentation {
  PlaneModel table;
  Eigen::Matrix3d to_table = Eigen::Matrix3d::Identity();  // rotates table normal onto +z
  Cloud object;                                           // table frame, z = height above plane
  std::vector<std::size_t> object_indices;                // into the input cloud
  bool empty() const { return object.empty(); }
};

/// Finds the dominant support plane and returns everything above it, expressed
/// in a frame whose z axis is the plane normal and whose origin lies on the plane.
inline TabletopSegmentation segment_tabletop(std::span<const Point> cloud, const RansacParams& params) {
  if (cloud.size() < 3) fail(ErrorCode::segmentation_failure, "cloud too small for plane fitting");
  PlaneModel plane = ransac_plane(cloud, params.distance_threshold, params.max_iterations,
                                  params.probability, params.seed);
  double fraction = static_cast<double>(plane.inliers.size()) / static_cast<double>(cloud.size());
  if (plane.inliers.empty() || fraction < params.min_inlier_fraction)
    fail(ErrorCode::segmentation_failure,
         "no support plane: best inlier fraction " + format_double(fraction) + " below minimum " +
             format_double(params.min_inlier_fraction));

  // The loose band can favour planes straddling the table and low object
  // parts; a tight second pass over the inliers isolates the table itself.
  const double band = params.distance_threshold * 0.25;
  PlaneModel fine = ransac_plane(cloud, band, params.max_iterations, params.probability,
                                 derive_seed(params.seed, "table-refine"), plane.inliers);
  std::vector<std::size_t> core = fine.inliers.size() >= 3 ? fine.inliers : plane.inliers;
  for (int pass = 0; pass < 2 && core.size() >= 3; ++pass) {
    Eigen::Vector3d c;
    Eigen::Vector3d n = detail::pca_normal(cloud, core, &c);
    plane.normal = n;
    plane.offset = -n.dot(c);
    std::vector<std::size_t> next;
    for (auto i : plane.inliers)
      if (std::abs(plane.signed_distance(cloud[i])) <= band) next.push_back(i);
    if (next == core) break;
    core.swap(next);
  }

  TabletopSegmentation seg;
  seg.to_table = Eigen::Quaterniond::FromTwoVectors(plane.normal, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double height = plane.signed_distance(cloud[i]);
    if (height > params.object_margin) {
      Point q = seg.to_table * cloud[i];
      q.z() = height;
      seg.object.push_back(q);
      seg.object_indices.push_back(i);
    }
  }
  seg.table = std::move(plane);
  return seg;
}

inline BoundingBox bounding_box(std::span<const Point> cloud) {
  if (cloud.empty()) fail(ErrorCode::invalid_argument, "bounding box of an empty cloud");
  BoundingBox b{cloud.front(), cloud.front()};
  for (const auto& p : cloud) {
    b.min = b.min.cwiseMin(p);
    b.max = b.max.cwiseMax(p);
  }
  return b;
}

inline SizeResult size_from_box(const BoundingBox& box) {
  SizeResult r;
  r.box = box;
  r.extents = box.extents();
  double m = r.extents.maxCoeff();
  if (!(m > 0.0)) fail(ErrorCode::degenerate_geometry, "object cloud has zero extent");
  r.si = {r.extents.x() / m, r.extents.y() / m, r.extents.z() / m};
  return r;
}

/// Axis-aligned extents of an axis-normal object cloud, normalised by the largest.
inline SizeResult compute_size(std::span<const Point> object_cloud) {
  return size_from_box(bounding_box(object_cloud));
}

/// As compute_size, for a cloud in table frame: the object stands on z = 0, so
/// its base (hidden by or merged into the table) is taken from the plane.
inline SizeResult compute_size_on_support(std::span<const Point> object_cloud_table_frame) {
  BoundingBox box = bounding_box(object_cloud_table_frame);
  box.min.z() = std::min(box.min.z(), 0.0);
  return size_from_box(box);
}

struct FlatnessParams {
  RansacParams ransac;
  double consensus = 0.95;
  double max_normal_angle = 15.0 * std::numbers::pi / 180.0;
  int normal_neighbors = 10;
  std::size_t min_plane_points = 3;
  double min_plane_fraction = 0.05;  // smaller planes are indistinguishable from outliers
  int max_planes = 8;
};

struct FlatnessResult {
  double fl = 0.0;
  bool accepted = false;
  PlaneModel top_plane;
  double aligned_fraction = 0.0;  // share of plane normals within the angle bound
};

/// Whether the surface around point i (its k nearest neighbours within `pool`)
/// agrees with a plane of normal n. Line-like neighbourhoods, such as a thin
/// straight rim, have no defined normal; they agree when they run across n.
inline bool locally_aligned(std::span<const Point> cloud, std::span<const std::size_t> pool, std::size_t i, int k,
                            const Eigen::Vector3d& n, double max_angle, double line_ratio = 0.05) {
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 3)), pool.size());
  std::vector<std::pair<double, std::size_t>> dist(pool.size());
  for (std::size_t j = 0; j < pool.size(); ++j) dist[j] = {(cloud[pool[j]] - cloud[i]).squaredNorm(), pool[j]};
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (std::size_t j = 0; j < kk; ++j) c += cloud[dist[j].second];
  c /= static_cast<double>(kk);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t j = 0; j < kk; ++j) {
    Eigen::Vector3d q = cloud[dist[j].second] - c;
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const auto& ev = es.eigenvalues();
  if (ev(2) <= 0.0) return false;
  if (ev(1) <= line_ratio * ev(2)) return std::abs(es.eigenvectors().col(2).dot(n)) <= std::sin(max_angle);
  return std::abs(es.eigenvectors().col(0).dot(n)) >= std::cos(max_angle);
}

/// Sequentially peels planes off the top-view object cloud, takes the highest
/// one as the top-level plane and accepts it only if enough of its point
/// normals agree with the plane normal.
inline FlatnessResult compute_flatness(std::span<const Point> object_cloud, const FlatnessParams& params = {}) {
  if (object_cloud.empty()) fail(ErrorCode::invalid_argument, "flatness of an empty cloud");
  FlatnessResult res;
  std::vector<std::size_t> remaining(object_cloud.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  std::vector<PlaneModel> planes;
  std::vector<double> heights;
  const std::size_t min_points = std::max<std::size_t>(
      {3, params.min_plane_points,
       static_cast<std::size_t>(std::ceil(params.min_plane_fraction * static_cast<double>(object_cloud.size())))});
  while (remaining.size() >= min_points &&
         static_cast<int>(planes.size()) < params.max_planes) {
    PlaneModel pl = ransac_plane(object_cloud, params.ransac.distance_threshold,
                                 params.ransac.max_iterations, params.ransac.probability,
                                 derive_seed(params.ransac.seed, "flatness-plane", planes.size()),
                                 remaining, PlaneScore::truncated_quadratic, params.ransac.min_iterations);
    if (pl.inliers.size() < min_points) break;
    // The loose band can straddle two nearby levels; refit on the tight core.
    PlaneModel core = ransac_plane(object_cloud, 0.25 * params.ransac.distance_threshold, params.ransac.max_iterations,
                                   params.ransac.probability,
                                   derive_seed(params.ransac.seed, "flatness-core", planes.size()), pl.inliers,
                                   PlaneScore::truncated_quadratic, params.ransac.min_iterations);
    if (core.inliers.size() >= 3) {
      Eigen::Vector3d c;
      pl.normal = detail::pca_normal(object_cloud, core.inliers, &c);
      pl.offset = -pl.normal.dot(c);
      pl.inliers.clear();
      for (auto i : remaining)
        if (std::abs(pl.signed_distance(object_cloud[i])) <= params.ransac.distance_threshold) pl.inliers.push_back(i);
      if (pl.inliers.size() < min_points) break;
    }
    double zsum = 0.0;
    for (auto i : pl.inliers) zsum += object_cloud[i].z();
    heights.push_back(zsum / static_cast<double>(pl.inliers.size()));
    std::vector<std::size_t> rest;
    rest.reserve(remaining.size());
    std::set_difference(remaining.begin(), remaining.end(), pl.inliers.begin(), pl.inliers.end(),
                        std::back_inserter(rest));
    remaining.swap(rest);
    planes.push_back(std::move(pl));
  }
  if (planes.empty()) return res;

  std::size_t top = static_cast<std::size_t>(std::max_element(heights.begin(), heights.end()) - heights.begin());
  PlaneModel& plane = planes[top];
  res.top_plane = plane;
  // A plane lying well below the highest object points is not the top (a cup floor under a rim).
  double zmax = -std::numeric_limits<double>::infinity();
  for (const auto& p : object_cloud) zmax = std::max(zmax, p.z());
  if (zmax - heights[top] > params.ransac.distance_threshold) return res;
  std::size_t aligned = 0;
  for (auto i : plane.inliers)
    if (locally_aligned(object_cloud, plane.inliers, i, params.normal_neighbors, plane.normal, params.max_normal_angle)) ++aligned;
  const std::size_t total = plane.inliers.size();
  res.aligned_fraction = static_cast<double>(aligned) / static_cast<double>(total);
  res.accepted = res.aligned_fraction >= params.consensus;
  res.fl = res.accepted ? static_cast<double>(plane.inliers.size()) / static_cast<double>(object_cloud.size())
                        : 0.0;
  res.top_plane = std::move(plane);
  return res;
}

struct HollownessParams {
  double min_cavity_depth = 0.01;
  // A base this far above the rim is a measurement fault, not noise.
  double rim_tolerance = 0.01;
};

struct HollownessResult {
  double ho = 0.0;
  double base = 0.0;
  double cavity_depth = 0.0;
  bool sanitized = false;
};

inline HollownessResult compute_hollowness(double h, double d_r, double d_h, const HollownessParams& params = {}) {
  if (!(h > 0.0)) fail(ErrorCode::invalid_argument, "object height must be positive");
  if (!(d_h >= 0.0) || !(d_r >= d_h))
    fail(ErrorCode::invalid_argument, "marker distances must satisfy d_r >= d_h >= 0");
  HollownessResult r;
  r.base = d_r - d_h;
  if (r.base > h + params.rim_tolerance)
    fail(ErrorCode::inconsistent_measurement,
         "in-object marker lies " + format_double(r.base - h) + " m above the object rim");
  r.cavity_depth = h - r.base;
  if (r.cavity_depth < params.min_cavity_depth - 1e-12) {  // absorbs rounding in d_r - d_h
    r.sanitized = true;
    r.ho = 0.0;
    return r;
  }
  r.ho = clamp01(r.cavity_depth / h);
  return r;
}

}  // namespace rocs::geometry
