#pragma once

// Seeded Lloyd k-means with k-means++ initialisation and canonical cluster order.

#include "rocs/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace rocs::kmeans {

using Vec = std::vector<double>;

struct Params {
  int k = 4;
  std::uint64_t seed = 0;
  int max_iterations = 300;
};

struct Result {
  std::vector<Vec> centroids;           // canonical order
  std::vector<int> assignment;          // index into centroids
  std::vector<double> objective_trace;  // after each assignment step
  int iterations = 0;
  bool converged = false;
  double objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

inline double squared_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// Nearest centroid, ties resolved to the lower index.
inline int nearest(const Vec& p, const std::vector<Vec>& centroids, double* dist = nullptr) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    double d = squared_distance(p, centroids[c]);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = bd;
  return best;
}

/// Sort key: norm signed by the component sum, then lexicographic on components.
/// For one dimension this orders by value; for non-positive vectors the most
/// negative comes first.
inline bool canonical_less(const Vec& a, const Vec& b) {
  auto key = [](const Vec& v) {
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    double n = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    return s < 0.0 ? -n : n;
  };
  double ka = key(a), kb = key(b);
  if (ka != kb) return ka < kb;
  return a < b;
}

inline std::size_t distinct_count(const std::vector<Vec>& points) {
  std::set<Vec> s(points.begin(), points.end());
  return s.size();
}

namespace detail {

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline void check_input(const std::vector<Vec>& points, int k) {
  if (k < 2) fail(ErrorCode::clustering_error, "cluster count must be at least 2");
  if (points.empty()) fail(ErrorCode::clustering_error, "no points to cluster");
  const std::size_t d = points.front().size();
  if (d == 0) fail(ErrorCode::clustering_error, "points have zero dimension");
  for (const auto& p : points) {
    if (p.size() != d) fail(ErrorCode::clustering_error, "points have mixed dimensions");
    for (double x : p)
      if (!std::isfinite(x)) fail(ErrorCode::clustering_error, "non-finite coordinate");
  }
  if (distinct_count(points) < static_cast<std::size_t>(k))
    fail(ErrorCode::clustering_error, "fewer distinct points (" + std::to_string(distinct_count(points)) +
                                          ") than clusters (" + std::to_string(k) + ")");
}

}  // namespace detail

/// k-means++ seeding (D² weighting). Chosen points have zero weight, so seeds are distinct.
inline std::vector<Vec> plus_plus_init(const std::vector<Vec>& points, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec> c;
  c.push_back(points[static_cast<std::size_t>(detail::unit(rng) * static_cast<double>(points.size()))]);
  std::vector<double> d2(points.size());
  while (static_cast<int>(c.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double d;
      nearest(points[i], c, &d);
      d2[i] = d;
      total += d;
    }
    double r = detail::unit(rng) * total;
    std::size_t pick = points.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > r) break;
    }
    c.push_back(points[pick]);
  }
  return c;
}

/// Lloyd iterations from given centroids. The returned model is canonicalised,
/// so any permutation of `initial` yields the same result.
inline Result lloyd(const std::vector<Vec>& points, std::vector<Vec> initial, int max_iterations = 300) {
  const int k = static_cast<int>(initial.size());
  detail::check_input(points, k);
  Result r;
  std::vector<Vec> c = std::move(initial);
  // Fix the cluster order up front so ties during iteration do not depend on
  // the caller's ordering of the initial centroids.
  std::sort(c.begin(), c.end(), canonical_less);
  std::vector<int> assign(points.size(), -1);
  const std::size_t dim = points.front().size();

  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double obj = 0.0;
    std::vector<double> dist(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      int a = nearest(points[i], c, &dist[i]);
      obj += dist[i];
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    r.objective_trace.push_back(obj);
    r.iterations = it + 1;
    if (!changed && it > 0) {
      r.converged = true;
      break;
    }
    std::vector<Vec> sum(k, Vec(dim, 0.0));
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++count[assign[i]];
      for (std::size_t j = 0; j < dim; ++j) sum[assign[i]][j] += points[i][j];
    }
    for (int j = 0; j < k; ++j) {
      if (count[j] == 0) {
        // Reseed an empty cluster at the worst-served point.
        std::size_t far = 0;
        for (std::size_t i = 1; i < points.size(); ++i)
          if (dist[i] > dist[far]) far = i;
        c[j] = points[far];
        dist[far] = 0.0;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) c[j][d] = sum[j][d] / static_cast<double>(count[j]);
    }
  }

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return canonical_less(c[a], c[b]); });
  for (int j = 0; j < k; ++j) r.centroids.push_back(c[order[j]]);
  for (int j = 1; j < k; ++j)
    if (r.centroids[j] == r.centroids[j - 1]) fail(ErrorCode::clustering_error, "k-means produced coincident centroids");
  r.assignment.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) r.assignment[i] = nearest(points[i], r.centroids);
  return r;
}

inline Result run(const std::vector<Vec>& points, const Params& p) {
  detail::check_input(points, p.k);
  return lloyd(points, plus_plus_init(points, p.k, p.seed), p.max_iterations);
}

}  // namespace rocs::kmeans
