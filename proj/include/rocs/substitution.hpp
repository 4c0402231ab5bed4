#pragma once

// Tool-substitution ranking over class proportion vectors.

#include "rocs/core.hpp"
#include "rocs/knowledge.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace rocs::substitution {

using knowledge::KnowledgeBase;

/// Symbol vocabulary in model order: property blocks, each with indices 0..η-1.
inline std::vector<std::string> vocabulary(const KnowledgeBase& kb) {
  std::vector<std::string> v;
  for (const auto& m : kb.models)
    for (int i = 0; i < m.eta; ++i) v.push_back(knowledge::QualitySymbol{m.property, i}.str());
  return v;
}

inline std::vector<double> class_vector(const KnowledgeBase& kb, const std::string& cls) {
  std::map<std::string, std::size_t> index;
  auto vocab = vocabulary(kb);
  for (std::size_t i = 0; i < vocab.size(); ++i) index[vocab[i]] = i;
  std::vector<double> v(vocab.size(), 0.0);
  bool found = false;
  for (const auto& t : kb.concepts) {
    if (t.class_label != cls) continue;
    found = true;
    auto it = index.find(t.quality.str());
    if (it == index.end()) fail(ErrorCode::schema_mismatch, "concept symbol " + t.quality.str() + " has no model");
    v[it->second] = t.proportion;
  }
  if (!found) fail(ErrorCode::unknown_class, "class '" + cls + "' is not in the knowledge base");
  return v;
}

template <typename M>
concept Metric = requires(const M& m, const std::vector<double>& a) {
  { m(a, a) } -> std::convertible_to<double>;
};

/// dot / sqrt(|a|²|b|²); symmetric bit for bit, exactly 1 on identical inputs,
/// 0 when either side is the zero vector.
struct Cosine {
  double operator()(const std::vector<double>& a, const std::vector<double>& b) const {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      dot += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    if (a == b) return 1.0;
    return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
  }
};

struct Query {
  std::string missing;
  std::vector<std::string> candidates;
};

struct Ranked {
  std::string candidate;
  double similarity = 0.0;
  bool selected = false;
};

struct Result {
  std::string missing;
  std::vector<Ranked> ranking;
  std::vector<std::string> selected() const {
    std::vector<std::string> s;
    for (const auto& r : ranking)
      if (r.selected) s.push_back(r.candidate);
    return s;
  }
};

inline constexpr double kDefaultThreshold = 0.8;

template <Metric M = Cosine>
Result substitute(const KnowledgeBase& kb, const Query& q, double threshold = kDefaultThreshold, const M& metric = {}) {
  if (q.candidates.empty()) fail(ErrorCode::invalid_argument, "query for '" + q.missing + "' has no candidates");
  if (!(threshold >= 0.0 && threshold <= 1.0)) fail(ErrorCode::out_of_range, "threshold must lie in [0,1]");
  auto target = class_vector(kb, q.missing);
  Result r{q.missing, {}};
  for (const auto& c : q.candidates) {
    double s = metric(target, class_vector(kb, c));
    r.ranking.push_back({c, s, s >= threshold});
  }
  std::stable_sort(r.ranking.begin(), r.ranking.end(), [](const Ranked& a, const Ranked& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.candidate < b.candidate;
  });
  return r;
}

/// Pairwise similarity over all KB classes (heat-map layout).
template <Metric M = Cosine>
std::vector<std::vector<double>> similarity_matrix(const KnowledgeBase& kb, const std::vector<std::string>& classes,
                                                   const M& metric = {}) {
  std::vector<std::vector<double>> vecs;
  for (const auto& c : classes) vecs.push_back(class_vector(kb, c));
  std::vector<std::vector<double>> m(classes.size(), std::vector<double>(classes.size()));
  for (std::size_t i = 0; i < classes.size(); ++i)
    for (std::size_t j = 0; j < classes.size(); ++j) m[i][j] = metric(vecs[i], vecs[j]);
  return m;
}

// ---------------------------------------------------------------------------
// Query / result files

inline std::vector<Query> parse_queries(const nlohmann::ordered_json& j) {
  auto one = [](const nlohmann::ordered_json& q) {
    Query out;
    out.missing = q.at("missing").get<std::string>();
    out.candidates = q.at("candidates").get<std::vector<std::string>>();
    return out;
  };
  std::vector<Query> qs;
  try {
    if (j.is_object() && j.contains("queries")) {
      for (const auto& q : j.at("queries")) qs.push_back(one(q));
    } else if (j.is_array()) {
      for (const auto& q : j) qs.push_back(one(q));
    } else {
      qs.push_back(one(j));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::schema_mismatch, std::string("query file: ") + e.what());
  }
  if (qs.empty()) fail(ErrorCode::invalid_argument, "query file contains no queries");
  return qs;
}

inline nlohmann::ordered_json to_json(const std::vector<Result>& results, double threshold) {
  using J = nlohmann::ordered_json;
  J arr = J::array();
  for (const auto& r : results) {
    J rank = J::array();
    for (const auto& x : r.ranking)
      rank.push_back({{"candidate", x.candidate}, {"similarity", x.similarity}, {"selected", x.selected}});
    arr.push_back({{"missing", r.missing}, {"ranking", std::move(rank)}, {"selected", r.selected()}});
  }
  return J{{"metric", "cosine"}, {"threshold", threshold}, {"results", std::move(arr)}};
}

/// Rows are missing classes, columns the union of candidates; blank where not queried.
inline void write_heatmap_csv(std::ostream& out, const std::vector<Result>& results) {
  std::vector<std::string> cols;
  for (const auto& r : results)
    for (const auto& x : r.ranking)
      if (std::find(cols.begin(), cols.end(), x.candidate) == cols.end()) cols.push_back(x.candidate);
  std::sort(cols.begin(), cols.end());
  out << "missing";
  for (const auto& c : cols) out << ',' << c;
  out << '\n';
  for (const auto& r : results) {
    out << r.missing;
    for (const auto& c : cols) {
      out << ',';
      for (const auto& x : r.ranking)
        if (x.candidate == c) out << format_double(x.similarity);
    }
    out << '\n';
  }
}

}  // namespace rocs::substitution
