#pragma once

// Symbolic knowledge from numeric property data.
//
//   subcategorize   cluster one property's per-instance values into η quality symbols
//   attribute       merge per-property fragments into the holds relation
//   conceptualize   per-class proportions of instances holding each symbol
//   partition_pyramid  class histograms of clusters for a range of k
//
// Values are instance means over repetitions. Heaviness is min-max scaled over
// the instances before clustering; everything else is used as is.

#include "rocs/core.hpp"
#include "rocs/dataset.hpp"
#include "rocs/functional.hpp"
#include "rocs/kmeans.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rocs::knowledge {

using dataset::InstanceKey;

enum class Prop { size, flatness, hollowness, heaviness, rigidity, roughness, support, containment, movability, blockage };

inline constexpr std::array<Prop, 10> kProps{Prop::size,     Prop::flatness,  Prop::hollowness,  Prop::heaviness,
                                             Prop::rigidity, Prop::roughness, Prop::support,     Prop::containment,
                                             Prop::movability, Prop::blockage};

inline std::string_view prop_name(Prop p) {
  static constexpr std::array<std::string_view, 10> n{"size",     "flatness",  "hollowness", "heaviness",   "rigidity",
                                                      "roughness", "support",  "containment", "movability", "blockage"};
  return n[static_cast<std::size_t>(p)];
}

inline std::optional<Prop> parse_prop(std::string_view s) {
  for (auto p : kProps)
    if (prop_name(p) == s) return p;
  return std::nullopt;
}

struct QualitySymbol {
  std::string property;
  int index = 0;
  std::string str() const { return property + "_" + std::to_string(index); }
  auto operator<=>(const QualitySymbol&) const = default;
};

struct ClusterModel {
  std::string property;
  int eta = 0;
  std::uint64_t seed = 0;
  std::vector<kmeans::Vec> centroids;
  bool operator==(const ClusterModel&) const = default;
};

struct HoldsFragment {
  std::string property;
  std::vector<std::pair<InstanceKey, QualitySymbol>> pairs;
};

/// holds[(instance, property)] = symbol
using HoldsRelation = std::map<std::pair<InstanceKey, std::string>, QualitySymbol>;

struct ConceptTuple {
  std::string class_label;
  QualitySymbol quality;
  double proportion = 0.0;
  bool operator==(const ConceptTuple&) const = default;
};

struct PropertyValues {
  std::string property;
  std::vector<InstanceKey> instances;  // only instances where the property is defined
  std::vector<kmeans::Vec> values;
};

/// One clustering per property over instances that have a value.
inline std::pair<ClusterModel, HoldsFragment> subcategorize(const PropertyValues& pv, int eta, std::uint64_t seed,
                                                            kmeans::Result* detail_out = nullptr) {
  if (eta < 2) fail(ErrorCode::clustering_error, pv.property + ": eta must be at least 2");
  if (pv.values.size() < static_cast<std::size_t>(eta))
    fail(ErrorCode::clustering_error, pv.property + ": " + std::to_string(pv.values.size()) +
                                          " instances is fewer than eta=" + std::to_string(eta));
  kmeans::Result km;
  try {
    km = kmeans::run(pv.values, {eta, seed, 300});
  } catch (const Error& e) {
    fail(e.code(), pv.property + ": " + e.what());
  }
  ClusterModel m{pv.property, eta, seed, km.centroids};
  HoldsFragment f{pv.property, {}};
  for (std::size_t i = 0; i < pv.instances.size(); ++i)
    f.pairs.push_back({pv.instances[i], QualitySymbol{pv.property, km.assignment[i]}});
  if (detail_out) *detail_out = std::move(km);
  return {std::move(m), std::move(f)};
}

inline HoldsRelation attribute(const std::vector<HoldsFragment>& fragments) {
  HoldsRelation h;
  for (const auto& f : fragments)
    for (const auto& [inst, sym] : f.pairs) {
      auto [it, inserted] = h.try_emplace({inst, sym.property}, sym);
      if (!inserted)
        fail(ErrorCode::attribution_conflict, "instance " + inst.class_label + "/" + inst.instance_id +
                                                  " already holds " + it->second.str() + "; conflicting " + sym.str());
    }
  return h;
}

using ClassMembership = std::map<std::string, std::vector<InstanceKey>>;

inline ClassMembership membership_of(const std::vector<InstanceKey>& keys) {
  ClassMembership m;
  for (const auto& k : keys) m[k.class_label].push_back(k);
  return m;
}

/// m = |class instances holding t| / |class instances with that property|.
/// Zero proportions are omitted. Output is ordered by class, property, index.
inline std::vector<ConceptTuple> conceptualize(const HoldsRelation& holds, const ClassMembership& classes,
                                               const std::vector<std::string>& property_order = {}) {
  std::vector<std::string> props = property_order;
  if (props.empty()) {
    for (const auto& [key, sym] : holds)
      if (std::find(props.begin(), props.end(), key.second) == props.end()) props.push_back(key.second);
    std::sort(props.begin(), props.end());
  }
  std::vector<ConceptTuple> out;
  for (const auto& [cls, members] : classes) {
    if (members.empty()) fail(ErrorCode::invalid_argument, "class '" + cls + "' has no instances");
    for (const auto& prop : props) {
      std::map<int, std::size_t> counts;
      std::size_t measured = 0;
      for (const auto& inst : members) {
        auto it = holds.find({inst, prop});
        if (it == holds.end()) continue;
        ++measured;
        ++counts[it->second.index];
      }
      for (const auto& [idx, n] : counts)
        out.push_back({cls, QualitySymbol{prop, idx}, static_cast<double>(n) / static_cast<double>(measured)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Property vectors from instance means

struct Normalization {
  double heaviness_min = 0.0;
  double heaviness_max = 0.0;
  double scale(double g) const {
    double span = heaviness_max - heaviness_min;
    return span > 0.0 ? clamp01((g - heaviness_min) / span) : 0.0;
  }
  bool operator==(const Normalization&) const = default;
};

inline Normalization fit_normalization(const std::vector<dataset::InstanceMeans>& means) {
  Normalization n;
  bool any = false;
  for (const auto& m : means)
    if (auto he = m.value(dataset::Property::heaviness)) {
      n.heaviness_min = any ? std::min(n.heaviness_min, *he) : *he;
      n.heaviness_max = any ? std::max(n.heaviness_max, *he) : *he;
      any = true;
    }
  return n;
}

inline std::optional<PhysicalVector> physical_vector(const dataset::InstanceMeans& m, const Normalization& norm) {
  using dataset::Property;
  auto get = [&](Property p) { return m.value(p); };
  auto sl = get(Property::size_length), sw = get(Property::size_width), sh = get(Property::size_height);
  auto fl = get(Property::flatness), ho = get(Property::hollowness), he = get(Property::heaviness);
  auto ri = get(Property::rigidity);
  if (!sl || !sw || !sh || !fl || !ho || !he || !ri) return std::nullopt;
  return PhysicalVector{*sl, *sw, *sh, *fl, *ho, norm.scale(*he), *ri, get(Property::roughness)};
}

template <std::size_t N>
kmeans::Vec to_vec(const std::array<double, N>& a) {
  return kmeans::Vec(a.begin(), a.end());
}

inline std::optional<kmeans::Vec> property_vector(Prop p, const PhysicalVector& v) {
  switch (p) {
    case Prop::size: return kmeans::Vec{v.si_l, v.si_w, v.si_h};
    case Prop::flatness: return kmeans::Vec{v.fl};
    case Prop::hollowness: return kmeans::Vec{v.ho};
    case Prop::heaviness: return kmeans::Vec{v.he};
    case Prop::rigidity: return kmeans::Vec{v.ri};
    case Prop::roughness:
      if (!v.ro) return std::nullopt;
      return kmeans::Vec{*v.ro};
    case Prop::support: return to_vec(derive_support(v));
    case Prop::containment: return to_vec(derive_containment(v));
    case Prop::movability:
      if (auto mo = derive_movability(v)) return to_vec(*mo);
      return std::nullopt;
    case Prop::blockage:
      if (auto bl = derive_blockage(v)) return to_vec(*bl);
      return std::nullopt;
  }
  return std::nullopt;
}

inline PropertyValues collect(Prop p, const std::vector<dataset::InstanceMeans>& means, const Normalization& norm) {
  PropertyValues pv{std::string(prop_name(p)), {}, {}};
  for (const auto& m : means) {
    auto phys = physical_vector(m, norm);
    if (!phys) continue;
    if (auto v = property_vector(p, *phys)) {
      pv.instances.push_back(m.key);
      pv.values.push_back(std::move(*v));
    }
  }
  return pv;
}

// ---------------------------------------------------------------------------
// Knowledge base

struct BuildConfig {
  std::uint64_t seed = 0;
  int default_eta = 4;
  std::map<std::string, int> eta;  // per-property override
  int eta_for(Prop p) const {
    auto it = eta.find(std::string(prop_name(p)));
    return it == eta.end() ? default_eta : it->second;
  }
};

struct KnowledgeBase {
  std::uint64_t seed = 0;
  Normalization normalization;
  std::vector<ClusterModel> models;
  HoldsRelation holds;
  std::vector<ConceptTuple> concepts;

  std::vector<std::string> classes() const {
    std::set<std::string> c;
    for (const auto& t : concepts) c.insert(t.class_label);
    return {c.begin(), c.end()};
  }
  bool has_class(std::string_view cls) const {
    return std::any_of(concepts.begin(), concepts.end(), [&](const ConceptTuple& t) { return t.class_label == cls; });
  }
};

inline std::uint64_t property_seed(std::uint64_t root, Prop p) {
  return derive_seed(root, "kmeans", static_cast<std::uint64_t>(p));
}

inline KnowledgeBase build(const std::vector<dataset::InstanceMeans>& means, const BuildConfig& cfg) {
  KnowledgeBase kb;
  kb.seed = cfg.seed;
  kb.normalization = fit_normalization(means);
  std::vector<HoldsFragment> fragments;
  std::vector<std::string> order;
  std::vector<InstanceKey> keys;
  for (const auto& m : means) keys.push_back(m.key);
  for (auto p : kProps) {
    auto pv = collect(p, means, kb.normalization);
    if (pv.values.empty()) continue;
    auto [model, frag] = subcategorize(pv, cfg.eta_for(p), property_seed(cfg.seed, p));
    kb.models.push_back(std::move(model));
    fragments.push_back(std::move(frag));
    order.emplace_back(prop_name(p));
  }
  kb.holds = attribute(fragments);
  kb.concepts = conceptualize(kb.holds, membership_of(keys), order);
  return kb;
}

inline KnowledgeBase build(const std::vector<dataset::ObservationRecord>& records, const BuildConfig& cfg) {
  return build(dataset::instance_means(records), cfg);
}

inline constexpr const char* kBlockageNote =
    "symbols are ordered by ascending centroid; blockage values are negated (<= 0), so blockage_0 is the most "
    "blocking (heaviest and roughest)";

inline nlohmann::ordered_json to_json(const KnowledgeBase& kb) {
  using J = nlohmann::ordered_json;
  J j;
  j["format"] = "rocs-kb/1";
  j["note"] = kBlockageNote;
  j["seed"] = kb.seed;
  j["normalization"] = {{"heaviness_min", kb.normalization.heaviness_min},
                        {"heaviness_max", kb.normalization.heaviness_max}};
  J models = J::array();
  for (const auto& m : kb.models)
    models.push_back({{"property", m.property}, {"eta", m.eta}, {"seed", m.seed}, {"centroids", m.centroids}});
  j["properties"] = std::move(models);
  J holds = J::array();
  for (const auto& [key, sym] : kb.holds)
    holds.push_back({{"class", key.first.class_label},
                     {"instance", key.first.instance_id},
                     {"property", key.second},
                     {"symbol", sym.str()}});
  j["holds"] = std::move(holds);
  J concepts = J::array();
  for (const auto& t : kb.concepts)
    concepts.push_back({{"class", t.class_label}, {"quality", t.quality.str()}, {"proportion", t.proportion}});
  j["concepts"] = std::move(concepts);
  return j;
}

inline QualitySymbol parse_symbol(const std::string& s) {
  auto pos = s.rfind('_');
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size())
    fail(ErrorCode::schema_mismatch, "malformed quality symbol '" + s + "'");
  auto idx = parse_int(s.substr(pos + 1));
  if (!idx || *idx < 0) fail(ErrorCode::schema_mismatch, "malformed quality symbol '" + s + "'");
  return {s.substr(0, pos), static_cast<int>(*idx)};
}

inline KnowledgeBase from_json(const nlohmann::ordered_json& j) {
  KnowledgeBase kb;
  try {
    if (j.at("format").get<std::string>() != "rocs-kb/1") fail(ErrorCode::schema_mismatch, "unsupported KB format");
    kb.seed = j.at("seed").get<std::uint64_t>();
    kb.normalization.heaviness_min = j.at("normalization").at("heaviness_min").get<double>();
    kb.normalization.heaviness_max = j.at("normalization").at("heaviness_max").get<double>();
    for (const auto& m : j.at("properties")) {
      ClusterModel cm{m.at("property").get<std::string>(), m.at("eta").get<int>(), m.at("seed").get<std::uint64_t>(),
                      m.at("centroids").get<std::vector<kmeans::Vec>>()};
      if (static_cast<int>(cm.centroids.size()) != cm.eta)
        fail(ErrorCode::schema_mismatch, cm.property + ": centroid count differs from eta");
      kb.models.push_back(std::move(cm));
    }
    for (const auto& h : j.at("holds")) {
      InstanceKey k{h.at("class").get<std::string>(), h.at("instance").get<std::string>()};
      auto prop = h.at("property").get<std::string>();
      auto sym = parse_symbol(h.at("symbol").get<std::string>());
      if (sym.property != prop) fail(ErrorCode::schema_mismatch, "holds symbol does not match its property");
      if (!kb.holds.try_emplace({k, prop}, sym).second)
        fail(ErrorCode::attribution_conflict, "duplicate holds entry for " + k.class_label + "/" + k.instance_id);
    }
    for (const auto& t : j.at("concepts"))
      kb.concepts.push_back({t.at("class").get<std::string>(), parse_symbol(t.at("quality").get<std::string>()),
                             t.at("proportion").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::schema_mismatch, std::string("kb.json: ") + e.what());
  }
  return kb;
}

// ---------------------------------------------------------------------------
// Gradual partitioning

struct PyramidLevel {
  int k = 0;
  std::vector<std::map<std::string, std::size_t>> histograms;  // per cluster, canonical order
  std::vector<int> assignment;
};

inline std::vector<PyramidLevel> partition_pyramid(const PropertyValues& pv, int k_min, int k_max, std::uint64_t seed) {
  std::set<std::string> classes;
  for (const auto& k : pv.instances) classes.insert(k.class_label);
  if (k_min < 2 || k_max < k_min || k_max > static_cast<int>(classes.size()))
    fail(ErrorCode::invalid_argument, "k range must lie within [2, " + std::to_string(classes.size()) + "]");
  std::vector<PyramidLevel> out;
  for (int k = k_min; k <= k_max; ++k) {
    kmeans::Result km;
    subcategorize(pv, k, derive_seed(seed, "pyramid", static_cast<std::uint64_t>(k)), &km);
    PyramidLevel lvl{k, std::vector<std::map<std::string, std::size_t>>(k), km.assignment};
    for (std::size_t i = 0; i < pv.instances.size(); ++i) ++lvl.histograms[km.assignment[i]][pv.instances[i].class_label];
    out.push_back(std::move(lvl));
  }
  return out;
}

inline void write_pyramid_csv(std::ostream& out, const std::string& property, const std::vector<PyramidLevel>& levels) {
  out << "property,k,cluster,class,count\n";
  for (const auto& l : levels)
    for (std::size_t c = 0; c < l.histograms.size(); ++c)
      for (const auto& [cls, n] : l.histograms[c])
        out << property << ',' << l.k << ',' << c << ',' << dataset::detail::csv_field(cls) << ',' << n << '\n';
}

}  // namespace rocs::knowledge
