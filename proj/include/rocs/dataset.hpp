#pragma once

// Observation records: CSV/JSON persistence with row-level validation, and the
// stability, correlation and coverage summaries computed over them.

#include "rocs/core.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace rocs::dataset {

/// Physical property columns, in the canonical column order.
enum class Property { flatness, rigidity, roughness, size_length, size_width, size_height, heaviness, hollowness };

inline constexpr std::array<Property, 8> kProperties{Property::flatness,    Property::rigidity,   Property::roughness,
                                                     Property::size_length, Property::size_width, Property::size_height,
                                                     Property::heaviness,   Property::hollowness};

inline std::string_view property_name(Property p) {
  static constexpr std::array<std::string_view, 8> names{"flatness",   "rigidity",    "roughness", "size_length",
                                                         "size_width", "size_height", "heaviness", "hollowness"};
  return names[static_cast<std::size_t>(p)];
}

struct ObservationRecord {
  std::string class_label;
  std::string instance_id;
  int repetition = 1;
  double flatness = 0.0;
  double rigidity = 0.0;
  std::optional<double> roughness;
  double size_length = 0.0;
  double size_width = 0.0;
  double size_height = 0.0;
  double heaviness = 0.0;
  double hollowness = 0.0;

  std::optional<double> value(Property p) const {
    switch (p) {
      case Property::flatness: return flatness;
      case Property::rigidity: return rigidity;
      case Property::roughness: return roughness;
      case Property::size_length: return size_length;
      case Property::size_width: return size_width;
      case Property::size_height: return size_height;
      case Property::heaviness: return heaviness;
      case Property::hollowness: return hollowness;
    }
    return std::nullopt;
  }

  bool operator==(const ObservationRecord&) const = default;
};

inline const std::string& csv_header() {
  static const std::string h =
      "class,instance,repetition,flatness,rigidity,roughness,size_length,size_width,size_height,heaviness,hollowness";
  return h;
}

struct RowIssue {
  std::size_t line = 0;  // 1-based line in the file, header is line 1
  ErrorCode code = ErrorCode::parse_error;
  std::string message;
};

struct IngestReport {
  std::vector<ObservationRecord> records;
  std::vector<RowIssue> issues;
  std::vector<std::string> warnings;
  bool ok() const { return issues.empty(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace detail

/// Parses the canonical CSV. Every problem is reported with its line; rows with
/// problems are dropped from `records`.
inline IngestReport parse_csv(std::istream& in) {
  IngestReport rep;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::set<std::tuple<std::string, std::string, int>> keys;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line.empty()) continue;
      if (line != csv_header()) {
        rep.issues.push_back({lineno, ErrorCode::schema_mismatch, "header does not match '" + csv_header() + "'"});
        return rep;
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    auto issue = [&](ErrorCode c, const std::string& m) { rep.issues.push_back({lineno, c, "row " + std::to_string(lineno) + ": " + m}); };
    if (f.size() != 11) {
      issue(ErrorCode::parse_error, "expected 11 fields, found " + std::to_string(f.size()));
      continue;
    }
    ObservationRecord r;
    r.class_label = f[0];
    r.instance_id = f[1];
    if (r.class_label.empty() || r.instance_id.empty()) {
      issue(ErrorCode::parse_error, "empty class or instance");
      continue;
    }
    auto rep_no = parse_int(f[2]);
    if (!rep_no || *rep_no < 1 || *rep_no > 1000000) {
      issue(ErrorCode::parse_error, "repetition must be an integer >= 1");
      continue;
    }
    r.repetition = static_cast<int>(*rep_no);
    bool bad = false;
    auto number = [&](std::size_t idx, std::string_view name, bool bounded, bool optional) -> std::optional<double> {
      if (optional && f[idx].find_first_not_of(" \t") == std::string::npos) return std::nullopt;
      auto v = parse_double(f[idx]);
      if (!v) {
        issue(ErrorCode::parse_error, std::string(name) + " is not a number: '" + f[idx] + "'");
        bad = true;
        return std::nullopt;
      }
      if ((bounded && (*v < 0.0 || *v > 1.0)) || (!bounded && *v < 0.0)) {
        issue(ErrorCode::out_of_range, std::string(name) + "=" + f[idx] + (bounded ? " outside [0,1]" : " is negative"));
        bad = true;
        return std::nullopt;
      }
      return v;
    };
    auto fl = number(3, "flatness", true, false);
    auto ri = number(4, "rigidity", true, false);
    auto ro = number(5, "roughness", true, true);
    auto sl = number(6, "size_length", true, false);
    auto sw = number(7, "size_width", true, false);
    auto sh = number(8, "size_height", true, false);
    auto he = number(9, "heaviness", false, false);
    auto ho = number(10, "hollowness", true, false);
    if (bad) continue;
    r.flatness = *fl;
    r.rigidity = *ri;
    r.roughness = ro;
    r.size_length = *sl;
    r.size_width = *sw;
    r.size_height = *sh;
    r.heaviness = *he;
    r.hollowness = *ho;
    if (!keys.insert({r.class_label, r.instance_id, r.repetition}).second) {
      issue(ErrorCode::duplicate_key, "duplicate (" + r.class_label + ", " + r.instance_id + ", " +
                                          std::to_string(r.repetition) + ")");
      continue;
    }
    rep.records.push_back(std::move(r));
  }
  if (!header_seen) rep.warnings.push_back("empty dataset file");
  return rep;
}

inline IngestReport ingest_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open dataset '" + path + "'");
  return parse_csv(in);
}

/// Strict ingestion: any row problem raises, naming the first offending row.
inline std::vector<ObservationRecord> ingest(const std::string& path, std::vector<std::string>* warnings = nullptr) {
  auto rep = ingest_report(path);
  if (!rep.ok()) {
    const auto& first = rep.issues.front();
    std::string msg = path + ":" + std::to_string(first.line) + ": " + first.message;
    if (rep.issues.size() > 1) msg += " (+" + std::to_string(rep.issues.size() - 1) + " more)";
    fail(first.code, msg);
  }
  if (warnings) *warnings = rep.warnings;
  return std::move(rep.records);
}

inline void write_csv(std::ostream& out, const std::vector<ObservationRecord>& records) {
  out << csv_header() << '\n';
  for (const auto& r : records) {
    out << detail::csv_field(r.class_label) << ',' << detail::csv_field(r.instance_id) << ',' << r.repetition << ','
        << format_double(r.flatness) << ',' << format_double(r.rigidity) << ','
        << (r.roughness ? format_double(*r.roughness) : std::string{}) << ',' << format_double(r.size_length) << ','
        << format_double(r.size_width) << ',' << format_double(r.size_height) << ',' << format_double(r.heaviness)
        << ',' << format_double(r.hollowness) << '\n';
  }
}

inline std::string to_csv(const std::vector<ObservationRecord>& records) {
  std::ostringstream os;
  write_csv(os, records);
  return os.str();
}

inline nlohmann::ordered_json to_json(const std::vector<ObservationRecord>& records) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["class"] = r.class_label;
    j["instance"] = r.instance_id;
    j["repetition"] = r.repetition;
    for (auto p : kProperties) {
      auto v = r.value(p);
      j[std::string(property_name(p))] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<ObservationRecord> from_json(const nlohmann::ordered_json& arr) {
  if (!arr.is_array()) fail(ErrorCode::schema_mismatch, "dataset JSON must be an array");
  std::vector<ObservationRecord> out;
  try {
    for (const auto& j : arr) {
      ObservationRecord r;
      r.class_label = j.at("class").get<std::string>();
      r.instance_id = j.at("instance").get<std::string>();
      r.repetition = j.at("repetition").get<int>();
      r.flatness = j.at("flatness").get<double>();
      r.rigidity = j.at("rigidity").get<double>();
      if (!j.at("roughness").is_null()) r.roughness = j.at("roughness").get<double>();
      r.size_length = j.at("size_length").get<double>();
      r.size_width = j.at("size_width").get<double>();
      r.size_height = j.at("size_height").get<double>();
      r.heaviness = j.at("heaviness").get<double>();
      r.hollowness = j.at("hollowness").get<double>();
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::schema_mismatch, std::string("dataset JSON: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

enum class VarianceFlavor { population, sample };

/// Two-pass variance; nullopt below the minimum count (1 for population, 2 for sample).
inline std::optional<double> variance(const std::vector<double>& xs, VarianceFlavor flavor) {
  const std::size_t n = xs.size();
  if (n == 0 || (flavor == VarianceFlavor::sample && n < 2)) return std::nullopt;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(flavor == VarianceFlavor::population ? n : n - 1);
}

inline std::optional<double> mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

struct InstanceKey {
  std::string class_label;
  std::string instance_id;
  auto operator<=>(const InstanceKey&) const = default;
};

/// Repetitions of one instance, grouped in first-appearance order.
struct InstanceGroup {
  InstanceKey key;
  std::vector<const ObservationRecord*> reps;
};

inline std::vector<InstanceGroup> group_instances(const std::vector<ObservationRecord>& records) {
  std::vector<InstanceGroup> groups;
  std::map<InstanceKey, std::size_t> index;
  for (const auto& r : records) {
    InstanceKey k{r.class_label, r.instance_id};
    auto [it, inserted] = index.try_emplace(k, groups.size());
    if (inserted) groups.push_back({k, {}});
    groups[it->second].reps.push_back(&r);
  }
  return groups;
}

inline std::vector<std::string> class_order(const std::vector<ObservationRecord>& records) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(r.class_label).second) out.push_back(r.class_label);
  return out;
}

/// Per-instance mean over repetitions; a property is missing only when no
/// repetition measured it.
struct InstanceMeans {
  InstanceKey key;
  std::size_t repetitions = 0;
  std::array<std::optional<double>, 8> values{};
  std::optional<double> value(Property p) const { return values[static_cast<std::size_t>(p)]; }
};

inline std::vector<InstanceMeans> instance_means(const std::vector<ObservationRecord>& records) {
  std::vector<InstanceMeans> out;
  for (const auto& g : group_instances(records)) {
    InstanceMeans m;
    m.key = g.key;
    m.repetitions = g.reps.size();
    for (auto p : kProperties) {
      std::vector<double> xs;
      for (const auto* r : g.reps)
        if (auto v = r->value(p)) xs.push_back(*v);
      m.values[static_cast<std::size_t>(p)] = mean(xs);
    }
    out.push_back(std::move(m));
  }
  return out;
}

struct ClassSummary {
  std::vector<std::string> classes;
  // cell[class][property]: mean of the instances' repetition variances
  std::vector<std::array<std::optional<double>, 8>> cells;
  std::vector<std::optional<double>> class_mean;
  std::array<std::optional<double>, 8> prop_mean{};
  std::optional<double> overall_mean;  // class_mean of the prop_mean row
  std::vector<std::string> warnings;

  std::optional<double> cell(std::string_view cls, Property p) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] == cls) return cells[i][static_cast<std::size_t>(p)];
    return std::nullopt;
  }
};

inline ClassSummary mean_variance_table(const std::vector<ObservationRecord>& records,
                                        VarianceFlavor flavor = VarianceFlavor::population) {
  ClassSummary s;
  s.classes = class_order(records);
  std::map<std::string, std::size_t> ci;
  for (std::size_t i = 0; i < s.classes.size(); ++i) ci[s.classes[i]] = i;
  std::vector<std::array<std::vector<double>, 8>> per_class(s.classes.size());

  for (const auto& g : group_instances(records)) {
    if (g.reps.size() < 2) {
      s.warnings.push_back("instance " + g.key.class_label + "/" + g.key.instance_id +
                           " has a single repetition; excluded from variances");
      continue;
    }
    for (auto p : kProperties) {
      std::vector<double> xs;
      for (const auto* r : g.reps)
        if (auto v = r->value(p)) xs.push_back(*v);
      if (xs.size() < 2) continue;
      per_class[ci[g.key.class_label]][static_cast<std::size_t>(p)].push_back(*variance(xs, flavor));
    }
  }

  s.cells.resize(s.classes.size());
  s.class_mean.resize(s.classes.size());
  std::array<std::vector<double>, 8> columns;
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    std::vector<double> row;
    for (std::size_t p = 0; p < 8; ++p) {
      s.cells[c][p] = mean(per_class[c][p]);
      if (s.cells[c][p]) {
        row.push_back(*s.cells[c][p]);
        columns[p].push_back(*s.cells[c][p]);
      }
    }
    s.class_mean[c] = mean(row);
  }
  std::vector<double> prow;
  for (std::size_t p = 0; p < 8; ++p) {
    s.prop_mean[p] = mean(columns[p]);
    if (s.prop_mean[p]) prow.push_back(*s.prop_mean[p]);
  }
  s.overall_mean = mean(prow);
  return s;
}

/// Pearson coefficient over pairs where both values are present; nullopt when
/// fewer than two pairs remain or either side has zero variance.
inline std::optional<double> pearson(const std::vector<std::optional<double>>& xs,
                                     const std::vector<std::optional<double>>& ys) {
  std::vector<double> a, b;
  for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i)
    if (xs[i] && ys[i]) {
      a.push_back(*xs[i]);
      b.push_back(*ys[i]);
    }
  if (a.size() < 2) return std::nullopt;
  double ma = *mean(a), mb = *mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

using CorrelationMatrix = std::array<std::array<std::optional<double>, 8>, 8>;

/// Full symmetric matrix over instance means (the lower triangle is the report).
inline CorrelationMatrix pearson_matrix(const std::vector<InstanceMeans>& means) {
  CorrelationMatrix m{};
  std::array<std::vector<std::optional<double>>, 8> cols;
  for (const auto& im : means)
    for (std::size_t p = 0; p < 8; ++p) cols[p].push_back(im.values[p]);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      m[i][j] = (i == j) ? (pearson(cols[i], cols[j]) ? std::optional<double>(1.0) : std::nullopt)
                         : pearson(cols[i], cols[j]);
      m[j][i] = m[i][j];
    }
  return m;
}

inline CorrelationMatrix pearson_matrix(const std::vector<ObservationRecord>& records) {
  return pearson_matrix(instance_means(records));
}

/// Linear interpolation between closest ranks; `q` in [0,1].
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) fail(ErrorCode::invalid_argument, "quantile of an empty sample");
  std::sort(xs.begin(), xs.end());
  double pos = q * static_cast<double>(xs.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, xs.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

struct FiveNumber {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  std::size_t n = 0;
};

inline FiveNumber five_number(const std::vector<double>& xs) {
  return {quantile(xs, 0.0), quantile(xs, 0.25), quantile(xs, 0.5), quantile(xs, 0.75), quantile(xs, 1.0), xs.size()};
}

struct CoverageRow {
  std::string class_label;
  Property property;
  FiveNumber summary;
};

inline std::vector<CoverageRow> coverage_stats(const std::vector<InstanceMeans>& means) {
  std::vector<std::string> classes;
  std::map<std::string, std::array<std::vector<double>, 8>> vals;
  for (const auto& im : means) {
    if (!vals.count(im.key.class_label)) classes.push_back(im.key.class_label);
    auto& v = vals[im.key.class_label];
    for (std::size_t p = 0; p < 8; ++p)
      if (im.values[p]) v[p].push_back(*im.values[p]);
  }
  std::vector<CoverageRow> out;
  for (const auto& c : classes)
    for (auto p : kProperties) {
      const auto& xs = vals[c][static_cast<std::size_t>(p)];
      if (!xs.empty()) out.push_back({c, p, five_number(xs)});
    }
  return out;
}

inline std::vector<CoverageRow> coverage_stats(const std::vector<ObservationRecord>& records) {
  return coverage_stats(instance_means(records));
}

// ---------------------------------------------------------------------------
// Report writers

inline std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

inline void write_variance_csv(std::ostream& out, const ClassSummary& s) {
  out << "class";
  for (auto p : kProperties) out << ',' << property_name(p);
  out << ",class_mean\n";
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    out << detail::csv_field(s.classes[c]);
    for (std::size_t p = 0; p < 8; ++p) out << ',' << opt_str(s.cells[c][p]);
    out << ',' << opt_str(s.class_mean[c]) << '\n';
  }
  out << "prop_mean";
  for (std::size_t p = 0; p < 8; ++p) out << ',' << opt_str(s.prop_mean[p]);
  out << ',' << opt_str(s.overall_mean) << '\n';
}

inline void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m) {
  out << "property";
  for (std::size_t j = 0; j + 1 < 8; ++j) out << ',' << property_name(kProperties[j]);
  out << '\n';
  for (std::size_t i = 0; i < 8; ++i) {
    out << property_name(kProperties[i]);
    for (std::size_t j = 0; j + 1 < 8; ++j) {
      out << ',';
      if (j < i) out << opt_str(m[i][j]);
    }
    out << '\n';
  }
}

inline void write_coverage_csv(std::ostream& out, const std::vector<CoverageRow>& rows) {
  out << "class,property,n,min,q1,median,q3,max\n";
  for (const auto& r : rows)
    out << detail::csv_field(r.class_label) << ',' << property_name(r.property) << ',' << r.summary.n << ','
        << format_double(r.summary.min) << ',' << format_double(r.summary.q1) << ','
        << format_double(r.summary.median) << ',' << format_double(r.summary.q3) << ','
        << format_double(r.summary.max) << '\n';
}

}  // namespace rocs::dataset
