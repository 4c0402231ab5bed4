#pragma once

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace rocs {

using Point = Eigen::Vector3d;
using Cloud = std::vector<Point>;

/// Machine-readable failure categories. The CLI prints the name of the code
/// and maps each category to a process exit status.
enum class ErrorCode {
  invalid_argument,
  parse_error,
  io_error,
  schema_mismatch,
  out_of_range,
  duplicate_key,
  degenerate_geometry,
  segmentation_failure,
  press_incomplete,
  slide_not_observed,
  inconsistent_measurement,
  clustering_error,
  attribution_conflict,
  unknown_class,
};

inline std::string_view code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "E_INVALID_ARGUMENT";
    case ErrorCode::parse_error: return "E_PARSE";
    case ErrorCode::io_error: return "E_IO";
    case ErrorCode::schema_mismatch: return "E_SCHEMA";
    case ErrorCode::out_of_range: return "E_RANGE";
    case ErrorCode::duplicate_key: return "E_DUPLICATE";
    case ErrorCode::degenerate_geometry: return "E_DEGENERATE";
    case ErrorCode::segmentation_failure: return "E_SEGMENTATION";
    case ErrorCode::press_incomplete: return "E_PRESS_INCOMPLETE";
    case ErrorCode::slide_not_observed: return "E_NO_SLIDE";
    case ErrorCode::inconsistent_measurement: return "E_INCONSISTENT";
    case ErrorCode::clustering_error: return "E_CLUSTERING";
    case ErrorCode::attribution_conflict: return "E_CONFLICT";
    case ErrorCode::unknown_class: return "E_UNKNOWN_CLASS";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

// splitmix64 finalizer; used to derive independent sub-seeds from one root seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the stream name
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(root ^ h) + index);
}

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail(ErrorCode::invalid_argument, "unformattable number");
  return std::string(buf, end);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace rocs
