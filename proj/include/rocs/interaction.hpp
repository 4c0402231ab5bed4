#pragma once

// Invasive extractions from manipulator and scale logs: rigidity from a press
// trajectory, roughness from a tilting ramp, heaviness from a scale reading.

#include "rocs/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace rocs::interaction {

struct PressSample {
  double t = 0.0;
  double z = 0.0;
  std::vector<double> efforts;
};

struct PressLog {
  std::vector<std::string> joint_names;
  std::vector<PressSample> samples;
};

struct RampSample {
  double t = 0.0;
  double angle = 0.0;
};

struct RampLog {
  std::vector<RampSample> samples;
  std::optional<double> slide_detected_at;
};

struct ContactParams {
  double effort_cutoff = 8.0;
  double baseline_fraction = 0.1;
  double margin_sigmas = 5.0;
  double margin_floor = 0.05;
};

struct ContactTimes {
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  double t0 = 0.0;
  double t1 = 0.0;
};

inline void validate(const PressLog& log) {
  if (log.samples.empty()) fail(ErrorCode::invalid_argument, "press log is empty");
  const std::size_t joints = log.samples.front().efforts.size();
  if (joints == 0) fail(ErrorCode::invalid_argument, "press log has no joint efforts");
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    if (log.samples[i].efforts.size() != joints)
      fail(ErrorCode::invalid_argument, "press log sample " + std::to_string(i) + " has a ragged effort row");
    if (i > 0 && !(log.samples[i].t > log.samples[i - 1].t))
      fail(ErrorCode::invalid_argument, "press log time is not strictly increasing at sample " + std::to_string(i));
  }
}

/// First contact t0: earliest sample where any joint leaves its baseline band
/// (mean of the leading samples, half-width max(k·σ, floor)). Stop t1: earliest
/// sample where any |effort| reaches the cutoff.
inline ContactTimes detect_contact(const PressLog& log, const ContactParams& params = {}) {
  validate(log);
  const auto& s = log.samples;
  const std::size_t n = s.size();
  const std::size_t joints = s.front().efforts.size();

  std::optional<std::size_t> stop;
  for (std::size_t i = 0; i < n && !stop; ++i)
    for (double e : s[i].efforts)
      if (std::abs(e) >= params.effort_cutoff) {
        stop = i;
        break;
      }
  if (!stop)
    fail(ErrorCode::press_incomplete,
         "effort cutoff " + format_double(params.effort_cutoff) + " N*m never reached");

  std::size_t window = std::max<std::size_t>(1, static_cast<std::size_t>(params.baseline_fraction * n));
  window = std::min(window, *stop == 0 ? std::size_t{1} : *stop);
  std::vector<double> mean(joints, 0.0), margin(joints, 0.0);
  for (std::size_t j = 0; j < joints; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < window; ++i) m += s[i].efforts[j];
    m /= static_cast<double>(window);
    double var = 0.0;
    for (std::size_t i = 0; i < window; ++i) var += (s[i].efforts[j] - m) * (s[i].efforts[j] - m);
    var /= static_cast<double>(window);
    mean[j] = m;
    margin[j] = std::max(params.margin_sigmas * std::sqrt(var), params.margin_floor);
  }

  std::optional<std::size_t> contact;
  for (std::size_t i = 0; i <= *stop && !contact; ++i)
    for (std::size_t j = 0; j < joints; ++j)
      if (std::abs(s[i].efforts[j] - mean[j]) > margin[j]) {
        contact = i;
        break;
      }
  // The stop sample itself always departs unless the baseline already sits at the cutoff.
  if (!contact) contact = stop;
  return {*contact, *stop, s[*contact].t, s[*stop].t};
}

struct RigidityResult {
  double ri = 0.0;
  double deformation = 0.0;
  ContactTimes contact;
};

/// Normalised deformation under the press (0 = fully rigid).
inline RigidityResult compute_rigidity(const PressLog& log, double h, const ContactParams& params = {}) {
  if (!(h > 0.0)) fail(ErrorCode::invalid_argument, "object height must be positive");
  RigidityResult r;
  r.contact = detect_contact(log, params);
  if (r.contact.i0 > r.contact.i1)
    fail(ErrorCode::invalid_argument, "contact detected after the effort cutoff");
  r.deformation = std::max(0.0, log.samples[r.contact.i0].z - log.samples[r.contact.i1].z);
  r.ri = clamp01(r.deformation / h);
  return r;
}

/// Ramp angle at time t, linearly interpolated between samples.
inline double angle_at(const RampLog& log, double t) {
  const auto& s = log.samples;
  if (s.empty()) fail(ErrorCode::invalid_argument, "ramp log is empty");
  if (t <= s.front().t) return s.front().angle;
  if (t >= s.back().t) return s.back().angle;
  auto it = std::lower_bound(s.begin(), s.end(), t, [](const RampSample& a, double v) { return a.t < v; });
  if (it->t == t) return it->angle;
  auto prev = std::prev(it);
  double u = (t - prev->t) / (it->t - prev->t);
  return prev->angle + u * (it->angle - prev->angle);
}

inline double compute_roughness(const RampLog& log, double initial_angle = 0.0) {
  if (log.samples.empty()) fail(ErrorCode::invalid_argument, "ramp log is empty");
  for (std::size_t i = 1; i < log.samples.size(); ++i)
    if (!(log.samples[i].t > log.samples[i - 1].t))
      fail(ErrorCode::invalid_argument, "ramp log time is not strictly increasing");
  if (!log.slide_detected_at) fail(ErrorCode::slide_not_observed, "object did not slide before the ramp limit");
  double t = *log.slide_detected_at;
  if (t < log.samples.front().t || t > log.samples.back().t)
    fail(ErrorCode::invalid_argument, "slide timestamp outside the ramp log");
  double a_r = angle_at(log, t);
  return clamp01(std::abs(initial_angle - a_r) / (std::numbers::pi / 2.0));
}

/// Scale reading quantised to whole grams, halves rounded down. Unbounded above.
inline double compute_heaviness(double grams) {
  if (!(grams >= 0.0)) fail(ErrorCode::out_of_range, "scale reading must be non-negative");
  return std::ceil(grams - 0.5) + 0.0;  // + 0.0 folds -0 into 0
}

}  // namespace rocs::interaction
