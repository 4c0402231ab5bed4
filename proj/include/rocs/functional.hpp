#pragma once

// Functional properties are projections of the physical vector: support and
// containment copy size plus one shape property, movability pairs heaviness
// with roughness, blockage is its negation.

#include "rocs/core.hpp"

#include <array>
#include <optional>

namespace rocs {

struct PhysicalVector {
  double si_l = 0.0, si_w = 0.0, si_h = 0.0;
  double fl = 0.0;
  double ho = 0.0;
  double he = 0.0;
  double ri = 0.0;
  std::optional<double> ro;
};

using Support = std::array<double, 5>;
using Containment = std::array<double, 4>;
using Movability = std::array<double, 2>;
using Blockage = std::array<double, 2>;

struct FunctionalVector {
  Support su{};
  Containment co{};
  std::optional<Movability> mo;
  std::optional<Blockage> bl;
};

inline Support derive_support(const PhysicalVector& pv) { return {pv.si_l, pv.si_w, pv.si_h, pv.fl, pv.ri}; }

inline Containment derive_containment(const PhysicalVector& pv) { return {pv.si_l, pv.si_w, pv.si_h, pv.ho}; }

inline std::optional<Movability> derive_movability(const PhysicalVector& pv) {
  if (!pv.ro) return std::nullopt;
  return Movability{pv.he, *pv.ro};
}

inline std::optional<Blockage> derive_blockage(const PhysicalVector& pv) {
  auto mo = derive_movability(pv);
  if (!mo) return std::nullopt;
  return Blockage{-(*mo)[0], -(*mo)[1]};
}

inline FunctionalVector derive_functional(const PhysicalVector& pv) {
  return {derive_support(pv), derive_containment(pv), derive_movability(pv), derive_blockage(pv)};
}

}  // namespace rocs
