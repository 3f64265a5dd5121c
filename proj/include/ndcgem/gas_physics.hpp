#pragma once

// Steady-state gas network physics in squared-pressure space (Pi = pi^2).
// Flow conventions: positive flow runs from the branch's from-node to its
// to-node and follows the pressure drop, for compressors as well as pipes.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ndcgem/common.hpp"

namespace ndcgem {

// Weymouth pipeline flow. Antisymmetric by construction: swapping the
// endpoints negates the squared-pressure difference exactly (IEEE subtraction
// is sign-symmetric), so the result is the exact negation bit for bit.
inline double pipeline_flow(double pi_m, double pi_n, double weymouth_const) {
  const double d = pi_m * pi_m - pi_n * pi_n;
  return d >= 0.0 ? weymouth_const * std::sqrt(d) : -weymouth_const * std::sqrt(-d);
}

// Same law with squared pressures supplied directly (the SLP works in Pi).
inline double pipeline_flow_sq(double sq_m, double sq_n, double weymouth_const) {
  const double d = sq_m - sq_n;
  return d >= 0.0 ? weymouth_const * std::sqrt(d) : -weymouth_const * std::sqrt(-d);
}

// Flow a compressor moves when running at power h between the given
// pressures: magnitude h over (k2 - k1 * ratio^alpha), signed along the
// pressure drop. The denominator shrinks as the boost ratio grows; a
// nonpositive value means the requested operating point is out of range.
inline double compressor_flow_sq(double sq_m, double sq_n, double h, double k1,
                                 double k2, double alpha,
                                 const std::string& owner = "compressor") {
  const double hi = std::max(sq_m, sq_n);
  const double lo = std::min(sq_m, sq_n);
  double boost = 0.0;
  if (k1 != 0.0) {
    if (lo <= 0.0)
      throw ConfigError(owner + ": pressure ratio undefined at zero pressure");
    boost = k1 * std::pow(hi / lo, 0.5 * alpha);  // ratio^alpha in pi terms
  }
  const double denom = k2 - boost;
  if (denom <= 0.0)
    throw ConfigError(owner + ": infeasible operating point, k2 - k1*ratio^alpha = " +
                      std::to_string(denom));
  const double flow = h / denom;
  return sq_m >= sq_n ? flow : -flow;
}

inline double compressor_flow(double pi_m, double pi_n, double h, double k1,
                              double k2, double alpha,
                              const std::string& owner = "compressor") {
  return compressor_flow_sq(pi_m * pi_m, pi_n * pi_n, h, k1, k2, alpha, owner);
}

// Gas the compressor itself consumes: theta(h) = a2 h^2 + a1 h + a0.
inline double compressor_gas(double h, const std::array<double, 3>& coeffs) {
  return (coeffs[0] * h + coeffs[1]) * h + coeffs[2];
}

inline double compressor_gas_slope(double h, const std::array<double, 3>& coeffs) {
  return 2.0 * coeffs[0] * h + coeffs[1];
}

}  // namespace ndcgem
