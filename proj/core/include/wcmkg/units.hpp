#pragma once

#include <cmath>
#include <string>

#include "wcmkg/errors.hpp"

namespace wcmkg {

/// Backscatter coefficient on the logarithmic scale, dB = 10*log10(linear).
struct Decibel {
  double value = 0.0;
};

/// Backscatter coefficient in linear power units. Strictly positive whenever
/// it round-trips with the dB scale.
struct LinearPower {
  double value = 0.0;
};

inline LinearPower db_to_linear(Decibel x) {
  return LinearPower{std::pow(10.0, x.value / 10.0)};
}

inline Decibel linear_to_db(LinearPower x) {
  if (!(x.value > 0.0)) {
    throw NonPositivePower("linear power must be > 0, got " +
                           std::to_string(x.value));
  }
  return Decibel{10.0 * std::log10(x.value)};
}

constexpr double deg_to_rad(double deg) {
  return deg * 3.14159265358979323846 / 180.0;
}

constexpr double rad_to_deg(double rad) {
  return rad * 180.0 / 3.14159265358979323846;
}

}  // namespace wcmkg
