#pragma once

#include <cmath>
#include <string>

#include "wcmkg/errors.hpp"
#include "wcmkg/units.hpp"

namespace wcmkg {

/// Semi-empirical water cloud model parameter set.
///
/// The model decomposes the observed linear backscatter into a vegetation
/// contribution and a canopy-attenuated soil contribution,
///
///   sigma_obs = A*cos(theta)*(1 - gamma2) + gamma2 * sigma_soil
///
/// with gamma2 = exp(-2*B*VWC / cos(theta)) and, on the dB scale,
/// sigma_soil = C + D*SM.
struct WcmParams {
  double a = 0.05;   ///< vegetation backscattering factor (linear, > 0)
  double b = 0.084;  ///< vegetation parameter per kg/m^2 of VWC (> 0)
  double c = -25.0;  ///< soil regression intercept (dB)
  double d = 30.0;   ///< soil regression slope (dB per m^3/m^3, != 0)
  double theta = deg_to_rad(40.0);  ///< local incidence angle (radians)

  static constexpr double kGrasslandB = 0.084;
  static constexpr double kDefaultThetaDeg = 40.0;

  WcmParams with_theta(double theta_rad) const {
    WcmParams p = *this;
    p.theta = theta_rad;
    return p;
  }

  void validate() const {
    if (!(a > 0.0)) throw InvariantViolation("WcmParams: a must be > 0");
    if (!(b > 0.0)) throw InvariantViolation("WcmParams: b must be > 0");
    if (d == 0.0) throw InvariantViolation("WcmParams: d must be nonzero");
    if (!(theta > 0.0) || !(theta < deg_to_rad(90.0))) {
      throw InvariantViolation("WcmParams: theta must lie in (0, pi/2)");
    }
  }
};

/// Canopy state at one observation: water content, optical depth and the
/// two-way attenuation it induces.
struct VegState {
  double vwc = 0.0;     ///< vegetation water content (kg/m^2)
  double tau = 0.0;     ///< optical depth, tau = B*VWC
  double gamma2 = 1.0;  ///< two-way attenuation, exp(-2*tau/cos theta), in (0,1]
};

/// Volumetric soil moisture (m^3/m^3). Inversions may land outside the
/// physical range; callers decide what to do with flagged values.
struct SoilMoisture {
  double value = 0.0;

  bool in_physical_range() const { return value >= 0.0 && value <= 1.0; }
};

inline VegState attenuation(double vwc, const WcmParams& params) {
  VegState v;
  v.vwc = vwc;
  v.tau = params.b * vwc;
  v.gamma2 = std::exp(-2.0 * v.tau / std::cos(params.theta));
  return v;
}

/// Clamped linear map from NDVI to vegetation water content.
inline double vwc_from_ndvi(double ndvi, double coeff) {
  if (!(coeff > 0.0)) {
    throw InvariantViolation("vwc_from_ndvi: coeff must be > 0");
  }
  return coeff * std::max(0.0, ndvi);
}

/// Vegetation contribution in linear power units.
inline LinearPower vegetation_backscatter(const VegState& veg,
                                          double a, double theta) {
  return LinearPower{a * std::cos(theta) * (1.0 - veg.gamma2)};
}

/// Total backscatter (dB) from soil moisture and canopy water content.
inline Decibel wcm_forward(SoilMoisture sm, double vwc,
                           const WcmParams& params) {
  const VegState veg = attenuation(vwc, params);
  const Decibel soil_db{params.c + params.d * sm.value};
  const LinearPower soil = db_to_linear(soil_db);
  const LinearPower vegetation = vegetation_backscatter(veg, params.a, params.theta);
  return linear_to_db(LinearPower{vegetation.value + veg.gamma2 * soil.value});
}

/// Vegetation-corrected soil backscatter (dB). Strict variant: throws when
/// the observation falls below the vegetation floor and the log argument
/// would be non-positive.
inline Decibel isolate_soil_backscatter(Decibel obs, double vwc, double a,
                                        const WcmParams& params) {
  const VegState veg = attenuation(vwc, params);
  const double residual =
      db_to_linear(obs).value - vegetation_backscatter(veg, a, params.theta).value;
  if (!(residual > 0.0)) {
    throw NegativeResidual(
        "observed power does not exceed the vegetation contribution "
        "(residual " + std::to_string(residual) + ")");
  }
  return linear_to_db(LinearPower{residual / veg.gamma2});
}

struct IsolatedSoil {
  Decibel soil_db;
  bool clamped = false;  ///< residual hit the linear floor
};

/// Clamped variant used inside training: the linear residual is floored so
/// the logarithm stays defined, and the sample is flagged.
inline IsolatedSoil isolate_soil_backscatter_clamped(Decibel obs, double vwc,
                                                     double a,
                                                     const WcmParams& params,
                                                     double floor_linear) {
  if (!(floor_linear > 0.0)) {
    throw InvariantViolation("isolation clamp floor must be > 0");
  }
  const VegState veg = attenuation(vwc, params);
  const double residual =
      db_to_linear(obs).value - vegetation_backscatter(veg, a, params.theta).value;
  IsolatedSoil out;
  out.clamped = !(residual > floor_linear);
  const double floored = out.clamped ? floor_linear : residual;
  out.soil_db = linear_to_db(LinearPower{floored / veg.gamma2});
  return out;
}

/// Closed-form soil moisture inversion: (isolated soil dB - C) / D.
inline SoilMoisture wcm_invert_sm(Decibel obs, double vwc,
                                  const WcmParams& params) {
  if (params.d == 0.0) {
    throw InvariantViolation("wcm_invert_sm: d must be nonzero");
  }
  const Decibel soil = isolate_soil_backscatter(obs, vwc, params.a, params);
  return SoilMoisture{(soil.value - params.c) / params.d};
}

/// Inversion through the clamped isolation path; total on finite inputs.
inline SoilMoisture wcm_invert_sm_clamped(Decibel obs, double vwc,
                                          const WcmParams& params,
                                          double floor_linear) {
  if (params.d == 0.0) {
    throw InvariantViolation("wcm_invert_sm_clamped: d must be nonzero");
  }
  const IsolatedSoil soil =
      isolate_soil_backscatter_clamped(obs, vwc, params.a, params, floor_linear);
  return SoilMoisture{(soil.soil_db.value - params.c) / params.d};
}

}  // namespace wcmkg
