#pragma once

#include <cmath>

#include "wcmkg/wcm.hpp"

namespace wcmkg {

/// Data-to-physics conventions shared by the feature pipeline, calibration
/// and evaluation: the fixed vegetation parameter, the fallback incidence
/// angle for rows without an angle band, and the NDVI-to-VWC coefficient.
struct PhysicsContext {
  double b = WcmParams::kGrasslandB;
  double theta_default_deg = WcmParams::kDefaultThetaDeg;
  double vwc_coeff = 1.0;  ///< kg/m^2 per NDVI unit

  double theta_rad(double incidence_deg) const {
    return deg_to_rad(std::isnan(incidence_deg) ? theta_default_deg
                                                : incidence_deg);
  }

  double vwc(double ndvi) const { return vwc_from_ndvi(ndvi, vwc_coeff); }

  /// Assembles model parameters for one observation row.
  WcmParams wcm_at(double a, double c, double d, double incidence_deg) const {
    WcmParams p;
    p.a = a;
    p.b = b;
    p.c = c;
    p.d = d;
    p.theta = theta_rad(incidence_deg);
    return p;
  }
};

}  // namespace wcmkg
