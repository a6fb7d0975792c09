#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wcmkg/errors.hpp"

namespace wcmkg {

using Date = std::chrono::sys_days;

/// Parses an ISO-8601 date (YYYY-MM-DD). Throws SchemaError otherwise.
Date parse_date(std::string_view text);
std::string format_date(Date d);
int day_of_year(Date d);

/// Static near-surface soil description for one site.
struct SoilTexture {
  double clay = 0.0;
  double sand = 0.0;
  double silt = 0.0;
  double awc = 0.0;  ///< available water capacity
};

/// Per-site time series of radar, optical and reference measurements.
/// Timestamps are strictly increasing; sm_ref may be missing per row.
struct SiteSeries {
  std::string site_id;
  double x = 0.0;  ///< planar site coordinates, arbitrary units
  double y = 0.0;
  std::vector<Date> timestamps;
  std::vector<double> sigma_obs_db;    ///< VH backscatter (dB)
  std::vector<double> incidence_deg;   ///< NaN where the angle band is absent
  std::vector<double> ndvi;
  std::vector<double> albedo;
  SoilTexture soil;
  std::vector<std::optional<double>> sm_ref;  ///< m^3/m^3

  std::size_t size() const { return timestamps.size(); }
  std::size_t labeled_count() const;

  /// Checks the per-series invariants; throws InvariantViolation.
  void validate() const;
};

/// Exact column order of the flat CSV interchange format.
inline constexpr std::string_view kCsvHeader =
    "site_id,x,y,timestamp,sigma_obs_db,incidence_deg,ndvi,albedo,clay,sand,"
    "silt,awc,sm_ref";

/// Loads and validates site series from the documented CSV schema. Rows with
/// an empty sm_ref field are kept with the gap marked. Errors carry the
/// 1-based row number and column name.
std::vector<SiteSeries> load_csv(const std::string& path);

void write_csv(const std::vector<SiteSeries>& sites, const std::string& path);

/// Shortest round-trip decimal representation (used by every text artifact
/// so identical values always serialize identically).
std::string format_double(double v);

}  // namespace wcmkg
