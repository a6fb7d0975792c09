#include "wcmkg/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace wcmkg {

Date parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      std::sscanf(std::string(text).c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3) {
    throw SchemaError("invalid ISO-8601 date: '" + std::string(text) + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) {
    throw SchemaError("invalid calendar date: '" + std::string(text) + "'");
  }
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

int day_of_year(Date d) {
  const std::chrono::year_month_day ymd{d};
  const Date jan1{std::chrono::year_month_day{ymd.year(), std::chrono::January,
                                              std::chrono::day{1}}};
  return static_cast<int>((d - jan1).count()) + 1;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::size_t SiteSeries::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(sm_ref.begin(), sm_ref.end(),
                    [](const auto& v) { return v.has_value(); }));
}

void SiteSeries::validate() const {
  const std::size_t n = timestamps.size();
  auto check_len = [&](std::size_t len, const char* what) {
    if (len != n) {
      throw InvariantViolation("site " + site_id + ": " + what +
                               " length mismatch");
    }
  };
  check_len(sigma_obs_db.size(), "sigma_obs_db");
  check_len(incidence_deg.size(), "incidence_deg");
  check_len(ndvi.size(), "ndvi");
  check_len(albedo.size(), "albedo");
  check_len(sm_ref.size(), "sm_ref");

  for (std::size_t i = 1; i < n; ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw InvariantViolation("site " + site_id +
                               ": timestamps not strictly increasing at row " +
                               std::to_string(i + 1));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ndvi[i] >= -1.0 && ndvi[i] <= 1.0)) {
      throw InvariantViolation("site " + site_id + ": ndvi out of [-1,1] at row " +
                               std::to_string(i + 1));
    }
    if (sm_ref[i] && !(*sm_ref[i] >= 0.0 && *sm_ref[i] <= 1.0)) {
      throw InvariantViolation("site " + site_id + ": sm_ref out of [0,1] at row " +
                               std::to_string(i + 1));
    }
    if (!std::isfinite(sigma_obs_db[i])) {
      throw InvariantViolation("site " + site_id +
                               ": non-finite sigma_obs_db at row " +
                               std::to_string(i + 1));
    }
  }
  auto frac_ok = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!frac_ok(soil.clay) || !frac_ok(soil.sand) || !frac_ok(soil.silt)) {
    throw InvariantViolation("site " + site_id + ": soil fractions out of [0,1]");
  }
  if (soil.clay + soil.sand + soil.silt > 1.0 + 1e-9) {
    throw InvariantViolation("site " + site_id + ": soil fractions sum above 1");
  }
}

namespace {

constexpr int kColumnCount = 13;
const char* kColumnNames[kColumnCount] = {
    "site_id", "x",    "y",    "timestamp", "sigma_obs_db", "incidence_deg",
    "ndvi",    "albedo", "clay", "sand",     "silt",         "awc",
    "sm_ref"};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_field(const std::string& s, int row, int col) {
  double v{};
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw SchemaError("row " + std::to_string(row) + ", column '" +
                      kColumnNames[col] + "': cannot parse number '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<SiteSeries> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + path + "': empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw SchemaError("'" + path + "': header mismatch, expected '" +
                      std::string(kCsvHeader) + "'");
  }

  std::vector<SiteSeries> sites;
  std::map<std::string, std::size_t> index;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_line(line);
    if (static_cast<int>(f.size()) != kColumnCount) {
      throw SchemaError("row " + std::to_string(row) + ": expected " +
                        std::to_string(kColumnCount) + " columns, got " +
                        std::to_string(f.size()));
    }
    const std::string& id = f[0];
    if (id.empty()) {
      throw SchemaError("row " + std::to_string(row) + ": empty site_id");
    }

    auto [it, inserted] = index.try_emplace(id, sites.size());
    if (inserted) {
      SiteSeries s;
      s.site_id = id;
      s.x = parse_field(f[1], row, 1);
      s.y = parse_field(f[2], row, 2);
      s.soil.clay = parse_field(f[8], row, 8);
      s.soil.sand = parse_field(f[9], row, 9);
      s.soil.silt = parse_field(f[10], row, 10);
      s.soil.awc = parse_field(f[11], row, 11);
      sites.push_back(std::move(s));
    }
    SiteSeries& s = sites[it->second];

    Date t;
    try {
      t = parse_date(f[3]);
    } catch (const SchemaError& e) {
      throw SchemaError("row " + std::to_string(row) + ", column 'timestamp': " +
                        e.what());
    }
    if (!s.timestamps.empty() && !(t > s.timestamps.back())) {
      throw InvariantViolation("row " + std::to_string(row) + ": site '" + id +
                               "' timestamps not strictly increasing");
    }
    s.timestamps.push_back(t);
    s.sigma_obs_db.push_back(parse_field(f[4], row, 4));
    s.incidence_deg.push_back(
        f[5].empty() ? std::nan("") : parse_field(f[5], row, 5));
    const double nd = parse_field(f[6], row, 6);
    if (!(nd >= -1.0 && nd <= 1.0)) {
      throw InvariantViolation("row " + std::to_string(row) +
                               ", column 'ndvi': value " + f[6] +
                               " outside [-1,1]");
    }
    s.ndvi.push_back(nd);
    s.albedo.push_back(parse_field(f[7], row, 7));
    if (f[12].empty()) {
      s.sm_ref.push_back(std::nullopt);
    } else {
      const double sm = parse_field(f[12], row, 12);
      if (!(sm >= 0.0 && sm <= 1.0)) {
        throw InvariantViolation("row " + std::to_string(row) +
                                 ", column 'sm_ref': value " + f[12] +
                                 " outside [0,1]");
      }
      s.sm_ref.push_back(sm);
    }
  }
  if (sites.empty()) throw SchemaError("'" + path + "': no data rows");
  for (const auto& s : sites) s.validate();
  return sites;
}

void write_csv(const std::vector<SiteSeries>& sites, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << kCsvHeader << "\n";
  for (const SiteSeries& s : sites) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.site_id << ',' << format_double(s.x) << ',' << format_double(s.y)
          << ',' << format_date(s.timestamps[i]) << ','
          << format_double(s.sigma_obs_db[i]) << ','
          << (std::isnan(s.incidence_deg[i])
                  ? std::string{}
                  : format_double(s.incidence_deg[i]))
          << ',' << format_double(s.ndvi[i]) << ','
          << format_double(s.albedo[i]) << ',' << format_double(s.soil.clay)
          << ',' << format_double(s.soil.sand) << ','
          << format_double(s.soil.silt) << ',' << format_double(s.soil.awc)
          << ',' << (s.sm_ref[i] ? format_double(*s.sm_ref[i]) : std::string{})
          << "\n";
    }
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace wcmkg
