#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "raceway/types.hpp"

namespace raceway {

/// Parses "YYYY-MM-DDTHH:MM:SS" (optionally with a trailing 'Z') as UTC.
inline std::int64_t parse_iso8601(const std::string& s) {
  std::tm tm{};
  int y, mo, d, h, mi, se;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &se) != 6)
    throw invalid_parameter("bad ISO-8601 timestamp: " + s);
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = se;
  return static_cast<std::int64_t>(timegm(&tm));
}

inline std::string format_iso8601(std::int64_t t) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

/// Timestamped weather samples, strictly increasing. Values between samples
/// are linearly interpolated.
struct WeatherSeries {
  std::vector<std::int64_t> time;
  std::vector<Disturbance> values;

  bool empty() const { return time.empty(); }
  std::int64_t front_time() const { return time.front(); }
  std::int64_t back_time() const { return time.back(); }

  bool covers(double t0, double t1) const {
    return !empty() && time.front() <= t0 && t1 <= time.back();
  }

  /// Linear interpolation at t; throws if t is outside the covered range.
  Disturbance at(double t) const {
    if (empty() || t < time.front() || t > time.back())
      throw simulation_error("weather series does not cover requested time");
    // first index with time[hi] > t
    auto it = std::upper_bound(time.begin(), time.end(), t,
                               [](double a, std::int64_t b) { return a < b; });
    std::size_t hi = static_cast<std::size_t>(it - time.begin());
    if (hi == time.size()) return values.back();
    std::size_t lo = hi - 1;
    const double w = (t - static_cast<double>(time[lo])) /
                     static_cast<double>(time[hi] - time[lo]);
    const Disturbance &a = values[lo], &b = values[hi];
    return {a.irradiance + w * (b.irradiance - a.irradiance),
            a.t_amb + w * (b.t_amb - a.t_amb),
            a.t_soil + w * (b.t_soil - a.t_soil),
            a.wind + w * (b.wind - a.wind),
            a.humidity + w * (b.humidity - a.humidity)};
  }

  void push_back(std::int64_t t, const Disturbance& d) {
    if (!time.empty() && t <= time.back())
      throw simulation_error("weather timestamps must be strictly increasing");
    time.push_back(t);
    values.push_back(d);
  }
};

namespace detail {

inline double median(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  // even count: mean of the middle pair
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Resamples a raw (typically 1 s) series to one-minute cadence using the
/// per-minute median of each channel. Minutes without samples repeat the
/// previous value.
inline WeatherSeries resample_median(const WeatherSeries& raw) {
  if (raw.empty()) throw simulation_error("resample_median: empty input");
  const std::int64_t first = raw.time.front() / 60;
  const std::int64_t last = raw.time.back() / 60;
  std::map<std::int64_t, std::vector<Disturbance>> buckets;
  for (std::size_t i = 0; i < raw.time.size(); ++i)
    buckets[raw.time[i] / 60].push_back(raw.values[i]);

  WeatherSeries out;
  Disturbance prev{};
  for (std::int64_t m = first; m <= last; ++m) {
    auto it = buckets.find(m);
    if (it != buckets.end()) {
      std::vector<double> i0, ta, ts, ws, rh;
      for (const Disturbance& d : it->second) {
        i0.push_back(d.irradiance);
        ta.push_back(d.t_amb);
        ts.push_back(d.t_soil);
        ws.push_back(d.wind);
        rh.push_back(d.humidity);
      }
      prev = {detail::median(i0), detail::median(ta), detail::median(ts),
              detail::median(ws), detail::median(rh)};
    }
    out.push_back(m * 60, prev);
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace detail

/// Loads a weather CSV with header `timestamp,I0,T_amb,T_soil,WS,RH`. A
/// leading `# cadence_seconds=N` comment line (used by forecast files) is
/// skipped; cadence is taken from the timestamps themselves.
inline WeatherSeries load_weather_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw simulation_error("weather file not found: " + path);
  WeatherSeries out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::split_csv_line(line);
    if (!header_seen) {
      if (fields.size() != 6 || fields[0] != "timestamp")
        throw simulation_error("bad weather CSV header in " + path);
      header_seen = true;
      continue;
    }
    if (fields.size() != 6)
      throw simulation_error("bad weather CSV row in " + path + ": " + line);
    Disturbance d{std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3]),
                  std::stod(fields[4]), std::stod(fields[5])};
    out.push_back(parse_iso8601(fields[0]), d);
  }
  if (out.empty()) throw simulation_error("weather file has no data rows: " + path);
  return out;
}

inline void save_weather_csv(const WeatherSeries& s, const std::string& path,
                             int cadence_comment_s = 0) {
  std::ofstream out(path);
  if (!out) throw simulation_error("cannot write weather file: " + path);
  if (cadence_comment_s > 0) out << "# cadence_seconds=" << cadence_comment_s << "\r\n";
  out << "timestamp,I0,T_amb,T_soil,WS,RH\r\n";
  char buf[160];
  for (std::size_t i = 0; i < s.time.size(); ++i) {
    const Disturbance& d = s.values[i];
    std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g,%.6g,%.6g,%.6g\r\n",
                  format_iso8601(s.time[i]).c_str(), d.irradiance, d.t_amb, d.t_soil,
                  d.wind, d.humidity);
    out << buf;
  }
}

}  // namespace raceway
