#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "raceway/timeseries.hpp"
#include "raceway/types.hpp"
#include "raceway/units.hpp"

// Deterministic synthetic weather for scenario generation and tests.

namespace raceway {

inline constexpr double pi = 3.14159265358979323846;

/// Shape parameters for one synthetic day.
struct SyntheticDay {
  double i_max = 950.0;        ///< clear-sky peak irradiance [W/m^2]
  double sunrise_h = 7.0;      ///< local hour
  double sunset_h = 19.0;
  double t_low = 12.0;         ///< ambient minimum, reached at 06:00 [degC]
  double t_high = 26.0;        ///< ambient maximum, reached at 18:00 [degC]
  double wind_base = 2.0;      ///< [m/s]
  double wind_amp = 1.5;       ///< afternoon increase peaking at 15:00 [m/s]
  double rh_day = 45.0;        ///< relative humidity at the ambient maximum [%]
  double rh_night = 75.0;      ///< relative humidity at the ambient minimum [%]
  double cloud_amp = 0.0;      ///< multiplicative irradiance dip depth, 0..1
  double cloud_period_h = 3.0; ///< dip period [h]
  double noise = 0.0;          ///< relative irradiance jitter amplitude
};

/// Generates a weather series starting at `start` (midnight) covering the
/// given days, sampled every cadence_s seconds, end boundary included.
/// Identical arguments and seed always produce the identical series.
inline WeatherSeries synthetic_weather(std::int64_t start,
                                       const std::vector<SyntheticDay>& days,
                                       int cadence_s = 60, std::uint32_t seed = 0) {
  if (days.empty()) throw invalid_parameter("synthetic_weather: no days given");
  if (cadence_s <= 0) throw invalid_parameter("synthetic_weather: bad cadence");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  const std::int64_t day_s = static_cast<std::int64_t>(seconds_per_day);
  const std::int64_t end = start + static_cast<std::int64_t>(days.size()) * day_s;
  WeatherSeries out;
  for (std::int64_t t = start; t <= end; t += cadence_s) {
    std::size_t di = static_cast<std::size_t>((t - start) / day_s);
    if (di >= days.size()) di = days.size() - 1;  // closing boundary sample
    const SyntheticDay& day = days[di];
    const double tod_h = static_cast<double>((t - start) % day_s) / 3600.0;

    double i0 = 0.0;
    if (tod_h > day.sunrise_h && tod_h < day.sunset_h) {
      const double frac = (tod_h - day.sunrise_h) / (day.sunset_h - day.sunrise_h);
      i0 = day.i_max * std::sin(pi * frac);
      if (day.cloud_amp > 0.0) {
        const double phase = 1.7 * static_cast<double>(di);
        i0 *= 1.0 - day.cloud_amp * 0.5 *
                        (1.0 + std::sin(2.0 * pi * tod_h / day.cloud_period_h + phase));
      }
      if (day.noise > 0.0) i0 *= 1.0 + day.noise * jitter(rng);
      i0 = std::max(0.0, i0);
    }

    const double t_amb = day.t_low + (day.t_high - day.t_low) * 0.5 *
                                         (1.0 - std::cos(2.0 * pi * (tod_h - 6.0) / 24.0));
    const double t_mid = 0.5 * (day.t_low + day.t_high);
    const double t_soil = t_mid + 0.6 * (t_amb - t_mid);
    const double wind = day.wind_base + day.wind_amp * 0.5 *
                                            (1.0 - std::cos(2.0 * pi * (tod_h - 3.0) / 24.0));
    const double x = (t_amb - day.t_low) / std::max(1e-9, day.t_high - day.t_low);
    const double rh = day.rh_night + (day.rh_day - day.rh_night) * x;

    out.push_back(t, {i0, t_amb, t_soil, wind, rh});
  }
  return out;
}

/// Named day sequences used by the scenario suite and the weather generator.
inline std::vector<SyntheticDay> weather_preset(const std::string& name) {
  SyntheticDay d;
  if (name == "clear-day") {
    d.i_max = 950.0;
    return {d};
  }
  if (name == "cloudy-day") {
    d.i_max = 380.0;
    d.cloud_amp = 0.5;
    d.cloud_period_h = 2.0;
    d.t_low = 8.0;
    d.t_high = 17.0;
    d.rh_day = 60.0;
    d.rh_night = 85.0;
    return {d};
  }
  if (name == "mixed-3day") {
    SyntheticDay sunny = d;
    sunny.i_max = 900.0;
    SyntheticDay cloudy = d;
    cloudy.i_max = 420.0;
    cloudy.cloud_amp = 0.45;
    cloudy.cloud_period_h = 2.5;
    cloudy.t_low = 10.0;
    cloudy.t_high = 20.0;
    SyntheticDay moderate = d;
    moderate.i_max = 680.0;
    moderate.cloud_amp = 0.2;
    return {sunny, cloudy, moderate};
  }
  if (name == "reference-2day") {
    // two clear days differing mildly, so day-ahead forecasts carry a small
    // but nonzero bias
    SyntheticDay sunny = d;
    sunny.i_max = 900.0;
    SyntheticDay second = d;
    second.i_max = 870.0;
    second.t_low = 11.0;
    second.t_high = 24.0;
    return {sunny, second};
  }
  throw invalid_parameter("unknown weather preset: " + name);
}

}  // namespace raceway
