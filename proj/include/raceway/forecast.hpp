#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "raceway/timeseries.hpp"
#include "raceway/types.hpp"
#include "raceway/units.hpp"

namespace raceway {

/// Source of predicted disturbances for the optimizing controller. A forecast
/// issued at `t_now` may be queried at any `t_future >= t_now` within the day.
class ForecastProvider {
 public:
  virtual ~ForecastProvider() = default;
  virtual Disturbance at(double t_now, double t_future) const = 0;
  virtual std::string name() const = 0;
};

/// Ideal forecast: returns the actual disturbance trajectory.
class PerfectForecast final : public ForecastProvider {
 public:
  explicit PerfectForecast(WeatherSeries series) : series_(std::move(series)) {}

  Disturbance at(double, double t_future) const override {
    if (!series_.covers(t_future, t_future))
      throw forecast_error("perfect forecast: weather does not cover requested time");
    return series_.at(t_future);
  }
  std::string name() const override { return "perfect"; }

 private:
  WeatherSeries series_;
};

/// Yesterday-repeats forecast: predicts the value observed 24 h earlier.
class PreviousDayForecast final : public ForecastProvider {
 public:
  explicit PreviousDayForecast(WeatherSeries series) : series_(std::move(series)) {}

  Disturbance at(double, double t_future) const override {
    const double t = t_future - seconds_per_day;
    if (!series_.covers(t, t))
      throw forecast_error("previous-day forecast: no data for the preceding day");
    return series_.at(t);
  }
  std::string name() const override { return "previous-day"; }

 private:
  WeatherSeries series_;
};

/// Coarse forecast built from true weather sampled at the top of each hour,
/// linearly interpolated in between (smooths out sub-hourly structure).
class HourlyForecast final : public ForecastProvider {
 public:
  explicit HourlyForecast(WeatherSeries series) : series_(std::move(series)) {}

  Disturbance at(double, double t_future) const override {
    if (!series_.covers(t_future, t_future))
      throw forecast_error("hourly forecast: weather does not cover requested time");
    const double lo = static_cast<double>(series_.front_time());
    const double hi = static_cast<double>(series_.back_time());
    double k0 = std::floor(t_future / 3600.0) * 3600.0;
    double k1 = k0 + 3600.0;
    k0 = std::max(k0, lo);
    k1 = std::min(k1, hi);
    if (k1 <= k0) return series_.at(std::clamp(t_future, lo, hi));
    const Disturbance a = series_.at(k0);
    const Disturbance b = series_.at(k1);
    const double w = std::clamp((t_future - k0) / (k1 - k0), 0.0, 1.0);
    return {a.irradiance + w * (b.irradiance - a.irradiance),
            a.t_amb + w * (b.t_amb - a.t_amb),
            a.t_soil + w * (b.t_soil - a.t_soil),
            a.wind + w * (b.wind - a.wind),
            a.humidity + w * (b.humidity - a.humidity)};
  }
  std::string name() const override { return "hourly"; }

 private:
  WeatherSeries series_;
};

/// Persistence forecast: holds the measurement taken at issue time.
class HoldCurrentForecast final : public ForecastProvider {
 public:
  explicit HoldCurrentForecast(WeatherSeries series) : series_(std::move(series)) {}

  Disturbance at(double t_now, double) const override {
    if (!series_.covers(t_now, t_now))
      throw forecast_error("hold-current forecast: weather does not cover issue time");
    return series_.at(t_now);
  }
  std::string name() const override { return "hold-current"; }

 private:
  WeatherSeries series_;
};

inline std::unique_ptr<ForecastProvider> make_forecast(const std::string& kind,
                                                       const WeatherSeries& series) {
  if (kind == "perfect") return std::make_unique<PerfectForecast>(series);
  if (kind == "previous-day") return std::make_unique<PreviousDayForecast>(series);
  if (kind == "hourly") return std::make_unique<HourlyForecast>(series);
  if (kind == "hold-current") return std::make_unique<HoldCurrentForecast>(series);
  throw forecast_error("unknown forecast kind: " + kind);
}

}  // namespace raceway
