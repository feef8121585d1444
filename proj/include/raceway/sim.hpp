#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "raceway/empc.hpp"
#include "raceway/forecast.hpp"
#include "raceway/integrate.hpp"
#include "raceway/regulatory.hpp"
#include "raceway/timeseries.hpp"

// Scenario execution: fixed-step integration of the full plant against a
// recorded disturbance series, with controller decisions every controller
// period and the CO2 loop evaluated every substep.

namespace raceway {

struct Scenario {
  std::string name = "scenario";
  ReactorState init;
  WeatherSeries weather;       ///< 1-min cadence; must cover [start, end]
  std::int64_t start = 0;      ///< epoch seconds
  std::int64_t end = 0;
  std::string controller = "empc";  ///< empc | benchmark | none
  std::string forecast = "perfect";
  double substep = 30.0;       ///< internal integration step [s]
  ModelParams model;
  GasParams gas;
  CostParams cost;
  EmpcConfig empc;
  BenchmarkConfig benchmark;
  PiConfig pi;

  void validate() const {
    model.validate();
    gas.validate();
    empc.validate();
    benchmark.validate();
    if (start >= end) throw invalid_parameter("Scenario: start must precede end");
    if (!weather.covers(static_cast<double>(start), static_cast<double>(end)))
      throw invalid_parameter("Scenario: weather series does not cover [start, end]");
    for (std::size_t i = 2; i < weather.time.size(); ++i)
      if (weather.time[i] - weather.time[i - 1] != weather.time[1] - weather.time[0])
        throw invalid_parameter("Scenario: weather timestamps must be uniform");
    if (controller != "empc" && controller != "benchmark" && controller != "none")
      throw invalid_parameter("Scenario: unknown controller '" + controller + "'");
    if (!(substep > 0) || std::fmod(empc.ts, substep) != 0.0)
      throw invalid_parameter("Scenario: controller period must be a multiple of the substep");
  }
};

struct TrajectoryPoint {
  std::int64_t t = 0;      ///< period start
  ReactorState state;      ///< at period start
  ControlInput input;      ///< applied flows; q_co2 is the period average
  double ph = 0.0;
  double mu = 0.0;         ///< net specific growth [day^-1]
  double stage_cost = 0.0; ///< economic rate, period average [EUR/s]
  double full_cost = 0.0;  ///< full economic rate, period average [EUR/s]
  double cum_cost = 0.0;      ///< prefix sum of stage_cost x Ts [EUR]
  double cum_full_cost = 0.0; ///< prefix sum of full_cost x Ts [EUR]
  bool active = false;
};

struct EmpcStepRecord {
  std::int64_t t = 0;
  EmpcStepDiagnostics diag;
};

struct Trajectory {
  double ts = 300.0;
  std::vector<TrajectoryPoint> points;
  std::vector<EmpcStepRecord> diagnostics;  ///< one per active EMPC period
  ReactorState final_state;
  double min_level = std::numeric_limits<double>::infinity();  ///< over substeps [m]

  double total_cost() const { return points.empty() ? 0.0 : points.back().cum_cost; }
  double total_full_cost() const {
    return points.empty() ? 0.0 : points.back().cum_full_cost;
  }
};

/// Biomass concentration at each active-to-inactive transition (end of each
/// operating day), used to check the terminal constraint.
inline std::vector<double> end_of_day_biomass(const Trajectory& traj) {
  std::vector<double> out;
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    if (!traj.points[i].active) continue;
    const bool last = (i + 1 == traj.points.size());
    if (last || !traj.points[i + 1].active)
      out.push_back(last ? traj.final_state.biomass
                         : traj.points[i + 1].state.biomass);
  }
  return out;
}

/// Runs one scenario: controller decisions every period, plant integration
/// every substep, CO2 loop (PI or relay) on the delayed pH measurement every
/// substep. All manipulated flows are zero outside the activation window.
inline Trajectory run_scenario(const Scenario& sc) {
  sc.validate();
  std::unique_ptr<ForecastProvider> forecast;
  if (sc.controller == "empc") forecast = make_forecast(sc.forecast, sc.weather);

  const double ts = sc.empc.ts;
  const int nsub = static_cast<int>(std::llround(ts / sc.substep));
  ReactorState state = sc.init;

  const int delay_steps =
      static_cast<int>(std::llround(sc.pi.meas_delay / sc.substep));
  DelayLine ph_delay(delay_steps, speciate(state.tic, sc.gas.alkalinity, sc.gas).ph);
  PiController pi(sc.pi);
  BenchmarkController bench(sc.benchmark, sc.model);
  EmpcController empc(sc.model, sc.gas, sc.cost, sc.empc, sc.init.biomass);

  Trajectory traj;
  traj.ts = ts;
  traj.min_level = state.level;
  bool was_active = false;
  double cum = 0.0, cum_full = 0.0;

  for (std::int64_t t = sc.start; t < sc.end; t += static_cast<std::int64_t>(ts)) {
    try {
      const Disturbance d0 = sc.weather.at(static_cast<double>(t));
      const bool active = should_activate(d0.irradiance, sc.empc);
      if (active && !was_active) pi.new_day();

      ControlInput flows;
      EmpcStepDiagnostics diag;
      bool have_diag = false;
      if (sc.controller == "empc") {
        flows = empc.plan(static_cast<double>(t), state, *forecast, active, &diag);
        have_diag = active;
      } else if (sc.controller == "benchmark") {
        flows = bench.plan(t, state, active);
      }

      TrajectoryPoint pt;
      pt.t = t;
      pt.state = state;
      pt.active = active;
      const PlantDerived der = derive(state, flows, d0, sc.model, sc.gas);
      pt.ph = der.ph;
      pt.mu = der.mu;

      double cost_sum = 0.0, full_sum = 0.0, co2_sum = 0.0;
      for (int k = 0; k < nsub; ++k) {
        const double tk = static_cast<double>(t) + k * sc.substep;
        const Disturbance dk = sc.weather.at(tk);
        const double ph_true = speciate(state.tic, sc.gas.alkalinity, sc.gas).ph;
        const double ph_meas = ph_delay.push(ph_true);
        ControlInput u = flows;
        if (sc.controller == "empc")
          u.q_co2 = active ? pi.step(ph_meas, sc.substep) : 0.0;
        else if (sc.controller == "benchmark")
          u.q_co2 = bench.co2_flow(ph_meas, active);
        cost_sum += stage_cost(state, u, sc.cost);
        full_sum += full_stage_cost(state, u, sc.cost);
        co2_sum += u.q_co2;
        state = plant_step(state, u, dk, sc.substep, sc.model, sc.gas);
        traj.min_level = std::min(traj.min_level, state.level);
      }

      pt.input = flows;
      pt.input.q_co2 = co2_sum / nsub;
      pt.stage_cost = cost_sum / nsub;
      pt.full_cost = full_sum / nsub;
      cum += pt.stage_cost * ts;
      cum_full += pt.full_cost * ts;
      pt.cum_cost = cum;
      pt.cum_full_cost = cum_full;
      traj.points.push_back(pt);
      if (have_diag) traj.diagnostics.push_back({t, diag});
      was_active = active;
    } catch (const simulation_error& e) {
      throw simulation_error("at " + format_iso8601(t) + ": " + e.what());
    } catch (const forecast_error& e) {
      throw forecast_error("at " + format_iso8601(t) + ": " + e.what());
    }
  }
  traj.final_state = state;
  return traj;
}

}  // namespace raceway
