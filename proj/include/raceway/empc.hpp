#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "raceway/forecast.hpp"
#include "raceway/integrate.hpp"
#include "raceway/model.hpp"
#include "raceway/nlp.hpp"
#include "raceway/params.hpp"
#include "raceway/units.hpp"

// Economic MPC supervisory loop: the economic stage cost, the daylight
// activation and shrinking-horizon schedule, the direct-shooting
// transcription, and the per-period controller.

namespace raceway {

/// Optimized economic rate [EUR/s]: harvested-biomass revenue against blower
/// and paddle-wheel electricity. Flows enter in L/min; X in g/L equals
/// kg/m^3, so no mass conversion is needed.
inline double stage_cost(const ReactorState& s, const ControlInput& u,
                         const CostParams& c) {
  return -c.price_biomass * s.biomass * (u.q_h * lpm_to_m3s) +
         c.c_power * c.p_blower * (u.q_air * lpm_to_m3s) +
         c.c_power * c.p_wheel * c.v_linear * s.level * s.level;
}

/// Full economic rate [EUR/s] adding nutrient (dilution) and CO2 costs.
/// Reported for comparison; the optimizer uses stage_cost.
inline double full_stage_cost(const ReactorState& s, const ControlInput& u,
                              const CostParams& c) {
  return stage_cost(s, u, c) + c.c_nutrient * (u.q_d * lpm_to_m3s) +
         c.c_co2 * (u.q_co2 * lpm_to_m3s);
}

/// The optimizer runs only while irradiance strictly exceeds the threshold.
inline bool should_activate(double i0, const EmpcConfig& cfg) {
  return i0 > cfg.activation_irradiance;
}

/// Remaining controller periods to the end of the operating day, capped at
/// Np and floored at 1.
inline int horizon_for(double now, double day_end, const EmpcConfig& cfg) {
  const int remaining =
      static_cast<int>(std::ceil((day_end - now) / cfg.ts - 1e-12));
  return std::clamp(remaining, 1, cfg.np);
}

/// First forecast time at which irradiance falls below the activation
/// threshold, scanning one controller period at a time up to Np periods
/// ahead. Forecast gaps end the day at the last covered sample.
inline double day_end_from_forecast(const ForecastProvider& f, double now,
                                    const EmpcConfig& cfg) {
  for (int k = 1; k <= cfg.np; ++k) {
    const double t = now + k * cfg.ts;
    double i0;
    try {
      i0 = f.at(now, t).irradiance;
    } catch (const forecast_error&) {
      return t;  // no data beyond this point: treat as day end
    }
    if (i0 <= cfg.activation_irradiance) return t;
  }
  return now + cfg.np * cfg.ts;
}

namespace detail {

/// Reduced 4-state prediction model (X, h, T, DO). TIC is not simulated; pH
/// is assumed held at its optimum by the regulatory CO2 loop.
inline std::array<double, 4> predictor_rhs(const std::array<double, 4>& x,
                                           const ControlInput& u, const Disturbance& d,
                                           const ModelParams& p, const GasParams& g) {
  // level guard keeps the rollout finite for absurd trial flows; the level
  // constraint pushes the optimizer away from this region
  const ReactorState s{x[0], std::max(x[1], 1e-3), x[2], x[3], 0.0};
  const double iav = average_irradiance(d.irradiance, s.biomass, s.level, p);
  const double mu = growth_rate(s, p.ph_opt, iav, p);
  const double m = maintenance(iav, p);
  const double g_s = evaporation_rate(s.temp, d.t_amb, d.humidity, d.wind, u.q_air, p);
  const double q_ac = heat_exchange(s, d, g_s, p);
  return {biomass_rhs(s, u, mu, g_s, p), level_rhs(u, g_s, p),
          temperature_rhs(s, u, q_ac, p), oxygen_rhs(s, u, d, mu + m, g, p)};
}

struct Prediction {
  double economic = 0.0;         ///< sum of stage costs x Ts [EUR]
  std::vector<double> level_cm;  ///< level after each step [cm]
  double x_terminal = 0.0;       ///< biomass at the end of the horizon [g/L]
};

/// Rolls the reduced model over the horizon (one RK4 step per controller
/// period) accumulating the economic cost and the constrained outputs.
inline Prediction predict(const ReactorState& s0, const std::vector<double>& z,
                          const MoveLayout& lay, const std::vector<Disturbance>& dist,
                          const ModelParams& p, const GasParams& g,
                          const CostParams& c, const EmpcConfig& cfg) {
  std::array<double, 4> x{s0.biomass, s0.level, s0.temp, s0.oxygen};
  Prediction out;
  out.level_cm.reserve(static_cast<std::size_t>(lay.np));
  for (int i = 0; i < lay.np; ++i) {
    const int b = lay.block_of(i);
    ControlInput u;
    u.q_air = z[static_cast<std::size_t>(lay.flow_index(b, 0))];
    u.q_d = z[static_cast<std::size_t>(lay.flow_index(b, 1))];
    u.q_h = z[static_cast<std::size_t>(lay.flow_index(b, 2))];
    const ReactorState st{x[0], std::max(x[1], 1e-3), x[2], x[3], 0.0};
    out.economic += stage_cost(st, u, c) * cfg.ts;
    const Disturbance& d = dist[static_cast<std::size_t>(i)];
    auto rhs = [&](const std::array<double, 4>& xx) {
      return predictor_rhs(xx, u, d, p, g);
    };
    x = rk4_step(x, rhs, cfg.ts);
    out.level_cm.push_back(x[1] * 100.0);
  }
  out.x_terminal = x[0];
  return out;
}

struct PredictionCache {
  std::vector<double> flows;
  Prediction pred;
  bool valid = false;
};

}  // namespace detail

/// Builds the direct-shooting NLP for one controller period: blocked flow
/// moves plus level and terminal-biomass slacks, economic objective with
/// quadratic slack penalties, and soft constraints
///   h_i >= h_min + S_h,i  (per step, in cm),
///   X_Np >= X_min + S_Xb.
inline NlpProblem transcribe(const ReactorState& state, double t0, int np,
                             const ForecastProvider& forecast, double x_min,
                             const ModelParams& model, const GasParams& gas,
                             const CostParams& cost, const EmpcConfig& cfg) {
  if (np < 1) throw invalid_parameter("transcribe: horizon must be >= 1");
  const MoveLayout lay = MoveLayout::make(np, std::min(cfg.nc, np));
  std::vector<Disturbance> dist(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i)
    dist[static_cast<std::size_t>(i)] = forecast.at(t0, t0 + i * cfg.ts);

  NlpProblem prob;
  prob.layout = lay;
  const std::size_t nvars = static_cast<std::size_t>(lay.size());
  prob.lower.assign(nvars, 0.0);
  prob.upper.assign(nvars, 0.0);
  prob.guess.assign(nvars, 0.0);
  for (int b = 0; b < lay.nc; ++b) {
    prob.upper[static_cast<std::size_t>(lay.flow_index(b, 0))] = cfg.bounds.q_air_max;
    prob.upper[static_cast<std::size_t>(lay.flow_index(b, 1))] = cfg.bounds.q_d_max;
    prob.upper[static_cast<std::size_t>(lay.flow_index(b, 2))] = cfg.bounds.q_h_max;
    for (int k = 0; k < 3; ++k) {
      const std::size_t idx = static_cast<std::size_t>(lay.flow_index(b, k));
      prob.guess[idx] = std::clamp(cfg.default_flow, prob.lower[idx], prob.upper[idx]);
    }
  }
  for (int i = 0; i < np; ++i)
    prob.lower[static_cast<std::size_t>(lay.slack_level_index(i))] = cfg.slack_h_min;
  prob.lower[static_cast<std::size_t>(lay.slack_terminal_index())] = cfg.slack_xb_min;

  auto cache = std::make_shared<detail::PredictionCache>();
  auto ensure = [cache, state, lay, dist, model, gas, cost,
                 cfg](const std::vector<double>& z) -> const detail::Prediction& {
    const std::size_t nf = static_cast<std::size_t>(3 * lay.nc);
    if (!cache->valid || !std::equal(z.begin(), z.begin() + nf, cache->flows.begin())) {
      cache->pred = detail::predict(state, z, lay, dist, model, gas, cost, cfg);
      cache->flows.assign(z.begin(), z.begin() + nf);
      cache->valid = true;
    }
    return cache->pred;
  };

  prob.objective = [ensure, lay, cfg](const std::vector<double>& z) {
    const detail::Prediction& pred = ensure(z);
    double penalty = 0.0;
    for (int i = 0; i < lay.np; ++i) {
      const double s = z[static_cast<std::size_t>(lay.slack_level_index(i))];
      penalty += cfg.w_slack_h * s * s;
    }
    const double sx = z[static_cast<std::size_t>(lay.slack_terminal_index())];
    penalty += cfg.w_slack_xb * sx * sx;
    return pred.economic + penalty;
  };
  prob.inequality = [ensure, lay, cfg, x_min](const std::vector<double>& z) {
    const detail::Prediction& pred = ensure(z);
    std::vector<double> g(static_cast<std::size_t>(lay.np) + 1);
    for (int i = 0; i < lay.np; ++i)
      g[static_cast<std::size_t>(i)] =
          (cfg.h_min_cm + z[static_cast<std::size_t>(lay.slack_level_index(i))]) -
          pred.level_cm[static_cast<std::size_t>(i)];
    g[static_cast<std::size_t>(lay.np)] =
        (x_min + z[static_cast<std::size_t>(lay.slack_terminal_index())]) -
        pred.x_terminal;
    return g;
  };
  return prob;
}

/// Per-period optimizer diagnostics appended to the trajectory log.
struct EmpcStepDiagnostics {
  int horizon = 0;
  int iterations = 0;
  double objective = 0.0;
  double optimality = 0.0;
  double constraint_violation = 0.0;
  double slack_level_worst = 0.0;  ///< most negative accepted level slack [cm]
  double slack_terminal = 0.0;     ///< accepted terminal biomass slack [g/L]
  std::string status;
  bool fallback = false;
};

/// The supervisory EMPC: transcribes and solves the shrinking-horizon problem
/// each active period and applies the first blocked move. CO2 injection is
/// delegated to the PI loop. On a non-finite solve result the previous
/// applied input is held.
class EmpcController {
 public:
  EmpcController(const ModelParams& model, const GasParams& gas,
                 const CostParams& cost, const EmpcConfig& cfg, double x_min)
      : model_(model), gas_(gas), cost_(cost), cfg_(cfg), x_min_(x_min) {
    cfg.validate();
  }

  ControlInput plan(double t, const ReactorState& s, const ForecastProvider& forecast,
                    bool active, EmpcStepDiagnostics* diag = nullptr) {
    if (!active) {
      prev_z_.clear();
      last_input_ = ControlInput{};
      return ControlInput{};
    }
    const double day_end = day_end_from_forecast(forecast, t, cfg_);
    const int np = horizon_for(t, day_end, cfg_);
    NlpProblem prob = transcribe(s, t, np, forecast, x_min_, model_, gas_, cost_, cfg_);
    prob.guess =
        warm_start(prev_z_, prev_layout_, prob.layout, prob.lower, prob.upper,
                   cfg_.default_flow);
    const NlpSolution sol = solve(prob, solver_);

    ControlInput u;
    const bool bad = !std::isfinite(sol.objective);
    if (bad) {
      u = last_input_;
    } else {
      u.q_air = sol.z[0];
      u.q_d = sol.z[1];
      u.q_h = sol.z[2];
      prev_z_ = sol.z;
      prev_layout_ = prob.layout;
      last_input_ = u;
    }
    if (diag) {
      diag->horizon = np;
      diag->iterations = sol.iterations;
      diag->objective = sol.objective;
      diag->optimality = sol.optimality;
      diag->constraint_violation = sol.constraint_violation;
      diag->status = bad ? "fallback" : sol.status;
      diag->fallback = bad;
      double worst = 0.0;
      for (int i = 0; i < prob.layout.np; ++i)
        worst = std::min(
            worst, sol.z[static_cast<std::size_t>(prob.layout.slack_level_index(i))]);
      diag->slack_level_worst = worst;
      diag->slack_terminal =
          sol.z[static_cast<std::size_t>(prob.layout.slack_terminal_index())];
    }
    return u;
  }

  void set_solver_options(const SolverOptions& o) { solver_ = o; }

 private:
  ModelParams model_;
  GasParams gas_;
  CostParams cost_;
  EmpcConfig cfg_;
  double x_min_;
  SolverOptions solver_;
  std::vector<double> prev_z_;
  MoveLayout prev_layout_;
  ControlInput last_input_;
};

}  // namespace raceway
