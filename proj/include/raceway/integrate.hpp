#pragma once

#include <array>
#include <cmath>

#include "raceway/chemistry.hpp"
#include "raceway/model.hpp"

namespace raceway {

/// One classical 4th-order Runge-Kutta step for an autonomous RHS over a
/// fixed-size state vector.
template <std::size_t N, class Rhs>
std::array<double, N> rk4_step(const std::array<double, N>& x, Rhs&& f, double dt) {
  std::array<double, N> k1 = f(x), x2{}, x3{}, x4{};
  for (std::size_t i = 0; i < N; ++i) x2[i] = x[i] + 0.5 * dt * k1[i];
  std::array<double, N> k2 = f(x2);
  for (std::size_t i = 0; i < N; ++i) x3[i] = x[i] + 0.5 * dt * k2[i];
  std::array<double, N> k3 = f(x3);
  for (std::size_t i = 0; i < N; ++i) x4[i] = x[i] + dt * k3[i];
  std::array<double, N> k4 = f(x4), out{};
  for (std::size_t i = 0; i < N; ++i)
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// Quantities derived from the state that the trajectory log records.
struct PlantDerived {
  double ph = 0.0;
  double co2 = 0.0;   ///< dissolved CO2 [mol/m^3]
  double iav = 0.0;   ///< average irradiance [uE m^-2 s^-1]
  double mu = 0.0;    ///< net specific growth rate [day^-1]
  double g_s = 0.0;   ///< evaporation [m^3/s]
};

inline PlantDerived derive(const ReactorState& s, const ControlInput& u,
                           const Disturbance& d, const ModelParams& p,
                           const GasParams& g) {
  PlantDerived out;
  const Speciation sp = speciate(s.tic, g.alkalinity, g);
  out.ph = sp.ph;
  out.co2 = sp.co2;
  out.iav = average_irradiance(d.irradiance, s.biomass, s.level, p);
  out.mu = growth_rate(s, sp.ph, out.iav, p);
  out.g_s = evaporation_rate(s.temp, d.t_amb, d.humidity, d.wind, u.q_air, p);
  return out;
}

namespace detail {

inline std::array<double, 5> pack(const ReactorState& s) {
  return {s.biomass, s.level, s.temp, s.oxygen, s.tic};
}

inline ReactorState unpack(const std::array<double, 5>& x) {
  return {x[0], x[1], x[2], x[3], x[4]};
}

inline std::array<double, 5> plant_rhs(const std::array<double, 5>& x,
                                       const ControlInput& u, const Disturbance& d,
                                       const ModelParams& p, const GasParams& g) {
  const ReactorState s = unpack(x);
  const Speciation sp = speciate(s.tic, g.alkalinity, g);
  const double iav = average_irradiance(d.irradiance, s.biomass, s.level, p);
  const double mu = growth_rate(s, sp.ph, iav, p);
  const double m = maintenance(iav, p);
  const double g_s = evaporation_rate(s.temp, d.t_amb, d.humidity, d.wind, u.q_air, p);
  const double q_ac = heat_exchange(s, d, g_s, p);
  return {biomass_rhs(s, u, mu, g_s, p),
          level_rhs(u, g_s, p),
          temperature_rhs(s, u, q_ac, p),
          oxygen_rhs(s, u, d, mu + m, g, p),
          carbon_rhs(s, u, d, mu + m, sp.co2, g, p)};
}

}  // namespace detail

/// Post-step state floors. The level floor is a hard integration guard; the
/// concentration floors keep near-zero states from going negative.
inline void apply_floors(ReactorState& s) {
  s.biomass = std::max(0.0, s.biomass);
  s.oxygen = std::max(0.0, s.oxygen);
  s.tic = std::max(0.0, s.tic);
  s.level = std::max(1e-3, s.level);
}

/// RK4 step of the full plant (inputs and disturbance held constant over dt),
/// with state floors applied after the step. Throws on non-finite results.
inline ReactorState plant_step(const ReactorState& s, const ControlInput& u,
                               const Disturbance& d, double dt,
                               const ModelParams& p, const GasParams& g) {
  auto rhs = [&](const std::array<double, 5>& x) {
    return detail::plant_rhs(x, u, d, p, g);
  };
  ReactorState next = detail::unpack(rk4_step(detail::pack(s), rhs, dt));
  if (!next.finite())
    throw simulation_error("plant_step: non-finite state (parameter blow-up?)");
  apply_floors(next);
  return next;
}

}  // namespace raceway
