#pragma once

#include <algorithm>
#include <cmath>

#include "raceway/params.hpp"
#include "raceway/types.hpp"
#include "raceway/units.hpp"

// Dissolved oxygen and carbonate/pH dynamics. The carbonate system is closed
// by a constant alkalinity and equilibrium constants at 25 degC; pH follows
// from the charge balance  ALK = [HCO3-] + 2[CO3--] + [OH-] - [H+].

namespace raceway {

struct Speciation {
  double ph = 7.0;
  double co2 = 0.0;  ///< dissolved CO2 [mol/m^3]
};

namespace detail {

/// Charge-balance residual ALK - ([HCO3-]+2[CO3--]+[OH-]-[H+]) in mol/m^3 at
/// a trial pH. Strictly decreasing in pH, so a sign change brackets the root.
inline double charge_residual(double ph, double tic_m3, double alk_m3,
                              const GasParams& g) {
  const double h = std::pow(10.0, -ph);      // mol/L
  const double tic = tic_m3 / 1000.0;        // mol/L
  const double alk = alk_m3 / 1000.0;        // mol/L
  const double r1 = g.k1 / h;
  const double r2 = g.k1 * g.k2 / (h * h);
  const double denom = 1.0 + r1 + r2;
  const double hco3 = tic * r1 / denom;
  const double co3 = tic * r2 / denom;
  const double oh = g.kw / h;
  return (alk - (hco3 + 2.0 * co3 + oh - h)) * 1000.0;  // back to mol/m^3
}

}  // namespace detail

/// Solve the carbonate charge balance for pH by safeguarded bisection on
/// [2, 12]; also returns the dissolved CO2 share of TIC. Throws if the
/// residual does not change sign over the bracket (inconsistent ALK/TIC).
inline Speciation speciate(double tic, double alk, const GasParams& g) {
  const double tol = 1e-12 * alk;
  double lo = 2.0, hi = 12.0;
  double r_lo = detail::charge_residual(lo, tic, alk, g);
  double r_hi = detail::charge_residual(hi, tic, alk, g);
  if (!(r_lo > 0.0 && r_hi < 0.0))
    throw simulation_error("speciate: charge balance has no root in pH [2,12]");
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double r = detail::charge_residual(mid, tic, alk, g);
    if (std::abs(r) < tol) break;
    if (r > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double h = std::pow(10.0, -mid);
  const double denom = 1.0 + g.k1 / h + g.k1 * g.k2 / (h * h);
  return {mid, tic / denom};
}

/// Closed-form TIC that puts the culture at a given pH for the configured
/// alkalinity. Used to initialize scenarios from a measured pH.
inline double tic_for_ph(double ph, double alk, const GasParams& g) {
  const double h = std::pow(10.0, -ph);  // mol/L
  const double r1 = g.k1 / h;
  const double r2 = g.k1 * g.k2 / (h * h);
  const double frac = (r1 + 2.0 * r2) / (1.0 + r1 + r2);
  const double alk_l = alk / 1000.0;
  return (alk_l - g.kw / h + h) / frac * 1000.0;  // mol/m^3
}

/// O2 transfer coefficient [s^-1]: passive (wind) plus forced (bubbling).
inline double kla_o2(double wind, double q_air_lpm, const GasParams& g) {
  return g.kla_o2_const + g.kla_o2_wind * wind + g.kla_o2_air * q_air_lpm;
}

/// CO2 transfer coefficient [s^-1].
inline double kla_co2(double wind, double q_air_lpm, const GasParams& g) {
  return g.kla_co2_const + g.kla_co2_wind * wind + g.kla_co2_air * q_air_lpm;
}

/// Dissolved oxygen balance [% sat per s]. mu_gross is the gross
/// photosynthetic rate (net growth plus maintenance) in day^-1; transfer
/// drives DO toward 100 % saturation, dilution toward the inlet concentration.
inline double oxygen_rhs(const ReactorState& s, const ControlInput& u,
                         const Disturbance& d, double mu_gross_per_day,
                         const GasParams& g, const ModelParams& p) {
  const double photo = std::max(0.0, mu_gross_per_day) * per_day_to_per_s;
  const double volume = p.area * s.level;
  return g.y_o2 * s.biomass * photo -
         kla_o2(d.wind, u.q_air, g) * (s.oxygen - 100.0) -
         (u.q_d * lpm_to_m3s / volume) * (s.oxygen - g.do_dilution);
}

/// Moles of CO2 entering the sump per second at a given injection flow.
inline double co2_injection_mol_s(double q_co2_lpm) {
  return q_co2_lpm / 60.0 / molar_volume_stp_l;
}

/// Total inorganic carbon balance [mol/m^3 per s]: photosynthetic uptake,
/// atmospheric exchange of the dissolved CO2 fraction, sump injection, and
/// dilution.
inline double carbon_rhs(const ReactorState& s, const ControlInput& u,
                         const Disturbance& d, double mu_gross_per_day,
                         double co2_dissolved, const GasParams& g,
                         const ModelParams& p) {
  const double photo = std::max(0.0, mu_gross_per_day) * per_day_to_per_s;
  const double volume = p.area * s.level;
  const double uptake = g.y_c * s.biomass * gpl_to_gpm3 * photo;
  const double transfer = kla_co2(d.wind, u.q_air, g) * (co2_dissolved - g.co2_atm_eq);
  const double injection = g.eta_inj * co2_injection_mol_s(u.q_co2) / volume;
  const double dilution = (u.q_d * lpm_to_m3s / volume) * (s.tic - g.tic_dilution);
  return -uptake - transfer + injection - dilution;
}

}  // namespace raceway
