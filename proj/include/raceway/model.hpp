#pragma once

#include <algorithm>
#include <cmath>

#include "raceway/params.hpp"
#include "raceway/types.hpp"
#include "raceway/units.hpp"

// Biological, water level and thermal dynamics of the raceway. All functions
// are pure; rates carry the unit stated in their comment and are converted to
// SI at the RHS boundary only.

namespace raceway {

/// Average irradiance available to the culture after Beer-Lambert attenuation
/// over the water column. X enters in g/L and is converted to g/m^3 so that
/// ka*X*h is dimensionless.
inline double average_irradiance(double i0, double biomass, double level,
                                 const ModelParams& p) {
  const double ext = p.ka * biomass * gpl_to_gpm3 * level;
  if (ext < 1e-9) return i0;  // zero-attenuation limit
  return i0 * (1.0 - std::exp(-ext)) / ext;
}

/// Light-limited potential growth rate [day^-1], saturating at mu_max.
inline double mu_light(double iav, const ModelParams& p) {
  if (iav <= 0.0) return 0.0;
  const double a = std::pow(iav, p.n_form);
  return p.mu_max * a / (a + std::pow(p.i_k, p.n_form));
}

/// Cardinal model: 1 at v_opt, 0 at and beyond v_min / v_max, clamped to [0,1].
inline double cardinal_factor(double v, double v_min, double v_opt, double v_max) {
  if (!(v_min < v_opt && v_opt < v_max))
    throw invalid_parameter("cardinal_factor: require v_min < v_opt < v_max");
  if (v <= v_min || v >= v_max) return 0.0;
  const double num = (v - v_max) * (v - v_min) * (v - v_min);
  const double den = (v_opt - v_min) *
                     ((v_opt - v_min) * (v - v_opt) -
                      (v_opt - v_max) * (v_opt + v_min - 2.0 * v));
  return std::clamp(num / den, 0.0, 1.0);
}

/// Dissolved-oxygen inhibition factor, 1 at DO=0 and 0 at DO >= do_max.
inline double mu_do(double oxygen, const ModelParams& p) {
  return std::max(0.0, 1.0 - std::pow(oxygen / p.do_max, p.m_do2));
}

/// Maintenance (respiration) losses [day^-1], in [m_min, m_min + m_max].
inline double maintenance(double iav, const ModelParams& p) {
  if (iav <= 0.0) return p.m_min;
  const double a = std::pow(iav, p.n_m);
  return p.m_min + p.m_max * a / (a + std::pow(p.i_km, p.n_m));
}

/// Specific growth rate [day^-1]. Nutrient and CO2 limitation factors are
/// fixed at 1 (nutrients in excess, CO2 actively injected). May be negative.
inline double growth_rate(const ReactorState& s, double ph, double iav,
                          const ModelParams& p) {
  const double light = mu_light(iav, p);
  const double f_t = cardinal_factor(s.temp, p.t_min, p.t_opt, p.t_max);
  const double f_ph = cardinal_factor(ph, p.ph_min, p.ph_opt, p.ph_max);
  const double f_do = mu_do(s.oxygen, p);
  return light * f_t * f_ph * f_do - maintenance(iav, p);
}

/// Tetens saturation vapor pressure [Pa] at T [degC].
inline double saturation_vapor_pressure(double temp) {
  return 610.78 * std::exp(17.2694 * temp / (temp + 238.3));
}

/// Latent heat of vaporization [J/kg], linear correlation around 2.45e6.
inline double latent_heat(double temp) { return (2501.0 - 2.361 * temp) * 1000.0; }

/// Evaporation as a liquid-volume loss rate [m^3/s]. The gas-liquid transfer
/// coefficient is affine in wind speed and air bubbling flow.
inline double evaporation_rate(double temp, double t_amb, double humidity,
                               double wind, double q_air_lpm, const ModelParams& p) {
  const double kl = p.kl_const + p.kl_wind * wind + p.kl_air * q_air_lpm;
  const double e_w = saturation_vapor_pressure(temp);
  const double e_a = humidity / 100.0 * saturation_vapor_pressure(t_amb);
  return kl * p.area * (e_w - e_a) / latent_heat(temp);
}

/// Water level balance [m/s]: dilution in, harvest and evaporation out.
inline double level_rhs(const ControlInput& u, double g_s, const ModelParams& p) {
  return (u.q_d * lpm_to_m3s - u.q_h * lpm_to_m3s - g_s) / p.area;
}

/// Biomass concentration balance [g/L per s]. Evaporation concentrates the
/// culture; dilution thins it; mu is passed in day^-1.
inline double biomass_rhs(const ReactorState& s, const ControlInput& u,
                          double mu_per_day, double g_s, const ModelParams& p) {
  const double volume = p.area * s.level;
  return s.biomass *
         (mu_per_day * per_day_to_per_s - (u.q_d * lpm_to_m3s - g_s) / volume);
}

/// Net heat exchanged with the environment [W]: absorbed solar input minus
/// evaporative, convective, conductive and longwave losses.
inline double heat_exchange(const ReactorState& s, const Disturbance& d, double g_s,
                            const ModelParams& p) {
  const double solar = p.eta_solar * d.irradiance * p.area;
  const double evap = p.rho * latent_heat(s.temp) * g_s;
  const double conv =
      (p.h_conv_const + p.h_conv_wind * d.wind) * p.area * (s.temp - d.t_amb);
  const double cond = p.h_cond * p.area * (s.temp - d.t_soil);
  const double t_k = s.temp + celsius_to_kelvin;
  const double t_sky = d.t_amb + celsius_to_kelvin - p.sky_offset;
  const double rad = p.emissivity * stefan_boltzmann * p.area *
                     (t_k * t_k * t_k * t_k - t_sky * t_sky * t_sky * t_sky);
  return solar - evap - conv - cond - rad;
}

/// Water temperature balance [degC/s]: environmental exchange plus dilution
/// with water at t_dilution.
inline double temperature_rhs(const ReactorState& s, const ControlInput& u,
                              double q_ac, const ModelParams& p) {
  const double volume = p.area * s.level;
  return q_ac / (volume * p.cp * p.rho) +
         (u.q_d * lpm_to_m3s / volume) * (p.t_dilution - s.temp);
}

}  // namespace raceway
