#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace raceway {

/// Continuous plant state. pH is not stored; it is derived from TIC by
/// carbonate speciation (see chemistry.hpp).
struct ReactorState {
  double biomass = 0.5;  ///< X  [g/L]
  double level = 0.14;   ///< h  [m]
  double temp = 20.0;    ///< T  [degC]
  double oxygen = 100.0; ///< DO [% saturation]
  double tic = 2.0;      ///< total inorganic carbon [mol/m^3]

  bool finite() const {
    return std::isfinite(biomass) && std::isfinite(level) && std::isfinite(temp) &&
           std::isfinite(oxygen) && std::isfinite(tic);
  }
};

/// The four manipulated flows, in L/min.
struct ControlInput {
  double q_air = 0.0; ///< air bubbling
  double q_co2 = 0.0; ///< CO2 injection
  double q_d = 0.0;   ///< dilution (inflow)
  double q_h = 0.0;   ///< harvest (outflow)
};

/// Exogenous weather sample.
struct Disturbance {
  double irradiance = 0.0; ///< I0    [W/m^2]
  double t_amb = 20.0;     ///< T_amb [degC]
  double t_soil = 18.0;    ///< T_soil[degC]
  double wind = 2.0;       ///< WS    [m/s]
  double humidity = 60.0;  ///< RH    [%]
};

struct invalid_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct simulation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct forecast_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace raceway
