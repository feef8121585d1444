#pragma once

#include <stdexcept>

#include "raceway/types.hpp"

namespace raceway {

/// First-principles model parameters. Defaults are the calibrated values for
/// the 80 m^2 raceway and the cultivated strain; the evaporation and heat
/// exchange coefficients are this toolkit's documented surrogates for terms
/// the plant literature leaves to site calibration.
struct ModelParams {
  // geometry / medium
  double area = 80.0;     ///< A [m^2]
  double cp = 4184.0;     ///< specific heat of water [J kg^-1 K^-1]
  double rho = 1000.0;    ///< density of water [kg/m^3]
  double t_dilution = 10.0; ///< T_d, dilution water temperature [degC]

  // growth
  double mu_max = 1.8144; ///< maximum specific growth rate [day^-1]
  double m_min = 0.0173;  ///< base maintenance [day^-1]
  double m_max = 0.0173;  ///< irradiance-driven maintenance span [day^-1]
  double ka = 0.1;        ///< biomass extinction coefficient [m^2/g]
  double i_k = 120.0;     ///< half-saturation irradiance for growth [uE m^-2 s^-1]
  double i_km = 120.0;    ///< half-saturation irradiance for maintenance [uE m^-2 s^-1]
  double n_form = 3.0;    ///< growth form exponent [-]
  double n_m = 4.0;       ///< maintenance form exponent [-]

  // cardinal ranges
  double t_min = 12.0, t_max = 46.0, t_opt = 30.0;  ///< [degC]
  double ph_min = 4.0, ph_max = 12.0, ph_opt = 8.0; ///< [-]
  double do_max = 500.0;  ///< DO2_max, growth extinction threshold [% sat]
  double m_do2 = 2.0;     ///< DO inhibition form exponent [-]

  // evaporation: g_s = K_l(WS,Q_air) * A * (e_w - e_a) / L_v, K_l affine
  double kl_const = 0.0;     ///< K_l intercept
  double kl_wind = 2.5e-5;   ///< K_l per (m/s) of wind
  double kl_air = 8.0e-8;    ///< K_l per (L/min) of air flow

  // environmental heat exchange aggregate Q_ac
  double eta_solar = 0.9;    ///< absorbed fraction of global irradiance [-]
  double h_conv_const = 5.7; ///< convection coefficient intercept [W m^-2 K^-1]
  double h_conv_wind = 3.8;  ///< convection coefficient per (m/s) [W m^-2 K^-1 / (m/s)]
  double h_cond = 2.0;       ///< conduction coefficient to soil [W m^-2 K^-1]
  double emissivity = 0.97;  ///< water longwave emissivity [-]
  double sky_offset = 10.0;  ///< T_sky = T_amb - sky_offset [K]

  void validate() const {
    if (!(t_min < t_opt && t_opt < t_max))
      throw invalid_parameter("ModelParams: require t_min < t_opt < t_max");
    if (!(ph_min < ph_opt && ph_opt < ph_max))
      throw invalid_parameter("ModelParams: require ph_min < ph_opt < ph_max");
    if (mu_max <= 0 || ka <= 0 || i_k <= 0 || i_km <= 0 || n_form <= 0 || n_m <= 0 ||
        do_max <= 0 || m_do2 <= 0 || area <= 0 || cp <= 0 || rho <= 0)
      throw invalid_parameter("ModelParams: rate/shape parameters must be positive");
  }
};

/// Dissolved-gas and carbonate parameters. Transfer coefficients are affine in
/// wind speed and air flow; defaults are tuned so that DO peaks between 150
/// and 300 % on a sunny day without aeration and a 5 L/min on/off CO2 loop can
/// hold pH near 8.
struct GasParams {
  // O2 transfer, kla = passive(WS) + forced(Q_air)  [s^-1]
  double kla_o2_const = 2.0e-4;
  double kla_o2_wind = 5.0e-5;  ///< per (m/s)
  double kla_o2_air = 1.2e-5;   ///< per (L/min)

  // CO2 transfer  [s^-1]
  double kla_co2_const = 5.0e-5;
  double kla_co2_wind = 1.2e-5; ///< per (m/s)
  double kla_co2_air = 6.0e-6;  ///< per (L/min)

  double y_o2 = 6000.0;   ///< O2 yield [% sat per (g/L) of biomass grown]
  double y_c = 0.035;     ///< carbon uptake [mol C per g biomass]
  double eta_inj = 0.9;   ///< CO2 injection absorption efficiency (0,1]
  double do_dilution = 70.0;  ///< DO of incoming medium [% sat]
  double tic_dilution = 2.0;  ///< TIC of incoming medium [mol/m^3]
  double co2_atm_eq = 0.0139; ///< dissolved CO2 at atmospheric equilibrium [mol/m^3]

  double alkalinity = 2.0; ///< ALK, constant [mol/m^3]
  double k1 = 4.46683592150963e-7;  ///< first carbonate dissociation (10^-6.35) [mol/L]
  double k2 = 4.67735141287198e-11; ///< second carbonate dissociation (10^-10.33) [mol/L]
  double kw = 1.0e-14;              ///< water autoionization [mol^2/L^2]

  void validate() const {
    if (kla_o2_const < 0 || kla_o2_wind < 0 || kla_o2_air < 0 || kla_co2_const < 0 ||
        kla_co2_wind < 0 || kla_co2_air < 0)
      throw invalid_parameter("GasParams: transfer coefficients must be >= 0");
    if (!(eta_inj > 0 && eta_inj <= 1))
      throw invalid_parameter("GasParams: eta_inj must be in (0,1]");
    if (!(k1 > k2 && k2 > 0))
      throw invalid_parameter("GasParams: require k1 > k2 > 0");
  }
};

/// Economic cost-function parameters.
struct CostParams {
  double price_biomass = 9.7;  ///< net selling price [EUR/kg]
  double c_power = 0.086;      ///< electricity price [EUR/kWh]
  double p_blower = 0.0178;    ///< blower consumption [kWh/m^3]
  double p_wheel = 0.1737;     ///< paddle wheel consumption [kWh/m^3]
  double v_linear = 0.2;       ///< linear water speed [m/s]
  double c_nutrient = 0.3125;  ///< nutrient cost [EUR/m^3 of dilution water]
  double c_co2 = 0.44;         ///< CO2 cost [EUR/m^3 of gas]
};

/// Box bounds on the manipulated flows [L/min].
struct FlowBounds {
  double q_air_max = 500.0;
  double q_co2_max = 15.0;
  double q_d_max = 75.0;
  double q_h_max = 75.0;
};

/// EMPC tuning parameters.
struct EmpcConfig {
  double ts = 300.0;        ///< controller period [s]
  int np = 24;              ///< prediction horizon [samples]
  int nc = 6;               ///< control horizon (blocked moves) [samples]
  double w_slack_h = 1.0e4;   ///< level slack weight [EUR/cm^2]
  double w_slack_xb = 1.0e11; ///< terminal biomass slack weight [EUR L^2/g^2]
  double slack_h_min = -1.0;  ///< level slack floor [cm]
  double slack_xb_min = -0.3; ///< biomass slack floor [g/L]
  double activation_irradiance = 100.0; ///< optimizer on/off threshold [W/m^2]
  double h_min_cm = 10.0;     ///< minimum water level [cm]
  double default_flow = 5.0;  ///< initial guess for each flow [L/min]
  FlowBounds bounds;

  void validate() const {
    if (nc < 1 || np < 1 || nc > np)
      throw invalid_parameter("EmpcConfig: require 1 <= nc <= np");
    if (ts <= 0 || activation_irradiance <= 0 || h_min_cm <= 0)
      throw invalid_parameter("EmpcConfig: thresholds must be positive");
  }
};

/// Rule-based standard operation.
struct BenchmarkConfig {
  double dilution_rate = 0.2;    ///< D, fraction of volume harvested per day [day^-1]
  double q_h = 75.0;             ///< harvest pump flow [L/min]
  double q_d = 75.0;             ///< dilution flow when level low [L/min]
  double q_air = 250.0;          ///< constant aeration [L/min]
  double q_co2 = 5.0;            ///< on/off CO2 flow [L/min]
  double level_threshold = 0.10; ///< dilution relay threshold [m]
  double level_hysteresis = 0.005; ///< dilution relay band [m]
  double ph_setpoint = 8.0;
  double ph_band = 0.2;          ///< CO2 relay band, centered on the setpoint
  double harvest_start_hour = 9.0; ///< local time the harvest pump starts

  void validate() const {
    if (dilution_rate < 0.1 || dilution_rate > 0.3)
      throw invalid_parameter("BenchmarkConfig: dilution rate outside [0.1, 0.3]");
  }
};

/// pH PI loop configuration. Defaults follow the SIMC tuning of the nominal
/// first-order pH model, with the operational gain raised to -7.5.
struct PiConfig {
  double kp = -7.5;        ///< proportional gain [L/min per pH unit]
  double ti = 1250.0;      ///< integral time [s]
  double tt_clipping = 1.0;   ///< tracking constant before the setpoint is first reached [s]
  double tt_tracking = 1250.0;///< tracking constant afterwards [s]
  double setpoint = 8.0;
  double out_min = 0.0;    ///< [L/min]
  double out_max = 15.0;   ///< [L/min]
  double meas_delay = 300.0; ///< emulated measurement delay [s]
};

}  // namespace raceway
