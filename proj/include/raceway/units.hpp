#pragma once

// Unit conversion constants. All rate parameters are stored in the units the
// plant literature uses (day^-1, L/min, cm) and converted at the RHS boundary.

namespace raceway {

inline constexpr double seconds_per_day = 86400.0;

/// L/min -> m^3/s
inline constexpr double lpm_to_m3s = 1.0 / 60000.0;

/// day^-1 -> s^-1
inline constexpr double per_day_to_per_s = 1.0 / seconds_per_day;

/// g/L -> g/m^3 (equivalently kg/m^3 stays numerically equal to g/L)
inline constexpr double gpl_to_gpm3 = 1000.0;

inline constexpr double celsius_to_kelvin = 273.15;

/// Ideal-gas molar volume at 0 degC, 1 atm [L/mol]
inline constexpr double molar_volume_stp_l = 22.414;

/// Stefan-Boltzmann constant [W m^-2 K^-4]
inline constexpr double stefan_boltzmann = 5.670374419e-8;

}  // namespace raceway
