// units.hpp — physical constants and unit conversions
//
// Internal canonical units: angular frequency in rad/s (detunings measured
// from each photon's center), time in seconds, wavelength in meters.
// Wavelength-facing helpers accept pm/nm and convert exactly via
// dnu = c * dlambda / lambda^2 (no rounding to "nice" GHz values).

#pragma once

#include <cmath>
#include <numbers>

#include "pairfilt/errors.hpp"

namespace pairfilt {

inline constexpr double kSpeedOfLight = 2.99792458e8; // m/s
inline constexpr double kPi = std::numbers::pi;

// Two-photon visibility thresholds: minimum for secure QKD and for a CHSH
// Bell violation.
inline constexpr double kQkdVisibilityThreshold = 0.78;
inline constexpr double kBellVisibilityThreshold = 0.7071;

inline constexpr const char* kVersion = "0.1.0";

// FWHM <-> standard deviation of a Gaussian curve exp(-x^2 / (2 sigma^2)).
inline double fwhm_to_sigma(double fwhm)
{
    return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

inline double sigma_to_fwhm(double sigma)
{
    return sigma * 2.0 * std::sqrt(2.0 * std::numbers::ln2);
}

// Field-amplitude spectral standard deviation (rad/s) of a transform-limited
// Gaussian pulse whose *intensity* FWHM is tau_ps picoseconds. With this
// convention the intensity FWHM time-bandwidth product is
//   tau * dnu = tau * (sqrt(ln2) * sigma_w / pi) = 2 ln2 / pi ~= 0.441.
inline double pump_sigma_from_fwhm(double tau_ps)
{
    if (!(tau_ps > 0.0)) {
        throw DomainError("pump_sigma_from_fwhm: pulse width must be positive");
    }
    return 2.0 * std::sqrt(std::numbers::ln2) / (tau_ps * 1e-12);
}

// Intensity FWHM (seconds) of the transform-limited pulse for a given
// field-amplitude spectral standard deviation. Inverse of the above.
inline double pump_fwhm_from_sigma(double sigma_rad_s)
{
    if (!(sigma_rad_s > 0.0)) {
        throw DomainError("pump_fwhm_from_sigma: sigma must be positive");
    }
    return 2.0 * std::sqrt(std::numbers::ln2) / sigma_rad_s;
}

inline double wavelength_to_omega(double lambda_m)
{
    if (!(lambda_m > 0.0)) {
        throw DomainError("wavelength_to_omega: wavelength must be positive");
    }
    return 2.0 * kPi * kSpeedOfLight / lambda_m;
}

inline double omega_to_wavelength(double omega_rad_s)
{
    if (!(omega_rad_s > 0.0)) {
        throw DomainError("omega_to_wavelength: frequency must be positive");
    }
    return 2.0 * kPi * kSpeedOfLight / omega_rad_s;
}

// Angular-frequency width (rad/s) of a wavelength interval dlambda at center
// wavelength lambda0. 50 pm at 1536.5 nm -> 2*pi*6.3497 GHz.
inline double delta_lambda_to_delta_omega(double dlambda_m, double lambda0_m)
{
    if (!(lambda0_m > 0.0)) {
        throw DomainError("delta_lambda_to_delta_omega: center wavelength must be positive");
    }
    return 2.0 * kPi * kSpeedOfLight * dlambda_m / (lambda0_m * lambda0_m);
}

inline double delta_omega_to_delta_lambda(double domega_rad_s, double lambda0_m)
{
    return domega_rad_s * lambda0_m * lambda0_m / (2.0 * kPi * kSpeedOfLight);
}

// pm-at-nm convenience forms used by the wavelength-facing API.
inline double omega_fwhm_from_pm(double fwhm_pm, double lambda0_nm)
{
    return delta_lambda_to_delta_omega(fwhm_pm * 1e-12, lambda0_nm * 1e-9);
}

inline double pm_from_omega_fwhm(double fwhm_rad_s, double lambda0_nm)
{
    return delta_omega_to_delta_lambda(fwhm_rad_s, lambda0_nm * 1e-9) * 1e12;
}

inline double dbm_to_mw(double dbm)
{
    return std::pow(10.0, dbm / 10.0);
}

inline double mw_to_dbm(double mw)
{
    if (!(mw > 0.0)) {
        throw DomainError("mw_to_dbm: power must be positive");
    }
    return 10.0 * std::log10(mw);
}

inline double db_to_linear(double db)
{
    return std::pow(10.0, -db / 10.0);
}

} // namespace pairfilt
