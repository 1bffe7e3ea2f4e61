// source.hpp — photon-pair source description

#pragma once

#include <cmath>

#include "pairfilt/errors.hpp"
#include "pairfilt/units.hpp"

namespace pairfilt {

// Pulsed SPDC/SFWM pair source. The joint spectral amplitude is
//
//   f(ds, di) = N * exp(-(ds + di)^2 / (2 sigma_p^2)) * pm(ds sin(theta) + di cos(theta))
//
// with ds/di the signal/idler detunings from center_s/center_i, sigma_p the
// pump field-amplitude spectral standard deviation, and pm either a sinc or
// its FWHM-matched Gaussian substitute with width set by pm_sigma (see
// joint_spectrum.hpp and closed_form.hpp, which share this convention).
struct SourceSpec {
    double pump_sigma = 0.0; // rad/s, field-amplitude std of the pump spectrum
    double pm_sigma = 0.0;   // rad/s, phase-matching bandwidth parameter
    double pm_angle = 0.0;   // rad, phase-matching angle in [0, pi)
    double mu_total = 0.0;   // mean pairs per pulse across the unfiltered JSI
    double center_s = 0.0;   // rad/s, absolute signal center
    double center_i = 0.0;   // rad/s, absolute idler center

    static SourceSpec from_pump_sigma(double pump_sigma, double pm_sigma, double pm_angle,
                                      double mu_total, double center_s, double center_i)
    {
        SourceSpec s;
        s.pump_sigma = pump_sigma;
        s.pm_sigma = pm_sigma;
        s.pm_angle = pm_angle;
        s.mu_total = mu_total;
        s.center_s = center_s;
        s.center_i = center_i;
        s.validate();
        return s;
    }

    // tau_ps is the pump's intensity FWHM in picoseconds.
    static SourceSpec from_pump_fwhm(double tau_ps, double pm_sigma, double pm_angle,
                                     double mu_total, double center_s, double center_i)
    {
        return from_pump_sigma(pump_sigma_from_fwhm(tau_ps), pm_sigma, pm_angle, mu_total,
                               center_s, center_i);
    }

    void validate() const
    {
        if (!(pump_sigma > 0.0)) {
            throw DomainError("SourceSpec: pump_sigma must be positive");
        }
        if (!(pm_sigma > 0.0)) {
            throw DomainError("SourceSpec: pm_sigma must be positive");
        }
        if (!(pm_angle >= 0.0 && pm_angle < kPi)) {
            throw DomainError("SourceSpec: pm_angle must lie in [0, pi)");
        }
        if (!(mu_total >= 0.0)) {
            throw DomainError("SourceSpec: mu_total must be non-negative");
        }
    }

    double pump_fwhm_ps() const
    {
        return pump_fwhm_from_sigma(pump_sigma) * 1e12;
    }
};

} // namespace pairfilt
