// fixtures.hpp — shared source fixtures for the unit and acceptance suites

#pragma once

#include <cmath>
#include <limits>
#include <random>

#include "pairfilt/closed_form.hpp"
#include "pairfilt/source.hpp"
#include "pairfilt/units.hpp"

namespace pairfilt::testing {

inline constexpr double kLambda0Nm = 1536.5;

inline double center_omega()
{
    return wavelength_to_omega(kLambda0Nm * 1e-9);
}

// 50-ps pump, second-quadrant phase-matching angle, pm bandwidth tuned so the
// unfiltered marginal intensity sigma is 1e11 rad/s (a compact anti-diagonal
// ridge about three pump bandwidths long). Heralding efficiencies then drop
// visibly between 300-pm and 50-pm filtering, which is the regime the
// filtering studies live in.
inline SourceSpec ridge_source(double mu_total = 1.0)
{
    const double pump_sigma = pump_sigma_from_fwhm(50.0);
    const double theta = 2.5;
    const double target = 1e11;

    double lo = 1e9, hi = 1e13;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        const auto k = coeffs(SourceSpec::from_pump_sigma(pump_sigma, mid, theta, 1.0,
                                                          center_omega(), center_omega()),
                              std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity());
        // marginal sigma grows with pm bandwidth
        (marginal_sigma_s(k) < target ? lo : hi) = mid;
    }
    return SourceSpec::from_pump_sigma(pump_sigma, std::sqrt(lo * hi), theta, mu_total,
                                       center_omega(), center_omega());
}

struct GaussianDraw {
    SourceSpec source;
    double sigma_s = 0.0; // closed-form filter sigmas, rad/s
    double sigma_i = 0.0;
};

// Random source/filter combinations with bounded dynamic range so the default
// 512-point grid resolves every feature: draws whose ridge is much longer
// than its cross-section (marginal/conditional width ratio above 12, which
// happens near pi/4 where the Gaussian-substituted spectrum degenerates) are
// rejected and redrawn.
inline GaussianDraw draw_gaussian_case(std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const double pump_sigma = 1e10 * std::pow(10.0, u(rng)); // 1e10 .. 1e11
        const double pm_sigma = 1e10 * std::pow(20.0, u(rng));   // 1e10 .. 2e11
        const double theta = u(rng) * kPi;
        SourceSpec src = SourceSpec::from_pump_sigma(pump_sigma, pm_sigma, theta, 1.0,
                                                     center_omega(), center_omega());
        GaussianCoeffs k;
        double ms = 0.0, mi = 0.0;
        try {
            k = coeffs(src, std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity());
            ms = marginal_sigma_s(k);
            mi = marginal_sigma_i(k);
        } catch (const InvalidGaussianError&) {
            continue;
        }
        if (ms * std::sqrt(2.0 * k.a0) > 12.0 || mi * std::sqrt(2.0 * k.b0) > 12.0) {
            continue;
        }
        GaussianDraw d;
        d.source = src;
        d.sigma_s = ms * (0.3 + 2.7 * u(rng));
        d.sigma_i = mi * (0.3 + 2.7 * u(rng));
        return d;
    }
    throw Error("draw_gaussian_case: rejection sampling failed");
}

} // namespace pairfilt::testing
