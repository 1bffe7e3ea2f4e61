// closed_form.hpp — analytic Gaussian model for filtered pair spectra
//
// Approximating the phase-matching sinc by a Gaussian of equal FWHM,
// sinc(y) ~= exp(-alpha y^2) with alpha = 0.193, the joint spectral
// amplitude becomes exp(-Q/2) with quadratic form
//
//   Q = a ds^2 + b di^2 + 2 c ds di,
//
// where Gaussian amplitude filters exp(-d^2 / (2 sigma_j^2)) add 1/sigma_j^2
// to the corresponding diagonal coefficient. Pass fractions, heralding
// efficiencies and the heralded single-photon purity then follow in closed
// form from 2D Gaussian integrals. These expressions are exact for the
// substituted Gaussian spectrum; quadrature on that spectrum must reproduce
// them to quadrature accuracy.

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "pairfilt/errors.hpp"
#include "pairfilt/filter.hpp"
#include "pairfilt/source.hpp"
#include "pairfilt/units.hpp"

namespace pairfilt {

// sinc(y) ~= exp(-alpha y^2) matched at the half maximum.
inline constexpr double kSincGaussAlpha = 0.193;

struct GaussianCoeffs {
    // Units of 1/(rad/s)^2. a0/b0 are a/b with the corresponding filter
    // removed (sigma -> infinity).
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double a0 = 0.0;
    double b0 = 0.0;

    void validate() const
    {
        if (!(a > 0.0 && b > 0.0 && a0 > 0.0 && b0 > 0.0)) {
            throw InvalidGaussianError("GaussianCoeffs: diagonal coefficients must be positive");
        }
        if (!(a >= a0 && b >= b0)) {
            throw InvalidGaussianError("GaussianCoeffs: filtered coefficients cannot fall below unfiltered");
        }
        // The unfiltered determinant vanishes analytically only at
        // pm_angle = pi/4 (unbounded ridge); near that point the subtraction
        // cancels to rounding noise, so only a clearly negative value is
        // rejected here. Consumers that need det0 > 0 check it themselves.
        if (a0 * b0 - c * c < -1e-12 * a0 * b0) {
            throw InvalidGaussianError("GaussianCoeffs: unfiltered spectrum is not normalizable");
        }
        if (!(a * b - c * c > 0.0)) {
            throw InvalidGaussianError("GaussianCoeffs: a*b - c^2 must be positive");
        }
    }
};

struct ClosedFormReport {
    double gamma_both = 0.0; // mu_both / mu_total
    double gamma_s = 0.0;    // mu_s / mu_total
    double gamma_i = 0.0;    // mu_i / mu_total
    double delta_s = 0.0;    // mu_both / mu_i
    double delta_i = 0.0;    // mu_both / mu_s
    double delta_ps = 0.0;   // sqrt(delta_s * delta_i)
    double purity = 0.0;     // heralded single-photon purity, filtered coefficients
    double purity_unfiltered = 0.0; // same with filters removed, for reference
};

namespace detail {

// Coefficient formulas without the normalizability checks; grid sizing needs
// the diagonal widths even where the full Gaussian model degenerates.
inline GaussianCoeffs raw_coeffs(const SourceSpec& src, double sigma_s, double sigma_i)
{
    src.validate();
    if (!(sigma_s > 0.0) || !(sigma_i > 0.0)) {
        throw DomainError("coeffs: filter sigmas must be positive (may be infinite)");
    }
    const double alpha2 = kSincGaussAlpha * kSincGaussAlpha;
    const double pm2 = src.pm_sigma * src.pm_sigma;
    const double sin_t = std::sin(src.pm_angle);
    const double cos_t = std::cos(src.pm_angle);
    const double pump = 1.0 / (src.pump_sigma * src.pump_sigma);

    GaussianCoeffs k;
    k.a0 = alpha2 * sin_t * sin_t / pm2 + pump;
    k.b0 = alpha2 * cos_t * cos_t / pm2 + pump;
    k.c = alpha2 * sin_t * cos_t / pm2 + pump;
    k.a = k.a0 + (std::isinf(sigma_s) ? 0.0 : 1.0 / (sigma_s * sigma_s));
    k.b = k.b0 + (std::isinf(sigma_i) ? 0.0 : 1.0 / (sigma_i * sigma_i));
    return k;
}

} // namespace detail

// Quadratic-form coefficients for a source with Gaussian amplitude filters
// of standard deviation sigma_s / sigma_i. Pass +infinity for an unfiltered
// marginal; the 1/sigma^2 term is then dropped rather than evaluated.
inline GaussianCoeffs coeffs(const SourceSpec& src, double sigma_s, double sigma_i)
{
    GaussianCoeffs k = detail::raw_coeffs(src, sigma_s, sigma_i);
    k.validate();
    return k;
}

inline ClosedFormReport closed_form_report(const GaussianCoeffs& k)
{
    const double det = k.a * k.b - k.c * k.c;
    if (!(det > 0.0)) {
        throw InvalidGaussianError("closed_form_report: filtered Gaussian is not normalizable");
    }
    // det0 is analytically >= 0 and vanishes only for a perfectly
    // anti-correlated (non-normalizable) unfiltered spectrum; clamp
    // floating-point noise.
    const double det0 = std::max(k.a0 * k.b0 - k.c * k.c, 0.0);
    const double det_s = k.a * k.b0 - k.c * k.c;  // idler filter removed
    const double det_i = k.a0 * k.b - k.c * k.c;  // signal filter removed

    ClosedFormReport r;
    r.gamma_both = std::sqrt(det0 / det);
    r.gamma_s = std::sqrt(det0 / det_s);
    r.gamma_i = std::sqrt(det0 / det_i);
    r.delta_s = std::sqrt(det_i / det);
    r.delta_i = std::sqrt(det_s / det);
    r.delta_ps = std::sqrt(r.delta_s * r.delta_i);
    r.purity = std::sqrt(det / (k.a * k.b));
    r.purity_unfiltered = std::sqrt(det0 / (k.a0 * k.b0));
    return r;
}

// Gaussian sigma equivalent to a FilterSpec, for routing parametric filters
// into the closed form. Flat-top and tabulated shapes have no closed form
// and are rejected; quadrature handles them.
inline double closed_form_sigma(const FilterSpec& f)
{
    switch (f.shape) {
    case FilterShape::gaussian:
        return fwhm_to_sigma(f.fwhm);
    case FilterShape::all_pass:
        return std::numeric_limits<double>::infinity();
    default:
        throw DomainError("closed form is defined for gaussian or all-pass filters only");
    }
}

inline ClosedFormReport closed_form_for(const SourceSpec& src, const FilterSpec& fs,
                                        const FilterSpec& fi)
{
    return closed_form_report(coeffs(src, closed_form_sigma(fs), closed_form_sigma(fi)));
}

// Intensity-marginal standard deviations (rad/s) of the unfiltered spectrum;
// used for grid sizing and as a quadrature cross-check.
inline double marginal_sigma_s(const GaussianCoeffs& k)
{
    const double det0 = k.a0 * k.b0 - k.c * k.c;
    if (!(det0 > 0.0)) {
        throw InvalidGaussianError("marginal_sigma_s: unfiltered spectrum is not normalizable");
    }
    return std::sqrt(k.b0 / (2.0 * det0));
}

inline double marginal_sigma_i(const GaussianCoeffs& k)
{
    const double det0 = k.a0 * k.b0 - k.c * k.c;
    if (!(det0 > 0.0)) {
        throw InvalidGaussianError("marginal_sigma_i: unfiltered spectrum is not normalizable");
    }
    return std::sqrt(k.a0 / (2.0 * det0));
}

struct FheCurvePoint {
    double delta_lambda_pm = 0.0;
    double delta_s = 0.0;
    double delta_i = 0.0;
    double delta_ps = 0.0;
    double purity = 0.0;
};

// Heralding efficiency and purity versus symmetric Gaussian filter bandwidth,
// bandwidths given in pm at the source's signal/idler center wavelengths.
inline std::vector<FheCurvePoint> fhe_vs_bandwidth_curve(const SourceSpec& src,
                                                         const std::vector<double>& fwhm_pm,
                                                         FilterShape shape = FilterShape::gaussian)
{
    if (shape != FilterShape::gaussian) {
        throw DomainError("fhe_vs_bandwidth_curve: closed form supports gaussian filters only");
    }
    if (fwhm_pm.empty()) {
        throw DomainError("fhe_vs_bandwidth_curve: bandwidth list is empty");
    }
    const double lambda_s_nm = omega_to_wavelength(src.center_s) * 1e9;
    const double lambda_i_nm = omega_to_wavelength(src.center_i) * 1e9;

    std::vector<FheCurvePoint> curve;
    curve.reserve(fwhm_pm.size());
    for (double pm : fwhm_pm) {
        const double sig_s = fwhm_to_sigma(omega_fwhm_from_pm(pm, lambda_s_nm));
        const double sig_i = fwhm_to_sigma(omega_fwhm_from_pm(pm, lambda_i_nm));
        const auto rep = closed_form_report(coeffs(src, sig_s, sig_i));
        curve.push_back({pm, rep.delta_s, rep.delta_i, rep.delta_ps, rep.purity});
    }
    return curve;
}

} // namespace pairfilt
