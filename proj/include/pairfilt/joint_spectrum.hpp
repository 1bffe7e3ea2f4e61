// joint_spectrum.hpp — discretized joint spectral amplitude
//
// build_jsa samples f(ds, di) = N * pump(ds + di) * pm(ds sin(theta) + di cos(theta))
// on a uniform 2D grid and renormalizes so the discrete integral of |f|^2 is
// exactly 1. The phase-matching factor is either
//
//   sinc form:     pm(x) = sinc(sqrt(alpha/2) * x / pm_sigma)
//   gaussian form: pm(x) = exp(-alpha^2 x^2 / (2 pm_sigma^2))
//
// where the Gaussian is the FWHM-matched substitute of the sinc
// (sinc(y) ~= exp(-alpha y^2), alpha = 0.193). The sinc argument is scaled so
// both forms share the same pm_sigma, which makes the gaussian form's
// quadrature agree exactly with the closed-form coefficients.

#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "pairfilt/closed_form.hpp"
#include "pairfilt/errors.hpp"
#include "pairfilt/source.hpp"
#include "pairfilt/units.hpp"

namespace pairfilt {

enum class PhaseMatchForm {
    sinc,     // direct sinc integration (side lobes included)
    gaussian, // FWHM-matched Gaussian substitute, for closed-form comparisons
};

struct GridSpec {
    int points_s = 512;
    int points_i = 512;
    double half_span_s = 0.0; // rad/s around center_s; 0 requests auto sizing
    double half_span_i = 0.0; // rad/s around center_i; 0 requests auto sizing
    double truncation = 5.0;  // half span in units of the marginal sigma
    int min_points_per_feature = 8; // across the narrowest conditional FWHM
    int max_points = 4096;
};

struct JointSpectrum {
    std::vector<double> grid_s; // absolute rad/s, uniform
    std::vector<double> grid_i;
    std::vector<double> amplitude; // row-major [is * ni + ii], real
    double step_s = 0.0;
    double step_i = 0.0;
    double cell_area = 0.0;   // step_s * step_i
    double norm_check = 0.0;  // discrete integral of |f|^2 before renormalization
    double center_s = 0.0;
    double center_i = 0.0;

    int ns() const { return static_cast<int>(grid_s.size()); }
    int ni() const { return static_cast<int>(grid_i.size()); }
    double at(int is, int ii) const { return amplitude[static_cast<std::size_t>(is) * grid_i.size() + ii]; }
    double& at(int is, int ii) { return amplitude[static_cast<std::size_t>(is) * grid_i.size() + ii]; }
};

namespace detail {

inline double sinc(double y)
{
    if (y == 0.0) return 1.0;
    return std::sin(y) / y;
}

// Spans and feature widths from the Gaussian-equivalent quadratic form.
// Spans require a normalizable marginal; the conditional feature widths come
// from the diagonal coefficients alone and are always available.
struct GridGeometry {
    double span_s = 0.0, span_i = 0.0; // half spans, rad/s; 0 when unavailable
    double feature_s, feature_i;       // conditional intensity FWHM, rad/s
};

inline GridGeometry grid_geometry(const SourceSpec& src, PhaseMatchForm form, double truncation)
{
    const GaussianCoeffs k = raw_coeffs(src, std::numeric_limits<double>::infinity(),
                                        std::numeric_limits<double>::infinity());
    GridGeometry g;
    g.feature_s = sigma_to_fwhm(1.0 / std::sqrt(2.0 * k.a0));
    g.feature_i = sigma_to_fwhm(1.0 / std::sqrt(2.0 * k.b0));
    if (k.a0 * k.b0 - k.c * k.c > 1e-9 * k.a0 * k.b0) {
        // The sinc's side lobes extend well past the matched Gaussian.
        const double lobe = form == PhaseMatchForm::sinc ? 2.0 : 1.0;
        g.span_s = truncation * marginal_sigma_s(k) * lobe;
        g.span_i = truncation * marginal_sigma_i(k) * lobe;
    }
    return g;
}

} // namespace detail

inline JointSpectrum build_jsa(const SourceSpec& src, const GridSpec& grid = {},
                               PhaseMatchForm form = PhaseMatchForm::sinc)
{
    src.validate();
    if (grid.points_s < 2 || grid.points_i < 2) {
        throw DomainError("build_jsa: need at least 2 points per axis");
    }
    if (grid.points_s > grid.max_points || grid.points_i > grid.max_points) {
        throw ResolutionError("build_jsa: requested grid exceeds max_points");
    }

    double span_s = grid.half_span_s;
    double span_i = grid.half_span_i;
    double feature_s = 0.0, feature_i = 0.0;
    {
        const auto g = detail::grid_geometry(src, form, grid.truncation);
        if (span_s <= 0.0) span_s = g.span_s;
        if (span_i <= 0.0) span_i = g.span_i;
        feature_s = g.feature_s;
        feature_i = g.feature_i;
        if (span_s <= 0.0 || span_i <= 0.0) {
            throw ResolutionError(
                "grid span cannot be auto-sized: unfiltered spectrum has an unbounded ridge "
                "(pm_angle at or near pi/4); set half_span_s/half_span_i explicitly");
        }
    }

    JointSpectrum jsa;
    jsa.center_s = src.center_s;
    jsa.center_i = src.center_i;
    jsa.step_s = 2.0 * span_s / grid.points_s;
    jsa.step_i = 2.0 * span_i / grid.points_i;
    jsa.cell_area = jsa.step_s * jsa.step_i;

    if (feature_s / jsa.step_s < grid.min_points_per_feature ||
        feature_i / jsa.step_i < grid.min_points_per_feature) {
        throw ResolutionError("build_jsa: grid too coarse for the narrowest spectral feature; "
                              "increase points or reduce the span");
    }

    // Midpoint-rule abscissae.
    jsa.grid_s.resize(grid.points_s);
    jsa.grid_i.resize(grid.points_i);
    for (int k = 0; k < grid.points_s; ++k) {
        jsa.grid_s[k] = src.center_s - span_s + (k + 0.5) * jsa.step_s;
    }
    for (int k = 0; k < grid.points_i; ++k) {
        jsa.grid_i[k] = src.center_i - span_i + (k + 0.5) * jsa.step_i;
    }

    const double sin_t = std::sin(src.pm_angle);
    const double cos_t = std::cos(src.pm_angle);
    const double inv_2sp2 = 1.0 / (2.0 * src.pump_sigma * src.pump_sigma);
    const double sinc_scale = std::sqrt(kSincGaussAlpha / 2.0) / src.pm_sigma;
    const double gauss_scale =
        kSincGaussAlpha * kSincGaussAlpha / (2.0 * src.pm_sigma * src.pm_sigma);

    jsa.amplitude.resize(static_cast<std::size_t>(grid.points_s) * grid.points_i);
    double norm = 0.0;
    for (int is = 0; is < grid.points_s; ++is) {
        const double ds = jsa.grid_s[is] - src.center_s;
        for (int ii = 0; ii < grid.points_i; ++ii) {
            const double di = jsa.grid_i[ii] - src.center_i;
            const double nu = ds + di;
            const double x = ds * sin_t + di * cos_t;
            const double pump = std::exp(-nu * nu * inv_2sp2);
            const double pm = form == PhaseMatchForm::sinc
                                  ? detail::sinc(sinc_scale * x)
                                  : std::exp(-gauss_scale * x * x);
            const double f = pump * pm;
            jsa.at(is, ii) = f;
            norm += f * f;
        }
    }
    norm *= jsa.cell_area;
    if (!std::isfinite(norm) || !(norm > 0.0)) {
        throw DomainError("build_jsa: non-finite or vanishing amplitude");
    }
    jsa.norm_check = norm;
    const double scale = 1.0 / std::sqrt(norm);
    for (double& v : jsa.amplitude) {
        v *= scale;
    }
    return jsa;
}

// CSV matrix of the joint spectral intensity with wavelength axis headers
// (nm). First column: signal wavelength; header row: idler wavelength.
inline void write_jsi_csv(const JointSpectrum& jsa, std::ostream& out)
{
    char buf[32];
    out << "# joint spectral intensity |f(w_s, w_i)|^2\n";
    out << "# rows: signal wavelength (nm); columns: idler wavelength (nm)\n";
    out << "lambda_s_nm";
    for (int ii = 0; ii < jsa.ni(); ++ii) {
        std::snprintf(buf, sizeof buf, "%.9f", omega_to_wavelength(jsa.grid_i[ii]) * 1e9);
        out << ',' << buf;
    }
    out << '\n';
    for (int is = 0; is < jsa.ns(); ++is) {
        std::snprintf(buf, sizeof buf, "%.9f", omega_to_wavelength(jsa.grid_s[is]) * 1e9);
        out << buf;
        for (int ii = 0; ii < jsa.ni(); ++ii) {
            const double v = jsa.at(is, ii);
            std::snprintf(buf, sizeof buf, "%.10e", v * v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

} // namespace pairfilt
