// spectral.hpp — quadrature metrics on a discretized joint spectrum
//
// filtered_means integrates |f g_s|^2, |f g_i|^2 and |f g_s g_i|^2 by the
// midpoint rule to obtain the photon-number means within the filter
// passbands; schmidt_purity takes the SVD route to the heralded single-photon
// purity; photon_pump_width_ratio Fourier-transforms the filtered amplitude
// to estimate the photon's temporal envelope against the pump's.

#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "pairfilt/errors.hpp"
#include "pairfilt/filter.hpp"
#include "pairfilt/joint_spectrum.hpp"
#include "pairfilt/source.hpp"

namespace pairfilt {

struct MuTriple {
    double mu_s = 0.0;
    double mu_i = 0.0;
    double mu_both = 0.0;
    // Undefined (not 0/0) when the corresponding singles mean vanishes.
    std::optional<double> delta_s;  // mu_both / mu_i
    std::optional<double> delta_i;  // mu_both / mu_s
    std::optional<double> delta_ps; // sqrt(delta_s * delta_i)
    bool converged = true;
    double convergence_rel = 0.0; // relative shift under 2x grid coarsening
};

inline MuTriple make_mu_triple(double mu_s, double mu_i, double mu_both)
{
    if (!(mu_s >= 0.0 && mu_i >= 0.0 && mu_both >= 0.0)) {
        throw DomainError("make_mu_triple: photon-number means must be non-negative");
    }
    const double slack = 1.0 + 1e-12;
    if (mu_both > std::min(mu_s, mu_i) * slack) {
        throw DomainError("make_mu_triple: mu_both cannot exceed min(mu_s, mu_i)");
    }
    MuTriple m;
    m.mu_s = mu_s;
    m.mu_i = mu_i;
    m.mu_both = mu_both;
    if (mu_i > 0.0) m.delta_s = mu_both / mu_i;
    if (mu_s > 0.0) m.delta_i = mu_both / mu_s;
    if (m.delta_s && m.delta_i) m.delta_ps = std::sqrt(*m.delta_s * *m.delta_i);
    return m;
}

namespace detail {

struct PassFractions {
    double gamma_s = 0.0, gamma_i = 0.0, gamma_both = 0.0;
};

// stride = 1 sums the full grid; stride = 2 sums every other cell, which is
// a midpoint estimate at half the resolution for the convergence check.
inline PassFractions pass_fractions(const JointSpectrum& jsa, const std::vector<double>& ts,
                                    const std::vector<double>& ti, int stride)
{
    double sum_f = 0.0, sum_s = 0.0, sum_i = 0.0, sum_b = 0.0;
    const int ns = jsa.ns(), ni = jsa.ni();
    for (int is = stride / 2; is < ns; is += stride) {
        const double* row = &jsa.amplitude[static_cast<std::size_t>(is) * ni];
        const double gs2 = ts[is] * ts[is];
        for (int ii = stride / 2; ii < ni; ii += stride) {
            const double f2 = row[ii] * row[ii];
            const double gi2 = ti[ii] * ti[ii];
            sum_f += f2;
            sum_s += f2 * gs2;
            sum_i += f2 * gi2;
            sum_b += f2 * gs2 * gi2;
        }
    }
    if (!(sum_f > 0.0)) {
        throw DegenerateInputError("pass_fractions: joint spectrum vanishes on the grid");
    }
    PassFractions g;
    g.gamma_s = sum_s / sum_f;
    g.gamma_i = sum_i / sum_f;
    g.gamma_both = sum_b / sum_f;
    return g;
}

inline std::vector<double> sample_amplitude_transmission(const FilterSpec& f,
                                                         const std::vector<double>& grid,
                                                         const char* arm)
{
    std::vector<double> t(grid.size());
    double peak = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        t[k] = f.amplitude_transmission(grid[k]);
        peak = std::max(peak, t[k]);
    }
    if (!(peak > 0.0)) {
        throw CoverageError(std::string("filtered_means: ") + arm +
                            " filter passband lies entirely outside the grid");
    }
    return t;
}

} // namespace detail

inline MuTriple filtered_means(const JointSpectrum& jsa, const FilterSpec& f_s,
                               const FilterSpec& f_i, double mu_total,
                               double convergence_tol = 1e-3)
{
    if (!(mu_total >= 0.0)) {
        throw DomainError("filtered_means: mu_total must be non-negative");
    }
    const auto ts = detail::sample_amplitude_transmission(f_s, jsa.grid_s, "signal");
    const auto ti = detail::sample_amplitude_transmission(f_i, jsa.grid_i, "idler");

    const auto full = detail::pass_fractions(jsa, ts, ti, 1);
    MuTriple m = make_mu_triple(mu_total * full.gamma_s, mu_total * full.gamma_i,
                                mu_total * full.gamma_both);

    const auto half = detail::pass_fractions(jsa, ts, ti, 2);
    double rel = 0.0;
    const double pairs[3][2] = {{full.gamma_s, half.gamma_s},
                                {full.gamma_i, half.gamma_i},
                                {full.gamma_both, half.gamma_both}};
    for (const auto& p : pairs) {
        if (p[0] > 0.0) rel = std::max(rel, std::abs(p[0] - p[1]) / p[0]);
    }
    m.convergence_rel = rel;
    m.converged = rel < convergence_tol;
    return m;
}

// Heralded single-photon purity by Schmidt decomposition of the filtered
// amplitude: purity = sum(s_k^4) / (sum(s_k^2))^2 over singular values s_k.
// The grid measure cancels in the ratio.
inline double schmidt_purity(const JointSpectrum& jsa, const FilterSpec& f_s,
                             const FilterSpec& f_i)
{
    const auto ts = detail::sample_amplitude_transmission(f_s, jsa.grid_s, "signal");
    const auto ti = detail::sample_amplitude_transmission(f_i, jsa.grid_i, "idler");

    const int ns = jsa.ns(), ni = jsa.ni();
    Eigen::MatrixXd m(ns, ni);
    double peak = 0.0;
    for (int is = 0; is < ns; ++is) {
        for (int ii = 0; ii < ni; ++ii) {
            const double v = jsa.at(is, ii) * ts[is] * ti[ii];
            m(is, ii) = v;
            peak = std::max(peak, std::abs(v));
        }
    }
    if (!(peak > 0.0)) {
        throw DegenerateInputError("schmidt_purity: filtered amplitude is identically zero");
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    double sum2 = 0.0, sum4 = 0.0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        const double s2 = sv[k] * sv[k];
        sum2 += s2;
        sum4 += s2 * s2;
    }
    return sum4 / (sum2 * sum2);
}

// Marginal intensity along the signal axis after filtering (integrated over
// the idler axis). Used by tests and by the temporal-width estimate.
inline std::vector<double> marginal_intensity_s(const JointSpectrum& jsa,
                                                const FilterSpec& f_s = FilterSpec::make_all_pass(),
                                                const FilterSpec& f_i = FilterSpec::make_all_pass())
{
    const auto ts = detail::sample_amplitude_transmission(f_s, jsa.grid_s, "signal");
    const auto ti = detail::sample_amplitude_transmission(f_i, jsa.grid_i, "idler");
    std::vector<double> out(jsa.grid_s.size(), 0.0);
    const int ns = jsa.ns(), ni = jsa.ni();
    for (int is = 0; is < ns; ++is) {
        const double* row = &jsa.amplitude[static_cast<std::size_t>(is) * ni];
        double acc = 0.0;
        for (int ii = 0; ii < ni; ++ii) {
            const double v = row[ii] * ts[is] * ti[ii];
            acc += v * v;
        }
        out[is] = acc * jsa.step_i;
    }
    return out;
}

inline double second_moment_sigma(const std::vector<double>& axis,
                                  const std::vector<double>& weights, double center)
{
    double w = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < axis.size(); ++k) {
        const double d = axis[k] - center;
        w += weights[k];
        m2 += weights[k] * d * d;
    }
    if (!(w > 0.0)) {
        throw DegenerateInputError("second_moment_sigma: zero total weight");
    }
    return std::sqrt(m2 / w);
}

namespace detail {

// FWHM of a sampled curve by linear interpolation of the half-max crossings.
inline std::optional<double> sampled_fwhm(const std::vector<double>& axis,
                                          const std::vector<double>& values)
{
    std::size_t imax = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] > values[imax]) imax = k;
    }
    const double half = values[imax] / 2.0;
    if (imax == 0 || imax + 1 == values.size()) return std::nullopt;

    double left = axis.front(), right = axis.back();
    bool found_left = false, found_right = false;
    for (std::size_t k = imax; k-- > 0;) {
        if (values[k] <= half) {
            const double w = (half - values[k]) / (values[k + 1] - values[k]);
            left = axis[k] + w * (axis[k + 1] - axis[k]);
            found_left = true;
            break;
        }
    }
    for (std::size_t k = imax + 1; k < values.size(); ++k) {
        if (values[k] <= half) {
            const double w = (values[k - 1] - half) / (values[k - 1] - values[k]);
            right = axis[k - 1] + w * (axis[k] - axis[k - 1]);
            found_right = true;
            break;
        }
    }
    if (!found_left || !found_right) return std::nullopt;
    return right - left;
}

} // namespace detail

// Ratio of the filtered photon's temporal intensity FWHM to the pump's.
// The arrival-time envelope is the time marginal of the transformed filtered
// amplitude: I(t) = integral d_i |integral d_s Phi(d_s, d_i) e^{-i d_s t}|^2.
inline double photon_pump_width_ratio(const SourceSpec& src, const FilterSpec& f,
                                      PhaseMatchForm form = PhaseMatchForm::sinc,
                                      const GridSpec& grid = {})
{
    const JointSpectrum jsa = build_jsa(src, grid, form);
    const auto ts = detail::sample_amplitude_transmission(f, jsa.grid_s, "signal");

    const int ns = jsa.ns(), ni = jsa.ni();
    Eigen::MatrixXd phi(ni, ns); // transposed: columns indexed by signal bin
    for (int is = 0; is < ns; ++is) {
        for (int ii = 0; ii < ni; ++ii) {
            phi(ii, is) = jsa.at(is, ii) * ts[is];
        }
    }

    const double tau_pump = pump_fwhm_from_sigma(src.pump_sigma);
    // Filter impulse-response scale from the second moment of the sampled
    // amplitude transmission (covers parametric and tabulated shapes alike).
    std::vector<double> t2(ns);
    for (int is = 0; is < ns; ++is) t2[is] = ts[is] * ts[is];
    const double sigma_eff = second_moment_sigma(jsa.grid_s, t2, src.center_s);
    const double tau_filter = 2.0 * std::sqrt(std::numbers::ln2) / std::max(sigma_eff, 1e-30);

    Eigen::VectorXd cos_v(ns), sin_v(ns);
    double span = 3.0 * (tau_pump + tau_filter);
    for (int attempt = 0; attempt < 3; ++attempt) {
        const int nt = 601;
        std::vector<double> t_axis(nt), envelope(nt);
        for (int k = 0; k < nt; ++k) {
            const double t = -span + 2.0 * span * k / (nt - 1);
            t_axis[k] = t;
            for (int is = 0; is < ns; ++is) {
                const double ph = (jsa.grid_s[is] - src.center_s) * t;
                cos_v[is] = std::cos(ph);
                sin_v[is] = std::sin(ph);
            }
            envelope[k] = (phi * cos_v).squaredNorm() + (phi * sin_v).squaredNorm();
        }
        if (const auto fwhm = detail::sampled_fwhm(t_axis, envelope)) {
            return *fwhm / tau_pump;
        }
        span *= 3.0;
    }
    throw DegenerateInputError("photon_pump_width_ratio: temporal envelope FWHM not bracketed");
}

// Grid sized so both the source's spectral features and the filter passbands
// are resolved; used by the scenario runner before quadrature.
inline GridSpec grid_for(const SourceSpec& src, PhaseMatchForm form, const FilterSpec& f_s,
                         const FilterSpec& f_i, const GridSpec& base = {})
{
    const auto g = detail::grid_geometry(src, form, base.truncation);
    GridSpec out = base;
    out.half_span_s = base.half_span_s > 0.0 ? base.half_span_s : g.span_s;
    out.half_span_i = base.half_span_i > 0.0 ? base.half_span_i : g.span_i;
    if (out.half_span_s <= 0.0 || out.half_span_i <= 0.0) {
        throw ResolutionError("grid_for: spectrum has an unbounded ridge; "
                              "set half_span_s/half_span_i explicitly");
    }

    const auto narrow = [](double feature, const FilterSpec& f) {
        if (f.shape == FilterShape::gaussian || f.shape == FilterShape::flat_top) {
            return std::min(feature, f.fwhm);
        }
        if (f.shape == FilterShape::tabulated) {
            return std::min(feature, (f.table.back().first - f.table.front().first) / 2.0);
        }
        return feature;
    };
    const double feat_s = narrow(g.feature_s, f_s);
    const double feat_i = narrow(g.feature_i, f_i);

    const auto needed = [&](double span, double feature, int base_points) {
        const double step = feature / base.min_points_per_feature;
        int n = static_cast<int>(std::ceil(2.0 * span / step));
        n = std::max(n, base_points);
        if (n % 2) ++n;
        if (n > base.max_points) {
            throw ResolutionError("grid_for: resolving the filter against the source spectrum "
                                  "needs more than max_points per axis");
        }
        return n;
    };
    out.points_s = needed(out.half_span_s, feat_s, base.points_s);
    out.points_i = needed(out.half_span_i, feat_i, base.points_i);
    return out;
}

} // namespace pairfilt
