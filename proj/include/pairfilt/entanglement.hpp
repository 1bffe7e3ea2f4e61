// entanglement.hpp — two-photon visibility models in noisy channels
//
// Time-bin qubits measured with 1-bit-delay interferometers: the X/Y fringe
// lives in the middle arrival bin (coincidence prefactor 1/4, singles 1/2,
// background halved by the interferometer), the Z basis in the side bins
// (prefactor 1/16, singles 1/4, background still halved). A switch placed
// before the interferometer measures Z at correlated-pair rates, which is
// also the polarization-analyzer model; the analyzer's polarizer always
// halves unpolarized background.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "pairfilt/detection.hpp"
#include "pairfilt/errors.hpp"
#include "pairfilt/units.hpp"

namespace pairfilt {

// Per-bin pair means of a maximally entangled source (early and late bins
// carry equal means by construction).
struct EntangledSourceSpec {
    double mu_s = 0.0;
    double mu_i = 0.0;
    double mu_both = 0.0;
    double v_int = 0.98; // interferometer visibility
    double phi_a = 0.0;  // rad
    double phi_b = 0.0;  // rad

    void validate() const
    {
        if (!(mu_s >= 0.0 && mu_i >= 0.0 && mu_both >= 0.0)) {
            throw DomainError("EntangledSourceSpec: means must be non-negative");
        }
        if (mu_both > std::min(mu_s, mu_i) * (1.0 + 1e-12)) {
            throw DomainError("EntangledSourceSpec: mu_both cannot exceed min(mu_s, mu_i)");
        }
        if (!(v_int >= 0.0 && v_int <= 1.0)) {
            throw DomainError("EntangledSourceSpec: v_int must lie in [0, 1]");
        }
    }

    EntangledSourceSpec scaled(double factor) const
    {
        EntangledSourceSpec s = *this;
        s.mu_s *= factor;
        s.mu_i *= factor;
        s.mu_both *= factor;
        return s;
    }
};

enum class ReceiverVariant {
    timebin_interferometer, // all three bases through the interferometer
    timebin_switch_z,       // X/Y through the interferometer, Z bypasses it
    polarization,           // polarization analyzer
};

struct ReceiverSpec {
    ReceiverVariant variant = ReceiverVariant::timebin_interferometer;
    bool polarization_filtering = false;
};

struct VisibilityReport {
    double v_x = 0.0;
    double v_y = 0.0;
    double v_z = 0.0;
    double c_max_xy = 0.0, c_min_xy = 0.0;
    double c_max_z = 0.0, c_min_z = 0.0;
    bool x_above_qkd = false, x_above_bell = false;
    bool z_above_qkd = false, z_above_bell = false;
};

namespace detail {

inline double alpha_for(const ReceiverSpec& rx)
{
    if (rx.variant == ReceiverVariant::polarization) {
        return 0.5; // the analyzer's polarizer rejects half the unpolarized noise
    }
    return rx.polarization_filtering ? 0.5 : 1.0;
}

// Background probability per gate on a path, kappa_noise = 1/2 behind an
// interferometer and 1 on a direct path.
inline double background(const ChannelSpec& ch, const ReceiverSpec& rx, double kappa_noise,
                         std::optional<double> power_mw)
{
    return (kappa_noise * ch.noise_rate(power_mw, alpha_for(rx)) + ch.dark_rate) * ch.delta_t;
}

} // namespace detail

struct FringePoint {
    double c = 0.0; // coincidence probability at interferometer phase phi
    double s_s = 0.0;
    double s_i = 0.0;
};

// X/Y-basis coincidence fringe at total phase phi = phi_a + phi_b.
inline FringePoint timebin_xy(double phi, const EntangledSourceSpec& src,
                              const ChannelSpec& ch_s, const ChannelSpec& ch_i,
                              const ReceiverSpec& rx = {},
                              std::optional<double> power_mw = std::nullopt)
{
    src.validate();
    const double eta_s = ch_s.efficiency();
    const double eta_i = ch_i.efficiency();
    FringePoint p;
    p.s_s = 0.5 * src.mu_s * eta_s + detail::background(ch_s, rx, 0.5, power_mw);
    p.s_i = 0.5 * src.mu_i * eta_i + detail::background(ch_i, rx, 0.5, power_mw);
    p.c = 0.25 * src.mu_both * eta_s * eta_i * (0.5 + 0.5 * src.v_int * std::cos(phi)) +
          p.s_s * p.s_i;
    return p;
}

struct BasisRates {
    double c_max = 0.0;
    double c_min = 0.0;
    double s_s = 0.0;
    double s_i = 0.0;

    double visibility() const
    {
        const double sum = c_max + c_min;
        return sum > 0.0 ? (c_max - c_min) / sum : 0.0;
    }
};

// Z-basis extrema for the chosen receiver.
inline BasisRates timebin_z(const EntangledSourceSpec& src, const ChannelSpec& ch_s,
                            const ChannelSpec& ch_i, const ReceiverSpec& rx = {},
                            std::optional<double> power_mw = std::nullopt)
{
    src.validate();
    const double eta_s = ch_s.efficiency();
    const double eta_i = ch_i.efficiency();
    BasisRates r;
    if (rx.variant == ReceiverVariant::timebin_interferometer) {
        // Side bins of the interferometer output.
        r.s_s = 0.25 * src.mu_s * eta_s + detail::background(ch_s, rx, 0.5, power_mw);
        r.s_i = 0.25 * src.mu_i * eta_i + detail::background(ch_i, rx, 0.5, power_mw);
        r.c_min = r.s_s * r.s_i;
        r.c_max = src.mu_both * eta_s * eta_i / 16.0 + r.c_min;
    } else {
        // Direct arrival-time measurement at correlated-pair rates.
        r.s_s = src.mu_s * eta_s + detail::background(ch_s, rx, 1.0, power_mw);
        r.s_i = src.mu_i * eta_i + detail::background(ch_i, rx, 1.0, power_mw);
        r.c_min = r.s_s * r.s_i;
        r.c_max = src.mu_both * eta_s * eta_i + r.c_min;
    }
    return r;
}

inline BasisRates polarization_rates(const EntangledSourceSpec& src, const ChannelSpec& ch_s,
                                     const ChannelSpec& ch_i,
                                     std::optional<double> power_mw = std::nullopt)
{
    src.validate();
    ReceiverSpec rx{ReceiverVariant::polarization, true};
    const double eta_s = ch_s.efficiency();
    const double eta_i = ch_i.efficiency();
    BasisRates r;
    r.s_s = src.mu_s * eta_s + detail::background(ch_s, rx, 1.0, power_mw);
    r.s_i = src.mu_i * eta_i + detail::background(ch_i, rx, 1.0, power_mw);
    r.c_min = r.s_s * r.s_i;
    r.c_max = src.mu_both * eta_s * eta_i + r.c_min;
    return r;
}

inline VisibilityReport visibility_report(const EntangledSourceSpec& src,
                                          const ChannelSpec& ch_s, const ChannelSpec& ch_i,
                                          const ReceiverSpec& rx = {},
                                          std::optional<double> power_mw = std::nullopt)
{
    VisibilityReport rep;
    if (rx.variant == ReceiverVariant::polarization) {
        const auto pol = polarization_rates(src, ch_s, ch_i, power_mw);
        rep.c_max_xy = rep.c_max_z = pol.c_max;
        rep.c_min_xy = rep.c_min_z = pol.c_min;
        rep.v_x = rep.v_y = rep.v_z = pol.visibility();
    } else {
        const auto peak = timebin_xy(0.0, src, ch_s, ch_i, rx, power_mw);
        const auto trough = timebin_xy(kPi, src, ch_s, ch_i, rx, power_mw);
        rep.c_max_xy = peak.c;
        rep.c_min_xy = trough.c;
        const double sum = peak.c + trough.c;
        rep.v_x = rep.v_y = sum > 0.0 ? (peak.c - trough.c) / sum : 0.0;
        const auto z = timebin_z(src, ch_s, ch_i, rx, power_mw);
        rep.c_max_z = z.c_max;
        rep.c_min_z = z.c_min;
        rep.v_z = z.visibility();
    }
    rep.x_above_qkd = rep.v_x > kQkdVisibilityThreshold;
    rep.x_above_bell = rep.v_x > kBellVisibilityThreshold;
    rep.z_above_qkd = rep.v_z > kQkdVisibilityThreshold;
    rep.z_above_bell = rep.v_z > kBellVisibilityThreshold;
    return rep;
}

struct GoldenResult {
    double x = 0.0;
    double fx = 0.0;
    bool converged = false;
};

// Golden-section maximization of a unimodal function on [lo, hi].
inline GoldenResult golden_section_max(const std::function<double(double)>& f, double lo,
                                       double hi, double rel_tol = 1e-4, int max_iter = 200)
{
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    GoldenResult r;
    for (int it = 0; it < max_iter; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        }
        const double fbest = std::max(f1, f2);
        const double spread = std::abs(f1 - f2);
        if (spread <= rel_tol * std::max(std::abs(fbest), 1e-300)) {
            r.converged = true;
            break;
        }
    }
    if (f1 >= f2) {
        r.x = x1;
        r.fx = f1;
    } else {
        r.x = x2;
        r.fx = f2;
    }
    return r;
}

struct PowerPoint {
    double power_dbm = 0.0;
    double v_x = 0.0;
    double v_z = 0.0;
    double mu_scale_x = 1.0; // pump scaling chosen by the optimizer, if any
    double mu_scale_z = 1.0;
    bool optimizer_converged = true;
};

struct PowerCurve {
    std::vector<PowerPoint> points;
    // Launch powers (dBm) up to which each threshold holds, by basis.
    std::optional<double> x_qkd_limit_dbm;
    std::optional<double> x_bell_limit_dbm;
    std::optional<double> z_qkd_limit_dbm;
    std::optional<double> z_bell_limit_dbm;
};

namespace detail {

// Largest power (dBm) with V >= threshold, by bisection on a monotone
// non-increasing V(P). Returns nullopt when already below at the lowest power.
inline std::optional<double> threshold_crossing(const std::function<double(double)>& v_of_dbm,
                                                double lo_dbm, double hi_dbm, double threshold)
{
    if (v_of_dbm(lo_dbm) < threshold) return std::nullopt;
    if (v_of_dbm(hi_dbm) >= threshold) return hi_dbm;
    double lo = lo_dbm, hi = hi_dbm;
    for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
        const double mid = 0.5 * (lo + hi);
        (v_of_dbm(mid) >= threshold ? lo : hi) = mid;
    }
    return lo;
}

} // namespace detail

// Visibility versus launched classical power. When optimize_mu is set the
// source intensity is rescaled at every power to maximize each basis's
// visibility (golden-section search on the log of the scale, with the scaled
// mu_s confined to [1e-7, 0.1]).
inline PowerCurve visibility_vs_power(const EntangledSourceSpec& src, const ChannelSpec& ch_s,
                                      const ChannelSpec& ch_i, const ReceiverSpec& rx,
                                      const std::vector<double>& power_dbm_grid,
                                      bool optimize_mu = false)
{
    if (power_dbm_grid.empty()) {
        throw DomainError("visibility_vs_power: empty power grid");
    }
    for (std::size_t k = 1; k < power_dbm_grid.size(); ++k) {
        if (!(power_dbm_grid[k] > power_dbm_grid[k - 1])) {
            throw DomainError("visibility_vs_power: power grid must be strictly increasing");
        }
    }
    src.validate();
    if (optimize_mu && !(src.mu_s > 0.0)) {
        throw DomainError("visibility_vs_power: optimizing requires a nonzero source");
    }

    enum class Basis { x, z };
    const auto evaluate = [&](double p_mw, double scale, Basis basis) {
        const auto rep = visibility_report(src.scaled(scale), ch_s, ch_i, rx, p_mw);
        return basis == Basis::x ? rep.v_x : rep.v_z;
    };
    const auto best = [&](double p_mw, Basis basis) {
        if (!optimize_mu) {
            return std::make_pair(evaluate(p_mw, 1.0, basis), GoldenResult{0.0, 0.0, true});
        }
        const double lo = std::log(1e-7 / src.mu_s);
        const double hi = std::log(0.1 / src.mu_s);
        auto g = golden_section_max(
            [&](double ls) { return evaluate(p_mw, std::exp(ls), basis); }, lo, hi);
        return std::make_pair(g.fx, g);
    };

    PowerCurve curve;
    curve.points.reserve(power_dbm_grid.size());
    for (double dbm : power_dbm_grid) {
        const double mw = dbm_to_mw(dbm);
        PowerPoint pt;
        pt.power_dbm = dbm;
        auto [vx, gx] = best(mw, Basis::x);
        auto [vz, gz] = best(mw, Basis::z);
        pt.v_x = vx;
        pt.v_z = vz;
        if (optimize_mu) {
            pt.mu_scale_x = std::exp(gx.x);
            pt.mu_scale_z = std::exp(gz.x);
            pt.optimizer_converged = gx.converged && gz.converged;
        }
        curve.points.push_back(pt);
    }

    const double lo = power_dbm_grid.front();
    const double hi = power_dbm_grid.back();
    const auto vx_of = [&](double dbm) { return best(dbm_to_mw(dbm), Basis::x).first; };
    const auto vz_of = [&](double dbm) { return best(dbm_to_mw(dbm), Basis::z).first; };
    curve.x_qkd_limit_dbm = detail::threshold_crossing(vx_of, lo, hi, kQkdVisibilityThreshold);
    curve.x_bell_limit_dbm = detail::threshold_crossing(vx_of, lo, hi, kBellVisibilityThreshold);
    curve.z_qkd_limit_dbm = detail::threshold_crossing(vz_of, lo, hi, kQkdVisibilityThreshold);
    curve.z_bell_limit_dbm = detail::threshold_crossing(vz_of, lo, hi, kBellVisibilityThreshold);
    return curve;
}

} // namespace pairfilt
