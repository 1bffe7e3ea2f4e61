// detection.hpp — singles, coincidences, accidentals and CAR in the
// low-gain regime
//
// Per detection gate:
//   S_j = mu_j eta_j + D_j,            D_j = (noise rate + dark rate) * dT
//   C   = mu_both eta_s eta_i + S_s S_i
//   A   = S_s S_i,                     CAR = C / A
//
// All probabilities must stay well below 1 for the model to hold; a low-gain
// flag is raised past 0.1 rather than failing.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "pairfilt/errors.hpp"
#include "pairfilt/spectral.hpp"

namespace pairfilt {

// Where the quoted noise level was measured. Factors upstream of that plane
// are applied by the model; factors downstream are assumed folded in.
enum class NoiseReference {
    detector,     // rate as counted at the detector (polarizer and receiver loss folded in)
    prepol,       // at the receiver input, before the polarization filter
    fiber_output, // exiting the fiber, before receiver loss and polarizer
};

struct ChannelSpec {
    double eta_c = 1.0;  // source transmission
    double eta_ch = 1.0; // channel transmission
    double eta_r = 1.0;  // receiver transmission
    double theta_pol = 0.0; // rad, source-polarizer misalignment
    double alpha_pol = 1.0; // noise polarization pass fraction (0.5 unpolarized + polarizer)

    NoiseReference reference = NoiseReference::detector;
    double noise_density = 0.0; // counts/(nm s) within the passband plane above
    double noise_per_mw = 0.0;  // counts/(s mW) of launched classical power
    double launch_power_mw = 0.0;
    double span_loss_db = 0.0;  // classical-channel loss, for received-power bookkeeping

    double dark_rate = 0.0;     // counts/s
    double delta_t = 0.0;       // s, detection window
    double delta_lambda = 0.0;  // nm, spectral filter FWHM

    void validate() const
    {
        const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!unit(eta_c) || !unit(eta_ch) || !unit(eta_r)) {
            throw DomainError("ChannelSpec: efficiencies must lie in [0, 1]");
        }
        if (!unit(alpha_pol)) {
            throw DomainError("ChannelSpec: alpha_pol must lie in [0, 1]");
        }
        if (noise_density < 0.0 || noise_per_mw < 0.0 || dark_rate < 0.0 || delta_t < 0.0 ||
            delta_lambda < 0.0 || launch_power_mw < 0.0) {
            throw DomainError("ChannelSpec: rates, windows and bandwidths must be non-negative");
        }
    }

    double efficiency() const
    {
        const double ct = std::cos(theta_pol);
        return eta_c * eta_ch * eta_r * ct * ct;
    }

    // Filtered background rate (counts/s) reaching the detector on a direct
    // (interferometer-free) path. alpha_override replaces alpha_pol when the
    // receiver dictates its own polarization filtering.
    double noise_rate(std::optional<double> power_mw = std::nullopt,
                      std::optional<double> alpha_override = std::nullopt) const
    {
        const double p = power_mw.value_or(launch_power_mw);
        const double base = noise_density * delta_lambda + noise_per_mw * p;
        const double alpha = alpha_override.value_or(alpha_pol);
        switch (reference) {
        case NoiseReference::detector:
            return base;
        case NoiseReference::prepol:
            return alpha * base;
        case NoiseReference::fiber_output:
            return eta_r * alpha * base;
        }
        return base;
    }

    // Background count probability per gate, D_j.
    double background_probability(std::optional<double> power_mw = std::nullopt,
                                  std::optional<double> alpha_override = std::nullopt) const
    {
        return (noise_rate(power_mw, alpha_override) + dark_rate) * delta_t;
    }

    // Noise-only probability excluding dark counts, for the SNR definition.
    double noise_probability(std::optional<double> power_mw = std::nullopt) const
    {
        return noise_rate(power_mw) * delta_t;
    }
};

struct NoiseBudget {
    double d_s = 0.0;
    double d_i = 0.0;
};

inline NoiseBudget noise_budget(const ChannelSpec& ch_s, const ChannelSpec& ch_i,
                                std::optional<double> power_mw = std::nullopt)
{
    return {ch_s.background_probability(power_mw), ch_i.background_probability(power_mw)};
}

inline double singles(double mu_j, const ChannelSpec& ch,
                      std::optional<double> power_mw = std::nullopt)
{
    if (!(mu_j >= 0.0)) {
        throw DomainError("singles: mu must be non-negative");
    }
    ch.validate();
    return mu_j * ch.efficiency() + ch.background_probability(power_mw);
}

struct RateReport {
    double s_s = 0.0;
    double s_i = 0.0;
    double coincidence = 0.0;
    double accidental = 0.0;
    std::optional<double> car; // empty when accidentals vanish
    bool car_infinite = false;
    double snr_s = 0.0; // may be +inf when background noise is zero
    double snr_i = 0.0;
    bool low_gain_ok = true; // false when any probability exceeds 0.1
};

inline RateReport coincidences(const MuTriple& mu, const ChannelSpec& ch_s,
                               const ChannelSpec& ch_i,
                               std::optional<double> power_mw = std::nullopt)
{
    RateReport r;
    const double eta_s = ch_s.efficiency();
    const double eta_i = ch_i.efficiency();
    r.s_s = singles(mu.mu_s, ch_s, power_mw);
    r.s_i = singles(mu.mu_i, ch_i, power_mw);
    r.accidental = r.s_s * r.s_i;
    r.coincidence = mu.mu_both * eta_s * eta_i + r.accidental;
    if (r.accidental > 0.0) {
        r.car = r.coincidence / r.accidental;
    } else {
        r.car_infinite = mu.mu_both > 0.0;
    }
    const auto snr = [power_mw](double signal, const ChannelSpec& ch) {
        const double n = ch.noise_probability(power_mw);
        if (n <= 0.0) return std::numeric_limits<double>::infinity();
        return signal / n;
    };
    r.snr_s = snr(mu.mu_s * eta_s, ch_s);
    r.snr_i = snr(mu.mu_i * eta_i, ch_i);
    r.low_gain_ok = r.s_s <= 0.1 && r.s_i <= 0.1 && r.coincidence <= 0.1;
    return r;
}

// CAR as an explicit function of the coincidence-mode mean, with the singles
// means eliminated through the heralding efficiencies.
inline double car_noisy(double mu_both, double delta_s, double delta_i, double eta_s,
                        double eta_i, double d_s, double d_i)
{
    if (!(delta_s > 0.0 && delta_s <= 1.0) || !(delta_i > 0.0 && delta_i <= 1.0)) {
        throw DomainError("car_noisy: heralding efficiencies must lie in (0, 1]");
    }
    if (mu_both < 0.0 || eta_s < 0.0 || eta_i < 0.0 || d_s < 0.0 || d_i < 0.0) {
        throw DomainError("car_noisy: negative input");
    }
    const double acc = (mu_both / delta_i * eta_s + d_s) * (mu_both / delta_s * eta_i + d_i);
    if (!(acc > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return mu_both * eta_s * eta_i / acc + 1.0;
}

struct OptimalOperatingPoint {
    std::optional<double> mu_both_opt;
    std::optional<double> car_max;
    double mu_si_opt = 0.0; // equal-heralding singles optimum, independent of delta_ps
    bool unbounded = false; // true when the noise-free optimum diverges
};

// Pump setting that maximizes the CAR and the CAR it attains.
inline OptimalOperatingPoint mu_opt_and_car_max(double delta_s, double delta_i, double eta_s,
                                                double eta_i, double d_s, double d_i)
{
    if (!(delta_s > 0.0 && delta_s <= 1.0) || !(delta_i > 0.0 && delta_i <= 1.0)) {
        throw DomainError("mu_opt_and_car_max: heralding efficiencies must lie in (0, 1]");
    }
    if (!(eta_s > 0.0 && eta_i > 0.0)) {
        throw DomainError("mu_opt_and_car_max: efficiencies must be positive");
    }
    if (d_s < 0.0 || d_i < 0.0) {
        throw DomainError("mu_opt_and_car_max: negative noise probability");
    }
    OptimalOperatingPoint p;
    if (d_s == 0.0 || d_i == 0.0) {
        // Without background the CAR grows without bound as the pump is
        // attenuated; there is no interior optimum.
        p.unbounded = true;
        return p;
    }
    const double delta_ps = std::sqrt(delta_s * delta_i);
    const double k = std::sqrt(d_s * d_i / (eta_s * eta_i));
    p.mu_si_opt = k;
    p.mu_both_opt = delta_ps * k;
    const double num = delta_ps * std::sqrt(eta_s * eta_i * d_s * d_i);
    const double den =
        2.0 * d_s * d_i + delta_ps * k * (eta_s * d_i / delta_i + eta_i * d_s / delta_s);
    p.car_max = num / den + 1.0;
    return p;
}

// Inverts the noise-free CAR relation to the pair-generation means.
// Returns {mu_both, mu_si} with mu_si from the equal-heralding approximation.
inline std::pair<double, double> mu_from_car_dark(double car_dark, double delta_s,
                                                  double delta_i)
{
    if (!(car_dark > 1.0)) {
        throw DomainError("mu_from_car_dark: CAR must exceed 1");
    }
    if (!(delta_s > 0.0 && delta_s <= 1.0) || !(delta_i > 0.0 && delta_i <= 1.0)) {
        throw DomainError("mu_from_car_dark: heralding efficiencies must lie in (0, 1]");
    }
    const double mu_both = delta_s * delta_i / (car_dark - 1.0);
    const double mu_si = std::sqrt(delta_s * delta_i) / (car_dark - 1.0);
    return {mu_both, mu_si};
}

inline double car_dark(const MuTriple& mu)
{
    if (!(mu.mu_s > 0.0 && mu.mu_i > 0.0)) {
        throw DomainError("car_dark: singles means must be positive");
    }
    return mu.mu_both / (mu.mu_s * mu.mu_i) + 1.0;
}

// Thermal photon-number distribution of a single-mode squeezed-vacuum pair
// source. Diagnostic for the Poisson accidental model at low gain.
inline double thermal_pn(double mu, int m)
{
    if (!(mu >= 0.0)) {
        throw DomainError("thermal_pn: mu must be non-negative");
    }
    if (m < 0) {
        throw DomainError("thermal_pn: m must be non-negative");
    }
    if (mu == 0.0) {
        return m == 0 ? 1.0 : 0.0;
    }
    return std::exp(m * std::log(mu) - (m + 1) * std::log1p(mu));
}

} // namespace pairfilt
