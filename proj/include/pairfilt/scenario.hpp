// scenario.hpp — JSON scenario ingestion
//
// A scenario file describes one full system: source, filters, detection
// windows, channels with their noise environment, and optionally a time-bin
// or polarization entanglement receiver. Wavelengths enter in pm/nm and
// powers in dBm at the boundary and are converted once here. See README.md
// for the schema.

#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pairfilt/detection.hpp"
#include "pairfilt/entanglement.hpp"
#include "pairfilt/filter.hpp"
#include "pairfilt/joint_spectrum.hpp"
#include "pairfilt/spectral.hpp"

namespace pairfilt {

using nlohmann::json;

struct Scenario {
    SourceSpec source;
    PhaseMatchForm form = PhaseMatchForm::sinc;
    FilterSpec filter_s;
    FilterSpec filter_i;
    ChannelSpec ch_s;
    ChannelSpec ch_i;

    bool has_entanglement = false;
    double v_int = 0.98;
    bool ent_mu_explicit = false;
    EntangledSourceSpec ent_mu; // used when ent_mu_explicit
    ReceiverSpec receiver;
    std::vector<double> power_grid_dbm;
    bool optimize_mu = false;

    GridSpec grid;
    std::vector<std::string> outputs;
    json raw;

    static Scenario from_json(const json& j);
    static Scenario load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) {
            throw Error("cannot open scenario file: " + path);
        }
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw SchemaError({std::string("not valid JSON: ") + e.what()});
        }
        return from_json(j);
    }

    // Entangled per-bin means: explicit values, or derived from the filtered
    // joint spectrum at the configured mu_total.
    EntangledSourceSpec entangled_means() const
    {
        if (ent_mu_explicit) {
            return ent_mu;
        }
        const auto g = grid_for(source, form, filter_s, filter_i, grid);
        const auto jsa = build_jsa(source, g, form);
        const auto m = filtered_means(jsa, filter_s, filter_i, source.mu_total);
        EntangledSourceSpec e;
        e.mu_s = m.mu_s;
        e.mu_i = m.mu_i;
        e.mu_both = m.mu_both;
        e.v_int = v_int;
        return e;
    }
};

namespace detail {

class FieldReader {
public:
    explicit FieldReader(const json& root) : root_(root) {}

    bool has(const std::string& ptr) const
    {
        return root_.contains(json::json_pointer(ptr));
    }

    double number(const std::string& ptr, std::optional<double> fallback = std::nullopt)
    {
        if (!has(ptr)) {
            if (fallback) return *fallback;
            errors_.push_back(ptr + ": required number is missing");
            return 0.0;
        }
        const auto& v = root_.at(json::json_pointer(ptr));
        if (!v.is_number()) {
            errors_.push_back(ptr + ": expected a number");
            return fallback.value_or(0.0);
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            errors_.push_back(ptr + ": must be finite");
            return fallback.value_or(0.0);
        }
        return x;
    }

    std::string text(const std::string& ptr, std::optional<std::string> fallback = std::nullopt)
    {
        if (!has(ptr)) {
            if (fallback) return *fallback;
            errors_.push_back(ptr + ": required string is missing");
            return {};
        }
        const auto& v = root_.at(json::json_pointer(ptr));
        if (!v.is_string()) {
            errors_.push_back(ptr + ": expected a string");
            return fallback.value_or(std::string{});
        }
        return v.get<std::string>();
    }

    bool flag(const std::string& ptr, bool fallback)
    {
        if (!has(ptr)) return fallback;
        const auto& v = root_.at(json::json_pointer(ptr));
        if (!v.is_boolean()) {
            errors_.push_back(ptr + ": expected a boolean");
            return fallback;
        }
        return v.get<bool>();
    }

    void fail(const std::string& message) { errors_.push_back(message); }

    void raise_if_failed() const
    {
        if (!errors_.empty()) {
            throw SchemaError(errors_);
        }
    }

private:
    const json& root_;
    std::vector<std::string> errors_;
};

inline FilterSpec parse_filter(FieldReader& r, const std::string& base, double lambda0_nm)
{
    const std::string shape = r.text(base + "/shape", std::string("gaussian"));
    const double lam = r.number(base + "/center_wavelength_nm", lambda0_nm);
    const double offset_pm = r.number(base + "/center_offset_pm", 0.0);
    const double center =
        wavelength_to_omega(lam * 1e-9) + omega_fwhm_from_pm(offset_pm, lam);
    try {
        if (shape == "gaussian") {
            return FilterSpec::make_gaussian(omega_fwhm_from_pm(r.number(base + "/fwhm_pm"), lam),
                                             center);
        }
        if (shape == "flat_top") {
            const int order = static_cast<int>(r.number(base + "/order", 4.0));
            return FilterSpec::make_flat_top(omega_fwhm_from_pm(r.number(base + "/fwhm_pm"), lam),
                                             center, order);
        }
        if (shape == "tabulated") {
            const std::string path = r.text(base + "/table_csv");
            if (path.empty()) {
                r.fail(base + "/table_csv: tabulated filter needs a table file");
                return FilterSpec::make_all_pass();
            }
            return load_tabulated_filter_csv(path, lam);
        }
        if (shape == "none" || shape == "all_pass") {
            return FilterSpec::make_all_pass();
        }
    } catch (const Error& e) {
        r.fail(base + ": " + e.what());
        return FilterSpec::make_all_pass();
    }
    r.fail(base + "/shape: unknown shape '" + shape + "'");
    return FilterSpec::make_all_pass();
}

// Intensity FWHM (nm) of a filter for the noise bandwidth term.
inline std::optional<double> filter_noise_bandwidth_nm(const FilterSpec& f, double lambda0_nm)
{
    switch (f.shape) {
    case FilterShape::gaussian:
    case FilterShape::flat_top:
        return pm_from_omega_fwhm(f.fwhm, lambda0_nm) * 1e-3;
    case FilterShape::tabulated: {
        // Half-max crossings of the tabulated intensity curve.
        double peak = 0.0;
        for (const auto& [d, t] : f.table) peak = std::max(peak, t);
        if (peak <= 0.0) return std::nullopt;
        double lo = f.table.front().first, hi = f.table.back().first;
        bool found_lo = false, found_hi = false;
        for (std::size_t k = 1; k < f.table.size(); ++k) {
            const auto& [d0, t0] = f.table[k - 1];
            const auto& [d1, t1] = f.table[k];
            if (!found_lo && t0 < peak / 2.0 && t1 >= peak / 2.0) {
                lo = d0 + (peak / 2.0 - t0) / (t1 - t0) * (d1 - d0);
                found_lo = true;
            }
            if (found_lo && t0 >= peak / 2.0 && t1 < peak / 2.0) {
                hi = d0 + (t0 - peak / 2.0) / (t0 - t1) * (d1 - d0);
                found_hi = true;
            }
        }
        if (!found_lo || !found_hi) return std::nullopt;
        return pm_from_omega_fwhm(hi - lo, lambda0_nm) * 1e-3;
    }
    case FilterShape::all_pass:
        return std::nullopt;
    }
    return std::nullopt;
}

inline ChannelSpec parse_channel(FieldReader& r, const std::string& base, const FilterSpec& filter,
                                 double lambda0_nm, double shared_power_dbm)
{
    ChannelSpec ch;
    ch.eta_c = r.number(base + "/eta_c", 1.0);
    ch.eta_ch = r.number(base + "/eta_ch", 1.0);
    ch.eta_r = r.number(base + "/eta_r", 1.0);
    ch.theta_pol = r.number(base + "/theta_pol_rad", 0.0);
    ch.alpha_pol = r.number(base + "/alpha_pol", 1.0);
    ch.dark_rate = r.number(base + "/dark_rate_hz", 0.0);
    ch.delta_t = r.number(base + "/delta_t_ps", 0.0) * 1e-12;

    const std::string nbase = base + "/noise";
    if (r.has(nbase)) {
        const std::string ref = r.text(nbase + "/reference", std::string("detector"));
        if (ref == "detector") {
            ch.reference = NoiseReference::detector;
        } else if (ref == "prepol") {
            ch.reference = NoiseReference::prepol;
        } else if (ref == "fiber_output") {
            ch.reference = NoiseReference::fiber_output;
        } else {
            r.fail(nbase + "/reference: unknown reference plane '" + ref + "'");
        }
        ch.noise_density = r.number(nbase + "/density_per_pm_s", 0.0) * 1e3; // to counts/nm/s
        ch.noise_per_mw = r.number(nbase + "/per_mw", 0.0);
        ch.span_loss_db = r.number(nbase + "/span_loss_db", 0.0);
    }
    ch.launch_power_mw = dbm_to_mw(shared_power_dbm);

    if (r.has(base + "/delta_lambda_nm")) {
        ch.delta_lambda = r.number(base + "/delta_lambda_nm");
    } else if (const auto bw = filter_noise_bandwidth_nm(filter, lambda0_nm)) {
        ch.delta_lambda = *bw;
    } else if (ch.noise_density > 0.0) {
        r.fail(base + "/delta_lambda_nm: required when the filter has no finite bandwidth "
                      "and a spectral noise density is given");
    }
    try {
        ch.validate();
    } catch (const Error& e) {
        r.fail(base + ": " + e.what());
    }
    return ch;
}

} // namespace detail

inline Scenario Scenario::from_json(const json& j)
{
    detail::FieldReader r(j);
    Scenario sc;
    sc.raw = j;

    // --- source ---
    const double lambda0_nm = r.number("/source/center_wavelength_nm", 1536.5);
    const double lam_s = r.number("/source/center_s_nm", lambda0_nm);
    const double lam_i = r.number("/source/center_i_nm", lambda0_nm);
    double pump_sigma = 0.0;
    const bool has_fwhm = r.has("/source/pump_fwhm_ps");
    const bool has_sigma = r.has("/source/pump_sigma_rad_s");
    if (has_fwhm && has_sigma) {
        r.fail("/source: give exactly one of pump_fwhm_ps or pump_sigma_rad_s");
    } else if (has_sigma) {
        pump_sigma = r.number("/source/pump_sigma_rad_s");
    } else if (has_fwhm) {
        const double tau = r.number("/source/pump_fwhm_ps");
        if (tau > 0.0) pump_sigma = pump_sigma_from_fwhm(tau);
        else r.fail("/source/pump_fwhm_ps: must be positive");
    } else {
        r.fail("/source: give one of pump_fwhm_ps or pump_sigma_rad_s");
    }
    const double pm_sigma = r.number("/source/pm_sigma_rad_s");
    const double pm_angle = r.number("/source/pm_angle_rad");
    const double mu_total = r.number("/source/mu_total", 1.0);
    const std::string form = r.text("/source/phase_matching", std::string("sinc"));
    if (form == "sinc") {
        sc.form = PhaseMatchForm::sinc;
    } else if (form == "gaussian") {
        sc.form = PhaseMatchForm::gaussian;
    } else {
        r.fail("/source/phase_matching: expected 'sinc' or 'gaussian'");
    }

    // --- filters and channels ---
    sc.filter_s = detail::parse_filter(r, "/filters/signal", lam_s);
    sc.filter_i = detail::parse_filter(r, "/filters/idler", lam_i);
    const double power_dbm = r.number("/power_dbm", -300.0);
    sc.ch_s = detail::parse_channel(r, "/channels/signal", sc.filter_s, lam_s, power_dbm);
    sc.ch_i = detail::parse_channel(r, "/channels/idler", sc.filter_i, lam_i, power_dbm);

    // --- entanglement ---
    if (r.has("/entanglement")) {
        sc.has_entanglement = true;
        sc.v_int = r.number("/entanglement/v_int", 0.98);
        const std::string rx = r.text("/entanglement/receiver",
                                      std::string("timebin_interferometer"));
        if (rx == "timebin_interferometer") {
            sc.receiver.variant = ReceiverVariant::timebin_interferometer;
        } else if (rx == "timebin_switch_z") {
            sc.receiver.variant = ReceiverVariant::timebin_switch_z;
        } else if (rx == "polarization") {
            sc.receiver.variant = ReceiverVariant::polarization;
        } else {
            r.fail("/entanglement/receiver: unknown receiver '" + rx + "'");
        }
        sc.receiver.polarization_filtering =
            r.flag("/entanglement/polarization_filtering", false);
        sc.optimize_mu = r.flag("/entanglement/optimize_mu", false);
        if (r.has("/entanglement/mu")) {
            sc.ent_mu_explicit = true;
            sc.ent_mu.mu_s = r.number("/entanglement/mu/mu_s");
            sc.ent_mu.mu_i = r.number("/entanglement/mu/mu_i");
            sc.ent_mu.mu_both = r.number("/entanglement/mu/mu_both");
            sc.ent_mu.v_int = sc.v_int;
        }
        if (r.has("/entanglement/power_grid_dbm")) {
            const auto& pg = j.at(json::json_pointer("/entanglement/power_grid_dbm"));
            if (pg.is_array()) {
                for (const auto& v : pg) {
                    if (v.is_number() && std::isfinite(v.get<double>())) {
                        sc.power_grid_dbm.push_back(v.get<double>());
                    } else {
                        r.fail("/entanglement/power_grid_dbm: entries must be finite numbers");
                        break;
                    }
                }
                if (sc.power_grid_dbm.empty()) {
                    r.fail("/entanglement/power_grid_dbm: array must not be empty");
                }
            } else if (pg.is_object()) {
                const double start = r.number("/entanglement/power_grid_dbm/start");
                const double stop = r.number("/entanglement/power_grid_dbm/stop");
                const int n = static_cast<int>(r.number("/entanglement/power_grid_dbm/points", 2.0));
                if (n < 2 || !(stop > start)) {
                    r.fail("/entanglement/power_grid_dbm: need points >= 2 and stop > start");
                } else {
                    for (int k = 0; k < n; ++k) {
                        sc.power_grid_dbm.push_back(start + (stop - start) * k / (n - 1));
                    }
                }
            } else {
                r.fail("/entanglement/power_grid_dbm: expected an array or {start, stop, points}");
            }
        }
    }

    // --- grid ---
    sc.grid.points_s = sc.grid.points_i = static_cast<int>(r.number("/grid/points", 512.0));
    sc.grid.truncation = r.number("/grid/truncation", 5.0);
    sc.grid.max_points = static_cast<int>(r.number("/grid/max_points", 4096.0));
    sc.grid.min_points_per_feature =
        static_cast<int>(r.number("/grid/min_points_per_feature", 8.0));

    // --- outputs ---
    static const std::set<std::string> known = {
        "mu", "purity", "closed_form", "rates", "optimum", "visibility", "width_ratio"};
    if (r.has("/outputs")) {
        const auto& out = j.at(json::json_pointer("/outputs"));
        if (!out.is_array()) {
            r.fail("/outputs: expected an array of quantity names");
        } else {
            for (const auto& v : out) {
                if (!v.is_string() || !known.count(v.get<std::string>())) {
                    r.fail("/outputs: unknown quantity " + v.dump());
                } else {
                    sc.outputs.push_back(v.get<std::string>());
                }
            }
        }
    }
    if (sc.outputs.empty()) {
        sc.outputs = {"mu"};
    }
    for (const auto& q : sc.outputs) {
        if ((q == "visibility") && !sc.has_entanglement) {
            r.fail("/outputs: 'visibility' needs an /entanglement block");
        }
    }

    // Physical invariants that span fields.
    if (pump_sigma > 0.0 && pm_sigma > 0.0) {
        try {
            sc.source = SourceSpec::from_pump_sigma(pump_sigma, pm_sigma, pm_angle, mu_total,
                                                    wavelength_to_omega(lam_s * 1e-9),
                                                    wavelength_to_omega(lam_i * 1e-9));
        } catch (const Error& e) {
            r.fail(std::string("/source: ") + e.what());
        }
    }
    if (sc.ent_mu_explicit) {
        try {
            sc.ent_mu.validate();
        } catch (const Error& e) {
            r.fail(std::string("/entanglement/mu: ") + e.what());
        }
    }

    r.raise_if_failed();
    return sc;
}

} // namespace pairfilt
