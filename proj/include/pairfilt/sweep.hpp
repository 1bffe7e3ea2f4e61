// sweep.hpp — parameter sweeps over scenario files
//
// A sweep takes the scenario's JSON as the base document, patches one value
// per axis (JSON-pointer paths) at every grid point of the cartesian
// product, recomputes the requested quantities, and emits long-format rows
// (axis values, quantity, value, flags). Grid points run on a worker pool;
// rows are ordered by grid index regardless of completion order, so output
// is deterministic.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "pairfilt/scenario.hpp"

namespace pairfilt {

struct QuantityValue {
    std::string quantity;
    double value = 0.0;
    std::string flag;
};

struct SweepAxis {
    // JSON pointers into the scenario document; one axis may patch several
    // locations with the same value (e.g. signal and idler bandwidths).
    std::vector<std::string> paths;
    std::vector<json> values;

    std::string label() const
    {
        std::string out;
        for (const auto& p : paths) {
            if (!out.empty()) out += '+';
            out += p;
        }
        return out;
    }
};

struct SweepRow {
    std::vector<std::string> axis_values;
    std::string quantity;
    double value = 0.0;
    std::string flag;
};

struct SweepResult {
    std::vector<std::string> axis_paths;
    std::vector<SweepRow> rows;
    std::string version;
    std::string scenario_hash;
    std::string grid_note;

    void to_csv(std::ostream& out) const;
    void to_json(std::ostream& out) const;
};

namespace detail {

inline std::string fnv1a_hex(const std::string& text)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string format_value(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string axis_value_text(const json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return format_value(v.get<double>());
    return v.dump();
}

inline void append(std::vector<QuantityValue>& out, const std::string& name, double value,
                   std::string flag = {})
{
    out.push_back({name, value, std::move(flag)});
}

inline const double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace detail

// All requested quantities for one fully specified scenario point.
inline std::vector<QuantityValue> compute_quantities(const Scenario& sc)
{
    std::vector<QuantityValue> out;
    const auto wants = [&](const std::string& q) {
        for (const auto& o : sc.outputs) {
            if (o == q) return true;
        }
        return false;
    };

    const bool needs_jsa = wants("mu") || wants("purity") || wants("rates") ||
                           wants("optimum") ||
                           (wants("visibility") && !sc.ent_mu_explicit);

    std::optional<JointSpectrum> jsa;
    std::optional<MuTriple> mu;
    if (needs_jsa) {
        const auto grid = grid_for(sc.source, sc.form, sc.filter_s, sc.filter_i, sc.grid);
        jsa = build_jsa(sc.source, grid, sc.form);
        auto m = filtered_means(*jsa, sc.filter_s, sc.filter_i, sc.source.mu_total);
        if (sc.raw.contains(json::json_pointer("/source/pin_mu_s"))) {
            const double pin = sc.raw.at(json::json_pointer("/source/pin_mu_s")).get<double>();
            if (m.mu_s > 0.0) {
                const double scale = pin / m.mu_s;
                m = make_mu_triple(pin, m.mu_i * scale, m.mu_both * scale);
            }
        }
        mu = m;
    }
    const std::string conv_flag = mu && !mu->converged ? "unconverged" : "";

    if (wants("mu")) {
        detail::append(out, "mu_s", mu->mu_s, conv_flag);
        detail::append(out, "mu_i", mu->mu_i, conv_flag);
        detail::append(out, "mu_both", mu->mu_both, conv_flag);
        const auto delta_row = [&](const char* name, const std::optional<double>& v) {
            if (v) detail::append(out, name, *v, conv_flag);
            else detail::append(out, name, detail::kNaN, "undefined");
        };
        delta_row("delta_s", mu->delta_s);
        delta_row("delta_i", mu->delta_i);
        delta_row("delta_ps", mu->delta_ps);
    }

    if (wants("purity")) {
        detail::append(out, "purity_svd", schmidt_purity(*jsa, sc.filter_s, sc.filter_i),
                       conv_flag);
    }

    if (wants("closed_form")) {
        try {
            const auto rep = closed_form_for(sc.source, sc.filter_s, sc.filter_i);
            detail::append(out, "cf_gamma_both", rep.gamma_both);
            detail::append(out, "cf_delta_s", rep.delta_s);
            detail::append(out, "cf_delta_i", rep.delta_i);
            detail::append(out, "cf_delta_ps", rep.delta_ps);
            detail::append(out, "cf_purity", rep.purity);
            detail::append(out, "cf_purity_unfiltered", rep.purity_unfiltered);
        } catch (const Error& e) {
            for (const char* name : {"cf_gamma_both", "cf_delta_s", "cf_delta_i", "cf_delta_ps",
                                     "cf_purity", "cf_purity_unfiltered"}) {
                detail::append(out, name, detail::kNaN,
                               std::string("not_applicable: ") + e.what());
            }
        }
    }

    if (wants("rates")) {
        const auto r = coincidences(*mu, sc.ch_s, sc.ch_i);
        const std::string gain_flag = r.low_gain_ok ? conv_flag : "low_gain_exceeded";
        detail::append(out, "s_s", r.s_s, gain_flag);
        detail::append(out, "s_i", r.s_i, gain_flag);
        detail::append(out, "coincidence", r.coincidence, gain_flag);
        detail::append(out, "accidental", r.accidental, gain_flag);
        if (r.car) {
            detail::append(out, "car", *r.car, gain_flag);
        } else {
            detail::append(out, "car", detail::kNaN,
                           r.car_infinite ? "infinite" : "undefined");
        }
        detail::append(out, "snr_s", r.snr_s, std::isinf(r.snr_s) ? "no_noise" : gain_flag);
        detail::append(out, "snr_i", r.snr_i, std::isinf(r.snr_i) ? "no_noise" : gain_flag);
    }

    if (wants("optimum")) {
        if (mu->delta_s && mu->delta_i) {
            const auto opt =
                mu_opt_and_car_max(*mu->delta_s, *mu->delta_i, sc.ch_s.efficiency(),
                                   sc.ch_i.efficiency(), sc.ch_s.background_probability(),
                                   sc.ch_i.background_probability());
            if (opt.unbounded) {
                detail::append(out, "mu_both_opt", detail::kNaN, "unbounded_no_noise");
                detail::append(out, "car_max", detail::kNaN, "unbounded_no_noise");
            } else {
                detail::append(out, "mu_both_opt", *opt.mu_both_opt);
                detail::append(out, "car_max", *opt.car_max);
            }
            detail::append(out, "mu_si_opt", opt.mu_si_opt);
        } else {
            for (const char* name : {"mu_both_opt", "car_max", "mu_si_opt"}) {
                detail::append(out, name, detail::kNaN, "undefined_delta");
            }
        }
    }

    if (wants("visibility")) {
        EntangledSourceSpec ent;
        if (sc.ent_mu_explicit) {
            ent = sc.ent_mu;
        } else {
            ent.mu_s = mu->mu_s;
            ent.mu_i = mu->mu_i;
            ent.mu_both = mu->mu_both;
            ent.v_int = sc.v_int;
        }
        const double power_mw = sc.ch_s.launch_power_mw;
        if (sc.optimize_mu && ent.mu_s > 0.0) {
            for (auto basis : {'x', 'z'}) {
                auto g = golden_section_max(
                    [&](double ls) {
                        const auto rep = visibility_report(ent.scaled(std::exp(ls)), sc.ch_s,
                                                           sc.ch_i, sc.receiver, power_mw);
                        return basis == 'x' ? rep.v_x : rep.v_z;
                    },
                    std::log(1e-7 / ent.mu_s), std::log(0.1 / ent.mu_s));
                detail::append(out, basis == 'x' ? "v_x" : "v_z", g.fx,
                               g.converged ? "" : "optimizer_not_converged");
                detail::append(out, basis == 'x' ? "mu_scale_x" : "mu_scale_z",
                               std::exp(g.x));
            }
        } else {
            const auto rep = visibility_report(ent, sc.ch_s, sc.ch_i, sc.receiver, power_mw);
            detail::append(out, "v_x", rep.v_x);
            detail::append(out, "v_z", rep.v_z);
        }
    }

    if (wants("width_ratio")) {
        detail::append(out, "tau_ratio_s",
                       photon_pump_width_ratio(sc.source, sc.filter_s, sc.form, sc.grid));
        // The idler arm reuses the same estimator through the axis-swap
        // symmetry (theta -> pi/2 - theta exchanges the arms).
        SourceSpec swapped = sc.source;
        swapped.center_s = sc.source.center_i;
        swapped.center_i = sc.source.center_s;
        swapped.pm_angle = kPi / 2.0 - sc.source.pm_angle;
        if (swapped.pm_angle < 0.0) swapped.pm_angle += kPi;
        detail::append(out, "tau_ratio_i",
                       photon_pump_width_ratio(swapped, sc.filter_i, sc.form, sc.grid));
    }

    return out;
}

namespace detail {

inline std::vector<SweepAxis> parse_axes(const json& base)
{
    std::vector<SweepAxis> axes;
    if (!base.contains("sweep")) {
        return axes;
    }
    std::vector<std::string> errors;
    const auto& sweep = base.at("sweep");
    if (!sweep.contains("axes") || !sweep.at("axes").is_array()) {
        throw SchemaError({"/sweep/axes: expected an array of {path, values}"});
    }
    for (const auto& a : sweep.at("axes")) {
        SweepAxis axis;
        if (a.contains("path") && a.at("path").is_string()) {
            axis.paths.push_back(a.at("path").get<std::string>());
        } else if (a.contains("paths") && a.at("paths").is_array()) {
            for (const auto& p : a.at("paths")) {
                if (!p.is_string()) {
                    errors.push_back("/sweep/axes: 'paths' entries must be strings");
                    break;
                }
                axis.paths.push_back(p.get<std::string>());
            }
        }
        if (axis.paths.empty()) {
            errors.push_back("/sweep/axes: each axis needs a string 'path' or array 'paths'");
            continue;
        }
        bool paths_ok = true;
        for (const auto& p : axis.paths) {
            try {
                if (!base.contains(json::json_pointer(p))) {
                    errors.push_back(p + ": sweep path not present in the scenario");
                    paths_ok = false;
                }
            } catch (const json::exception&) {
                errors.push_back(p + ": not a valid JSON pointer");
                paths_ok = false;
            }
        }
        if (!paths_ok) continue;
        if (!a.contains("values") || !a.at("values").is_array() || a.at("values").empty()) {
            errors.push_back(axis.label() + ": sweep axis needs a non-empty 'values' array");
            continue;
        }
        for (const auto& v : a.at("values")) {
            if (v.is_number() && !std::isfinite(v.get<double>())) {
                errors.push_back(axis.label() + ": sweep values must be finite");
                break;
            }
            axis.values.push_back(v);
        }
        axes.push_back(std::move(axis));
    }
    if (!errors.empty()) {
        throw SchemaError(errors);
    }
    return axes;
}

} // namespace detail

inline SweepResult run_scenario_json(const json& base, int threads = 0)
{
    const auto axes = detail::parse_axes(base);

    // Validate the base point (and every patched point later).
    json stripped = base;
    stripped.erase("sweep");
    Scenario::from_json(stripped);

    std::size_t total = 1;
    for (const auto& a : axes) {
        total *= a.values.size();
    }

    SweepResult result;
    result.version = kVersion;
    result.scenario_hash = detail::fnv1a_hex(base.dump());
    for (const auto& a : axes) {
        result.axis_paths.push_back(a.label());
    }
    {
        const Scenario sc = Scenario::from_json(stripped);
        char buf[96];
        std::snprintf(buf, sizeof buf, "points=%d truncation=%g phase_matching=%s",
                      sc.grid.points_s, sc.grid.truncation,
                      sc.form == PhaseMatchForm::sinc ? "sinc" : "gaussian");
        result.grid_note = buf;
    }

    std::vector<std::vector<SweepRow>> slots(total);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(total);

    const auto worker = [&]() {
        for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
            std::vector<std::string> axis_text(axes.size());
            json point = stripped;
            std::size_t rest = k;
            for (std::size_t a = 0; a < axes.size(); ++a) {
                const auto& axis = axes[a];
                const std::size_t idx = rest % axis.values.size();
                rest /= axis.values.size();
                for (const auto& p : axis.paths) {
                    point[json::json_pointer(p)] = axis.values[idx];
                }
                axis_text[a] = detail::axis_value_text(axis.values[idx]);
            }
            try {
                const Scenario sc = Scenario::from_json(point);
                for (auto& q : compute_quantities(sc)) {
                    slots[k].push_back({axis_text, std::move(q.quantity), q.value,
                                        std::move(q.flag)});
                }
            } catch (const Error& e) {
                slots[k].push_back({axis_text, "error", detail::kNaN, e.what()});
            } catch (...) {
                failures[k] = std::current_exception();
                return;
            }
        }
    };

    int n_threads = threads > 0 ? threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min({n_threads, 16, static_cast<int>(total)}));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    for (auto& slot : slots) {
        for (auto& row : slot) {
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

inline SweepResult run_scenario(const std::string& path, int threads = 0)
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
    return run_scenario_json(j, threads);
}

inline void SweepResult::to_csv(std::ostream& out) const
{
    out << "# pairfilt " << version << '\n';
    out << "# scenario_hash=" << scenario_hash << '\n';
    out << "# grid " << grid_note << '\n';
    for (const auto& p : axis_paths) {
        out << "axis:" << p << ',';
    }
    out << "quantity,value,flag\n";
    for (const auto& row : rows) {
        for (const auto& v : row.axis_values) {
            out << v << ',';
        }
        out << row.quantity << ',' << detail::format_value(row.value) << ',' << row.flag
            << '\n';
    }
}

inline void SweepResult::to_json(std::ostream& out) const
{
    json j;
    j["provenance"] = {{"tool", "pairfilt"},
                       {"version", version},
                       {"scenario_hash", scenario_hash},
                       {"grid", grid_note}};
    j["axes"] = axis_paths;
    j["rows"] = json::array();
    for (const auto& row : rows) {
        json r;
        r["axes"] = row.axis_values;
        r["quantity"] = row.quantity;
        if (std::isfinite(row.value)) {
            r["value"] = row.value;
        } else {
            r["value"] = detail::format_value(row.value); // "inf"/"nan" as text
        }
        r["flag"] = row.flag;
        j["rows"].push_back(std::move(r));
    }
    out << j.dump(2) << '\n';
}

} // namespace pairfilt
