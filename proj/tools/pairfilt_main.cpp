// pairfilt — scenario-driven calculator and sweep runner for filtered
// photon-pair links.
//
//   pairfilt jsa      --scenario s.json [--export jsi.csv]
//   pairfilt rates    --scenario s.json [--mu-s 1e-4,1e-3]
//   pairfilt optimize --delta-s .. --delta-i .. --eta-s .. --eta-i .. --noise-s .. --noise-i ..
//   pairfilt optimize --scenario s.json [--threshold 0.7071]
//   pairfilt entangle --scenario s.json
//   pairfilt sweep    --scenario s.json [--threads N]
//
// All subcommands accept --out <path> and --format csv|json. Relative --out
// paths land in $PAIRFILT_OUT_DIR when that is set.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pairfilt/pairfilt.hpp"

namespace {

using namespace pairfilt;

std::string resolve_out_path(const std::string& out)
{
    namespace fs = std::filesystem;
    fs::path p(out);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("PAIRFILT_OUT_DIR")) {
            return (fs::path(dir) / p).string();
        }
    }
    return p.string();
}

void write_result(const SweepResult& result, const std::string& out, const std::string& format)
{
    std::ostringstream text;
    if (format == "json") {
        result.to_json(text);
    } else {
        result.to_csv(text);
    }
    if (out.empty()) {
        std::cout << text.str();
        return;
    }
    const std::string path = resolve_out_path(out);
    std::ofstream file(path);
    if (!file) {
        throw Error("cannot write output file: " + path);
    }
    file << text.str();
    std::cerr << "wrote " << path << "\n";
}

SweepResult as_result(std::vector<QuantityValue> rows, const json& raw)
{
    SweepResult r;
    r.version = kVersion;
    r.scenario_hash = pairfilt::detail::fnv1a_hex(raw.dump());
    for (auto& q : rows) {
        r.rows.push_back({{}, std::move(q.quantity), q.value, std::move(q.flag)});
    }
    return r;
}

void print_rows(const SweepResult& result)
{
    for (const auto& row : result.rows) {
        std::printf("%-22s %.9g", row.quantity.c_str(), row.value);
        if (!row.flag.empty()) {
            std::printf("   [%s]", row.flag.c_str());
        }
        std::printf("\n");
    }
}

void warn_flags(const SweepResult& result)
{
    for (const auto& row : result.rows) {
        if (!row.flag.empty() && row.flag != "no_noise") {
            std::cerr << "note: " << row.quantity << ": " << row.flag << "\n";
        }
    }
}

int cmd_jsa(const std::string& scenario_path, const std::string& export_path,
            const std::string& out, const std::string& format)
{
    Scenario sc = Scenario::load(scenario_path);
    sc.outputs = {"mu", "closed_form", "purity"};
    auto result = as_result(compute_quantities(sc), sc.raw);
    print_rows(result);
    warn_flags(result);
    if (!export_path.empty()) {
        const auto grid = grid_for(sc.source, sc.form, sc.filter_s, sc.filter_i, sc.grid);
        const auto jsa = build_jsa(sc.source, grid, sc.form);
        const std::string path = resolve_out_path(export_path);
        std::ofstream file(path);
        if (!file) {
            throw Error("cannot write JSI export: " + path);
        }
        write_jsi_csv(jsa, file);
        std::cerr << "wrote " << path << "\n";
    }
    if (!out.empty()) {
        write_result(result, out, format);
    }
    return 0;
}

int cmd_rates(const std::string& scenario_path, const std::vector<double>& mu_s_list,
              const std::string& out, const std::string& format)
{
    Scenario sc = Scenario::load(scenario_path);
    if (mu_s_list.empty()) {
        sc.outputs = {"mu", "rates", "optimum"};
        auto result = as_result(compute_quantities(sc), sc.raw);
        print_rows(result);
        warn_flags(result);
        if (!out.empty()) write_result(result, out, format);
        return 0;
    }

    // Sweep the singles mean at fixed heralding structure.
    const auto grid = grid_for(sc.source, sc.form, sc.filter_s, sc.filter_i, sc.grid);
    const auto jsa = build_jsa(sc.source, grid, sc.form);
    const auto base = filtered_means(jsa, sc.filter_s, sc.filter_i, sc.source.mu_total);
    if (!base.delta_s || !base.delta_i) {
        throw DomainError("rates: heralding efficiencies undefined for this scenario");
    }
    SweepResult result;
    result.version = kVersion;
    result.scenario_hash = pairfilt::detail::fnv1a_hex(sc.raw.dump());
    result.axis_paths = {"mu_s"};
    std::printf("%-12s %-12s %-12s %-12s %-12s\n", "mu_s", "S_s", "S_i", "CAR", "SNR_s");
    for (double target : mu_s_list) {
        const double scale = target / base.mu_s;
        const auto mu = make_mu_triple(target, base.mu_i * scale, base.mu_both * scale);
        const auto r = coincidences(mu, sc.ch_s, sc.ch_i);
        const std::string axis = pairfilt::detail::format_value(target);
        const std::string flag = r.low_gain_ok ? "" : "low_gain_exceeded";
        result.rows.push_back({{axis}, "s_s", r.s_s, flag});
        result.rows.push_back({{axis}, "s_i", r.s_i, flag});
        result.rows.push_back(
            {{axis}, "car", r.car ? *r.car : std::numeric_limits<double>::quiet_NaN(),
             r.car ? flag : (r.car_infinite ? "infinite" : "undefined")});
        result.rows.push_back({{axis}, "snr_s", r.snr_s, flag});
        std::printf("%-12.4g %-12.4g %-12.4g %-12.5g %-12.4g\n", target, r.s_s, r.s_i,
                    r.car.value_or(std::numeric_limits<double>::quiet_NaN()), r.snr_s);
    }
    if (!out.empty()) write_result(result, out, format);
    return 0;
}

int cmd_optimize(CLI::App* cmd, const std::string& scenario_path, double threshold,
                 const std::string& out, const std::string& format)
{
    double delta_s = 1.0, delta_i = 1.0, delta_ps = 0.0;
    double eta_s = 1.0, eta_i = 1.0, noise_s = 0.0, noise_i = 0.0;
    for (const auto* opt : cmd->get_options()) {
        (void)opt;
    }
    // Values were bound in main(); retrieve through the lookup API.
    delta_s = cmd->get_option("--delta-s")->as<double>();
    delta_i = cmd->get_option("--delta-i")->as<double>();
    delta_ps = cmd->get_option("--delta-ps")->as<double>();
    eta_s = cmd->get_option("--eta-s")->as<double>();
    eta_i = cmd->get_option("--eta-i")->as<double>();
    noise_s = cmd->get_option("--noise-s")->as<double>();
    noise_i = cmd->get_option("--noise-i")->as<double>();

    SweepResult result;
    result.version = kVersion;

    if (!scenario_path.empty()) {
        Scenario sc = Scenario::load(scenario_path);
        sc.outputs = {"mu", "optimum"};
        result = as_result(compute_quantities(sc), sc.raw);
        print_rows(result);
        warn_flags(result);

        if (sc.has_entanglement &&
            (sc.ch_s.noise_per_mw > 0.0 || sc.ch_i.noise_per_mw > 0.0)) {
            const auto ent = sc.entangled_means();
            std::vector<double> grid_dbm;
            for (double p = -60.0; p <= 30.0001; p += 1.0) grid_dbm.push_back(p);
            const auto curve = visibility_vs_power(ent, sc.ch_s, sc.ch_i, sc.receiver,
                                                   grid_dbm, sc.optimize_mu);
            const auto x_limit = pairfilt::detail::threshold_crossing(
                [&](double dbm) {
                    return visibility_vs_power(ent, sc.ch_s, sc.ch_i, sc.receiver,
                                               {dbm}, sc.optimize_mu)
                        .points.front()
                        .v_x;
                },
                -60.0, 30.0, threshold);
            if (x_limit) {
                std::printf("max_power_dbm_vx>=%.4g  %.4f\n", threshold, *x_limit);
                result.rows.push_back({{}, "max_power_dbm", *x_limit, ""});
            } else {
                std::printf("visibility below %.4g at every power in [-60, 30] dBm\n",
                            threshold);
            }
            (void)curve;
        }
        if (!out.empty()) write_result(result, out, format);
        return 0;
    }

    if (delta_ps > 0.0) {
        delta_s = delta_i = delta_ps;
    }
    const auto opt = mu_opt_and_car_max(delta_s, delta_i, eta_s, eta_i, noise_s, noise_i);
    std::vector<QuantityValue> rows;
    if (opt.unbounded) {
        rows.push_back({"mu_both_opt", std::numeric_limits<double>::quiet_NaN(),
                        "unbounded_no_noise"});
        rows.push_back({"car_max", std::numeric_limits<double>::quiet_NaN(),
                        "unbounded_no_noise"});
    } else {
        rows.push_back({"mu_both_opt", *opt.mu_both_opt, ""});
        rows.push_back({"car_max", *opt.car_max, ""});
    }
    rows.push_back({"mu_si_opt", opt.mu_si_opt, ""});
    result = as_result(std::move(rows), json::object());
    print_rows(result);
    warn_flags(result);
    if (!out.empty()) write_result(result, out, format);
    return 0;
}

int cmd_entangle(const std::string& scenario_path, const std::string& out,
                 const std::string& format)
{
    Scenario sc = Scenario::load(scenario_path);
    if (!sc.has_entanglement) {
        throw SchemaError({"/entanglement: required by the entangle command"});
    }
    const auto ent = sc.entangled_means();

    SweepResult result;
    result.version = kVersion;
    result.scenario_hash = pairfilt::detail::fnv1a_hex(sc.raw.dump());

    if (sc.power_grid_dbm.empty()) {
        const auto rep = visibility_report(ent, sc.ch_s, sc.ch_i, sc.receiver,
                                           sc.ch_s.launch_power_mw);
        result.rows.push_back({{}, "v_x", rep.v_x, rep.x_above_qkd ? "above_qkd" : ""});
        result.rows.push_back({{}, "v_y", rep.v_y, ""});
        result.rows.push_back({{}, "v_z", rep.v_z, rep.z_above_qkd ? "above_qkd" : ""});
        print_rows(result);
    } else {
        const auto curve = visibility_vs_power(ent, sc.ch_s, sc.ch_i, sc.receiver,
                                               sc.power_grid_dbm, sc.optimize_mu);
        result.axis_paths = {"power_dbm"};
        std::printf("%-12s %-10s %-10s\n", "power_dbm", "V_x", "V_z");
        for (const auto& pt : curve.points) {
            const std::string axis = pairfilt::detail::format_value(pt.power_dbm);
            const std::string flag = pt.optimizer_converged ? "" : "optimizer_not_converged";
            result.rows.push_back({{axis}, "v_x", pt.v_x, flag});
            result.rows.push_back({{axis}, "v_z", pt.v_z, flag});
            std::printf("%-12.4g %-10.5f %-10.5f\n", pt.power_dbm, pt.v_x, pt.v_z);
        }
        const auto limit_row = [&](const char* name, const std::optional<double>& v) {
            if (v) {
                result.rows.push_back({{pairfilt::detail::format_value(0.0)}, name, *v, ""});
                std::printf("%s = %.3f dBm\n", name, *v);
            } else {
                std::printf("%s: below threshold across the grid\n", name);
            }
        };
        limit_row("x_qkd_limit_dbm", curve.x_qkd_limit_dbm);
        limit_row("x_bell_limit_dbm", curve.x_bell_limit_dbm);
        limit_row("z_qkd_limit_dbm", curve.z_qkd_limit_dbm);
        limit_row("z_bell_limit_dbm", curve.z_bell_limit_dbm);
    }
    warn_flags(result);
    if (!out.empty()) write_result(result, out, format);
    return 0;
}

int cmd_sweep(const std::string& scenario_path, int threads, const std::string& out,
              const std::string& format)
{
    const auto result = run_scenario(scenario_path, threads);
    write_result(result, out, format);
    std::size_t flagged = 0;
    for (const auto& row : result.rows) {
        flagged += !row.flag.empty();
    }
    if (flagged > 0) {
        std::cerr << "note: " << flagged << " of " << result.rows.size()
                  << " rows carry flags\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"filtered photon-pair link calculator"};
    app.require_subcommand(1);

    std::string scenario_path, out, format = "csv", export_path;
    std::vector<double> mu_s_list;
    int threads = 0;
    double threshold = kBellVisibilityThreshold;

    auto add_output_opts = [&](CLI::App* cmd) {
        cmd->add_option("--out", out, "output file (CSV or JSON)");
        cmd->add_option("--format", format, "csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* jsa = app.add_subcommand("jsa", "filtered means, heralding efficiencies and purity");
    jsa->add_option("--scenario", scenario_path, "scenario JSON")->required();
    jsa->add_option("--export", export_path, "write the joint spectral intensity matrix CSV");
    add_output_opts(jsa);

    auto* rates = app.add_subcommand("rates", "singles, coincidences, CAR and SNR");
    rates->add_option("--scenario", scenario_path, "scenario JSON")->required();
    rates->add_option("--mu-s", mu_s_list, "evaluate the CAR at these signal means")
        ->delimiter(',');
    add_output_opts(rates);

    auto* optimize = app.add_subcommand("optimize", "optimal pump setting and maximum CAR");
    optimize->add_option("--scenario", scenario_path, "scenario JSON");
    optimize->add_option("--delta-s", "signal heralding efficiency")->default_val(1.0);
    optimize->add_option("--delta-i", "idler heralding efficiency")->default_val(1.0);
    optimize->add_option("--delta-ps", "symmetric heralding efficiency (overrides both)")
        ->default_val(0.0);
    optimize->add_option("--eta-s", "signal channel efficiency")->default_val(1.0);
    optimize->add_option("--eta-i", "idler channel efficiency")->default_val(1.0);
    optimize->add_option("--noise-s", "signal background probability per gate")
        ->default_val(0.0);
    optimize->add_option("--noise-i", "idler background probability per gate")
        ->default_val(0.0);
    optimize->add_option("--threshold", threshold, "visibility threshold for the power limit");
    add_output_opts(optimize);

    auto* entangle = app.add_subcommand("entangle", "entanglement visibility, optionally vs power");
    entangle->add_option("--scenario", scenario_path, "scenario JSON")->required();
    add_output_opts(entangle);

    auto* sweep = app.add_subcommand("sweep", "run the scenario's sweep axes");
    sweep->add_option("--scenario", scenario_path, "scenario JSON")->required();
    sweep->add_option("--threads", threads, "worker threads (default: hardware)");
    add_output_opts(sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (jsa->parsed()) return cmd_jsa(scenario_path, export_path, out, format);
        if (rates->parsed()) return cmd_rates(scenario_path, mu_s_list, out, format);
        if (optimize->parsed()) return cmd_optimize(optimize, scenario_path, threshold, out, format);
        if (entangle->parsed()) return cmd_entangle(scenario_path, out, format);
        if (sweep->parsed()) return cmd_sweep(scenario_path, threads, out, format);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
