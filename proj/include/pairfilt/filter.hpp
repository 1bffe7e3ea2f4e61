// filter.hpp — spectral filter transmission models
//
// A FilterSpec describes one passband: Gaussian, super-Gaussian ("flat-top"
// of integer order n), a tabulated measured curve, or an ideal all-pass.
// transmission() evaluates the normalized transmission function; for the
// parametric shapes its value at center +- fwhm/2 is exactly 1/2.
//
// When a filter is applied to a joint spectral amplitude, the parametric
// transmission functions multiply the amplitude directly, while tabulated
// curves are treated as measured *intensity* transmission and square-rooted
// first (amplitude_transmission()).

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pairfilt/errors.hpp"
#include "pairfilt/units.hpp"

namespace pairfilt {

enum class FilterShape {
    gaussian,
    flat_top,
    tabulated,
    all_pass,
};

struct FilterSpec {
    FilterShape shape = FilterShape::all_pass;
    double fwhm = 0.0;   // rad/s, parametric shapes only
    double center = 0.0; // rad/s, absolute
    int order = 4;       // flat-top exponent n (n = 1 reduces to Gaussian)

    // Tabulated intensity transmission, strictly increasing in detuning (rad/s).
    std::vector<std::pair<double, double>> table;

    static FilterSpec make_gaussian(double fwhm, double center = 0.0)
    {
        FilterSpec f;
        f.shape = FilterShape::gaussian;
        f.fwhm = fwhm;
        f.center = center;
        f.validate();
        return f;
    }

    static FilterSpec make_flat_top(double fwhm, double center = 0.0, int order = 4)
    {
        FilterSpec f;
        f.shape = FilterShape::flat_top;
        f.fwhm = fwhm;
        f.center = center;
        f.order = order;
        f.validate();
        return f;
    }

    static FilterSpec make_tabulated(std::vector<std::pair<double, double>> points,
                                     double center = 0.0)
    {
        FilterSpec f;
        f.shape = FilterShape::tabulated;
        f.table = std::move(points);
        f.center = center;
        f.validate();
        return f;
    }

    static FilterSpec make_all_pass()
    {
        return FilterSpec{};
    }

    // Wavelength-facing constructors: FWHM given in pm at a center wavelength.
    static FilterSpec gaussian_pm(double fwhm_pm, double lambda0_nm)
    {
        return make_gaussian(omega_fwhm_from_pm(fwhm_pm, lambda0_nm),
                             wavelength_to_omega(lambda0_nm * 1e-9));
    }

    static FilterSpec flat_top_pm(double fwhm_pm, double lambda0_nm, int order = 4)
    {
        return make_flat_top(omega_fwhm_from_pm(fwhm_pm, lambda0_nm),
                             wavelength_to_omega(lambda0_nm * 1e-9), order);
    }

    void validate() const
    {
        switch (shape) {
        case FilterShape::gaussian:
            if (!(fwhm > 0.0)) {
                throw DomainError("FilterSpec: gaussian fwhm must be positive");
            }
            break;
        case FilterShape::flat_top:
            if (!(fwhm > 0.0)) {
                throw DomainError("FilterSpec: flat_top fwhm must be positive");
            }
            if (order < 1) {
                throw DomainError("FilterSpec: flat_top order must be >= 1");
            }
            break;
        case FilterShape::tabulated: {
            if (table.size() < 2) {
                throw DomainError("FilterSpec: tabulated filter needs at least 2 points");
            }
            double prev = table.front().first;
            for (std::size_t k = 0; k < table.size(); ++k) {
                const auto& [det, t] = table[k];
                if (k > 0 && !(det > prev)) {
                    throw DomainError("FilterSpec: tabulated detunings must be strictly increasing");
                }
                if (!(t >= 0.0 && t <= 1.0)) {
                    throw DomainError("FilterSpec: tabulated transmission must lie in [0, 1]");
                }
                prev = det;
            }
            break;
        }
        case FilterShape::all_pass:
            break;
        }
    }

    // Normalized transmission function. Parametric shapes peak at exactly 1.
    double transmission(double omega) const
    {
        const double d = omega - center;
        switch (shape) {
        case FilterShape::gaussian: {
            const double s = fwhm_to_sigma(fwhm);
            return std::exp(-d * d / (2.0 * s * s));
        }
        case FilterShape::flat_top: {
            // Width calibrated so the transmission curve itself has the
            // requested FWHM for any order.
            const double s = fwhm / (2.0 * std::pow(2.0 * std::numbers::ln2, 1.0 / (2.0 * order)));
            return std::exp(-0.5 * std::pow(d * d / (s * s), order));
        }
        case FilterShape::tabulated:
            return interpolate(d);
        case FilterShape::all_pass:
            return 1.0;
        }
        return 0.0;
    }

    // Amplitude-level transfer applied to a joint spectral amplitude.
    double amplitude_transmission(double omega) const
    {
        if (shape == FilterShape::tabulated) {
            return std::sqrt(transmission(omega));
        }
        return transmission(omega);
    }

private:
    double interpolate(double detuning) const
    {
        if (detuning <= table.front().first || detuning >= table.back().first) {
            // Exactly at an endpoint counts as inside.
            if (detuning == table.front().first) return table.front().second;
            if (detuning == table.back().first) return table.back().second;
            return 0.0;
        }
        auto hi = std::upper_bound(table.begin(), table.end(), detuning,
                                   [](double v, const auto& p) { return v < p.first; });
        auto lo = hi - 1;
        const double w = (detuning - lo->first) / (hi->first - lo->first);
        return lo->second + w * (hi->second - lo->second);
    }
};

// Reads a two-column table of (wavelength detuning in pm, intensity
// transmission in [0, 1]). Lines starting with '#' are comments; an optional
// single header line is skipped. Columns may be separated by commas or
// whitespace.
inline FilterSpec load_tabulated_filter_csv(const std::string& path, double lambda0_nm)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open tabulated filter file: " + path);
    }

    std::vector<std::pair<double, double>> points;
    std::string line;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::string cleaned = line;
        std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
        std::istringstream ss(cleaned);
        double pm = 0.0, t = 0.0;
        if (!(ss >> pm >> t)) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw Error("malformed line in tabulated filter file " + path + ": " + line);
        }
        header_allowed = false;
        points.emplace_back(omega_fwhm_from_pm(pm, lambda0_nm), t);
    }
    if (points.size() < 2) {
        throw Error("tabulated filter file has fewer than 2 data rows: " + path);
    }
    return FilterSpec::make_tabulated(std::move(points),
                                      wavelength_to_omega(lambda0_nm * 1e-9));
}

} // namespace pairfilt
