#include "earfit/fit.hpp"

#include <algorithm>
#include <cmath>

namespace earfit {

std::vector<Extremum> magnitude_extrema(const ImpedanceSpectrum& spectrum) {
    // Collapse runs of equal magnitude so a plateau behaves like one point
    // located at its leftmost sample.
    struct Run {
        std::size_t first;
        double magnitude;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double m = std::abs(spectrum.value(i));
        if (runs.empty() || m != runs.back().magnitude)
            runs.push_back({i, m});
    }
    std::vector<Extremum> out;
    for (std::size_t r = 1; r + 1 < runs.size(); ++r) {
        const double prev = runs[r - 1].magnitude;
        const double cur = runs[r].magnitude;
        const double next = runs[r + 1].magnitude;
        if (cur > prev && cur > next)
            out.push_back({runs[r].first, spectrum.frequency(runs[r].first), true});
        else if (cur < prev && cur < next)
            out.push_back({runs[r].first, spectrum.frequency(runs[r].first), false});
    }
    return out;
}

LengthEstimate estimate_length(const ImpedanceSpectrum& data_zin, const Medium& medium) {
    medium.validate();
    for (const Extremum& e : magnitude_extrema(data_zin)) {
        if (!e.is_maximum)
            continue;
        const double raw = medium.speed_of_sound / (2.0 * e.frequency);
        return {std::clamp(raw, kMinLength, kMaxLength), e.frequency, false};
    }
    return {kBasicLength, 0.0, true};
}

double round_up_100hz(double frequency_hz) {
    // The slack absorbs representation error in values such as 20000.000000004.
    return 100.0 * std::ceil(frequency_hz / 100.0 - 1e-9);
}

namespace {

// Nearest data-grid frequency to `f`, restricted to [lo, hi].
double snap_to_grid(std::span<const double> grid, double f, double lo, double hi) {
    auto it = std::lower_bound(grid.begin(), grid.end(), f);
    double best = 0.0;
    double best_dist = INFINITY;
    for (auto cand : {it, it == grid.begin() ? it : std::prev(it)}) {
        if (cand == grid.end())
            continue;
        const double d = std::abs(*cand - f);
        if (*cand >= lo - 1e-6 && *cand <= hi + 1e-6 && d < best_dist) {
            best = *cand;
            best_dist = d;
        }
    }
    if (!std::isfinite(best_dist))
        throw std::invalid_argument("no data frequency near " + std::to_string(f) + " Hz");
    return best;
}

} // namespace

std::vector<double> build_frequency_set(const ImpedanceSpectrum& data_zin,
                                        const FrequencySetOptions& options) {
    if (!(options.f_lo > 0.0) || !(options.f_lo < options.f_cap))
        throw std::invalid_argument("frequency set needs 0 < f_lo < f_cap");
    if (options.count < 2)
        throw std::invalid_argument("frequency set needs count >= 2");
    if (!data_zin.covers(options.f_lo, options.f_cap))
        throw std::invalid_argument("input impedance data does not cover the fit range [" +
                                    std::to_string(options.f_lo) + ", " +
                                    std::to_string(options.f_cap) + "] Hz");

    const auto grid = data_zin.frequencies();
    std::vector<double> out;
    const int n = options.count;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        const double raw = options.distribution == FrequencyDistribution::logarithmic
                               ? options.f_lo * std::pow(options.f_cap / options.f_lo, t)
                               : options.f_lo + t * (options.f_cap - options.f_lo);
        const double rounded = std::min(round_up_100hz(raw), options.f_cap);
        out.push_back(snap_to_grid(grid, rounded, options.f_lo, options.f_cap));
    }
    if (options.include_extrema) {
        for (const Extremum& e : magnitude_extrema(data_zin))
            if (e.frequency >= options.f_lo - 1e-6 && e.frequency <= options.f_cap + 1e-6)
                out.push_back(e.frequency);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty())
        throw std::invalid_argument("frequency set is empty");
    return out;
}

} // namespace earfit
