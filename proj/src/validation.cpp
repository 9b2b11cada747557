#include "earfit/fit.hpp"

#include <algorithm>
#include <cmath>

namespace earfit {

Validation validate(const ImpedanceSpectrum& fitted_ztr, const ImpedanceSpectrum& data_ztr,
                    const CostWeights& weights) {
    if (fitted_ztr.size() != data_ztr.size() || data_ztr.empty())
        throw std::invalid_argument("validation grid mismatch: different number of frequencies");
    Validation v{0.0, {}, {}};
    v.frequencies.reserve(data_ztr.size());
    v.differences.reserve(data_ztr.size());
    for (std::size_t i = 0; i < data_ztr.size(); ++i) {
        if (std::abs(fitted_ztr.frequency(i) - data_ztr.frequency(i)) > 1e-6)
            throw std::invalid_argument("validation grid mismatch at " +
                                        std::to_string(data_ztr.frequency(i)) + " Hz");
        const LevelPhaseDiff d = level_phase_diff(fitted_ztr.value(i), data_ztr.value(i));
        const double decades = d.level_db / 20.0;
        v.jval += weights.magnitude_weight * decades * decades +
                  weights.phase_weight * d.phase_rad * d.phase_rad;
        v.frequencies.push_back(data_ztr.frequency(i));
        v.differences.push_back(d);
    }
    return v;
}

Validation validate(const FitResult& fit, const ImpedanceSpectrum& data_ztr,
                    const CostWeights& weights) {
    return validate(fit.ztr, data_ztr, weights);
}

double quantile(std::vector<double> values, double p) {
    if (values.empty() || !(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("quantile needs data and p in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

QuantileCurves summarize(std::span<const Validation> batch) {
    if (batch.empty())
        throw std::invalid_argument("cannot summarize an empty batch");
    const std::size_t n_freq = batch.front().frequencies.size();
    for (const Validation& v : batch) {
        if (v.frequencies.size() != n_freq)
            throw std::invalid_argument("validation grid mismatch inside batch");
        for (std::size_t i = 0; i < n_freq; ++i)
            if (std::abs(v.frequencies[i] - batch.front().frequencies[i]) > 1e-6)
                throw std::invalid_argument("validation grid mismatch inside batch");
    }

    QuantileCurves q;
    q.frequencies = batch.front().frequencies;
    std::vector<double> level(batch.size()), phase(batch.size());
    for (std::size_t i = 0; i < n_freq; ++i) {
        double level_sum = 0.0, phase_sum = 0.0;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            level[b] = batch[b].differences[i].level_db;
            phase[b] = batch[b].differences[i].phase_rad;
            level_sum += level[b];
            phase_sum += phase[b];
        }
        const auto count = static_cast<double>(batch.size());
        q.level_mean.push_back(level_sum / count);
        q.phase_mean.push_back(phase_sum / count);
        q.level_q05.push_back(quantile(level, 0.05));
        q.level_q95.push_back(quantile(level, 0.95));
        q.phase_q05.push_back(quantile(phase, 0.05));
        q.phase_q95.push_back(quantile(phase, 0.95));
    }
    return q;
}

} // namespace earfit
