#include "earfit/acoustics.hpp"

#include <algorithm>
#include <cmath>

namespace earfit {

void Medium::validate() const {
    if (!(density > 0.0) || !(speed_of_sound > 0.0) || !std::isfinite(density) ||
        !std::isfinite(speed_of_sound))
        throw std::invalid_argument("medium density and speed of sound must be positive");
}

FrequencyPoint::FrequencyPoint(double frequency_hz, const Medium& medium)
    : frequency_(frequency_hz) {
    if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz))
        throw std::invalid_argument("frequency must be positive and finite");
    medium.validate();
    omega_ = 2.0 * kPi * frequency_hz;
    wavenumber_ = omega_ / medium.speed_of_sound;
    wavelength_ = medium.speed_of_sound / frequency_hz;
}

const char* to_string(SpectrumKind kind) {
    return kind == SpectrumKind::input ? "input" : "transfer";
}

ImpedanceSpectrum::ImpedanceSpectrum(SpectrumKind kind, std::vector<double> frequencies,
                                     std::vector<Complex> values)
    : kind_(kind), frequencies_(std::move(frequencies)), values_(std::move(values)) {
    if (frequencies_.size() != values_.size())
        throw std::invalid_argument("spectrum frequency and value counts differ");
    for (std::size_t i = 0; i < frequencies_.size(); ++i) {
        if (!std::isfinite(frequencies_[i]) || !std::isfinite(values_[i].real()) ||
            !std::isfinite(values_[i].imag()))
            throw std::invalid_argument("spectrum contains non-finite entries");
        if (i > 0 && !(frequencies_[i] > frequencies_[i - 1]))
            throw std::invalid_argument("spectrum frequencies must be strictly increasing");
    }
}

std::optional<std::size_t> ImpedanceSpectrum::find(double frequency_hz) const {
    constexpr double tol = 1e-6;
    auto it = std::lower_bound(frequencies_.begin(), frequencies_.end(), frequency_hz - tol);
    if (it != frequencies_.end() && std::abs(*it - frequency_hz) <= tol)
        return static_cast<std::size_t>(it - frequencies_.begin());
    return std::nullopt;
}

const Complex& ImpedanceSpectrum::at(double frequency_hz) const {
    auto idx = find(frequency_hz);
    if (!idx)
        throw std::invalid_argument("spectrum has no value at " + std::to_string(frequency_hz) +
                                    " Hz");
    return values_[*idx];
}

bool ImpedanceSpectrum::covers(double lo, double hi) const {
    if (frequencies_.empty())
        return false;
    constexpr double tol = 1e-6;
    return frequencies_.front() <= lo + tol && frequencies_.back() >= hi - tol;
}

LevelPhaseDiff level_phase_diff(Complex model, Complex data) {
    if (data == Complex{} || model == Complex{})
        throw std::domain_error("level/phase difference needs nonzero impedances");
    // Same as the level and angle of model / data, but exactly zero when the
    // two values are equal.
    const double m = std::abs(model), d = std::abs(data);
    const Complex turn = (model / m) * std::conj(data / d);
    return {20.0 * (std::log10(m) - std::log10(d)), std::arg(turn)};
}

std::vector<double> linear_grid(double f_start, double f_end, int count) {
    if (!(f_start < f_end) || count < 2 || !std::isfinite(f_start) || !std::isfinite(f_end))
        throw std::invalid_argument("linear grid needs f_start < f_end and count >= 2");
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double step = (f_end - f_start) / (count - 1);
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] = f_start + i * step;
    grid.back() = f_end;
    return grid;
}

std::vector<double> validation_grid() { return linear_grid(100.0, 20000.0, 200); }

} // namespace earfit
