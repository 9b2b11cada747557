#ifndef EARFIT_ACOUSTICS_HPP
#define EARFIT_ACOUSTICS_HPP

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace earfit {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Properties of the air inside the canal. Defaults correspond to dry air at
/// roughly 20 degrees Celsius.
struct Medium {
    double density = 1.2;          ///< kg/m^3
    double speed_of_sound = 343.0; ///< m/s

    void validate() const;
};

/// A single excitation frequency with its derived quantities.
class FrequencyPoint {
public:
    FrequencyPoint(double frequency_hz, const Medium& medium);

    double frequency() const { return frequency_; }
    double angular_frequency() const { return omega_; }
    double wavenumber() const { return wavenumber_; }
    double wavelength() const { return wavelength_; }

private:
    double frequency_;
    double omega_;
    double wavenumber_;
    double wavelength_;
};

/// Raised when a linear solve or model evaluation breaks down at a specific
/// frequency.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double frequency_hz)
        : std::runtime_error(what), frequency_(frequency_hz) {}
    double frequency() const { return frequency_; }

private:
    double frequency_;
};

enum class SpectrumKind { input, transfer };

const char* to_string(SpectrumKind kind);

/// Complex acoustic impedance (Pa s/m^3) sampled on a strictly increasing
/// frequency grid.
class ImpedanceSpectrum {
public:
    ImpedanceSpectrum() = default;
    ImpedanceSpectrum(SpectrumKind kind, std::vector<double> frequencies,
                      std::vector<Complex> values);

    SpectrumKind kind() const { return kind_; }
    std::size_t size() const { return frequencies_.size(); }
    bool empty() const { return frequencies_.empty(); }
    std::span<const double> frequencies() const { return frequencies_; }
    std::span<const Complex> values() const { return values_; }
    double frequency(std::size_t i) const { return frequencies_[i]; }
    const Complex& value(std::size_t i) const { return values_[i]; }

    /// Index of the grid point matching `frequency_hz` to within 1e-6 Hz.
    std::optional<std::size_t> find(double frequency_hz) const;
    /// Value at `frequency_hz`; throws std::invalid_argument when absent.
    const Complex& at(double frequency_hz) const;
    /// True when the grid reaches down to `lo` and up to `hi`.
    bool covers(double lo, double hi) const;

private:
    SpectrumKind kind_ = SpectrumKind::input;
    std::vector<double> frequencies_;
    std::vector<Complex> values_;
};

struct LevelPhaseDiff {
    double level_db;
    double phase_rad;
};

/// 20 log10 |model/data| and the principal argument of model/data.
LevelPhaseDiff level_phase_diff(Complex model, Complex data);

/// Evenly spaced inclusive grid in Hz.
std::vector<double> linear_grid(double f_start, double f_end, int count);

/// The 200-point 100 Hz .. 20 kHz grid the reference spectra live on.
std::vector<double> validation_grid();

} // namespace earfit

#endif
