#include "earfit/eardrum.hpp"

#include <cmath>

namespace earfit {

void TwoResonatorParams::validate() const {
    if (!(quality1 > 0.0) || !(quality2 > 0.0))
        throw std::invalid_argument("resonator quality factors must be positive");
    if (!(resonance1_hz > 0.0) || !(resonance2_hz > 0.0))
        throw std::invalid_argument("resonance frequencies must be positive");
    if (!std::isfinite(level_db) || !std::isfinite(level_offset_db))
        throw std::invalid_argument("resonator levels must be finite");
}

ConeLoad ConeLoad::right_circular(double radius, double height) {
    if (!(radius > 0.0) || !(height > 0.0))
        throw std::invalid_argument("cone radius and height must be positive");
    return {kPi * radius * radius * height / 3.0};
}

double detuning(double frequency_hz, double resonance_hz) {
    return frequency_hz / resonance_hz - resonance_hz / frequency_hz;
}

namespace {

Complex resonator_admittance(double level_db, double quality, double detune) {
    return 1.0 / (std::pow(10.0, level_db / 20.0) * Complex{1.0, detune * quality});
}

Complex z_ed_admittance(const TwoResonatorParams& p, double f) {
    return resonator_admittance(p.level_db, p.quality1, detuning(f, p.resonance1_hz)) +
           resonator_admittance(p.level2_db(), p.quality2, detuning(f, p.resonance2_hz));
}

void check_frequency(double f) {
    if (!(f > 0.0) || !std::isfinite(f))
        throw std::invalid_argument("frequency must be positive and finite");
}

} // namespace

Complex z_ed(const TwoResonatorParams& params, double frequency_hz) {
    check_frequency(frequency_hz);
    return 1.0 / z_ed_admittance(params, frequency_hz);
}

Complex z_vol(const ConeLoad& cone, const Medium& medium, double frequency_hz) {
    check_frequency(frequency_hz);
    const double omega = 2.0 * kPi * frequency_hz;
    const double rho_c2 = medium.density * medium.speed_of_sound * medium.speed_of_sound;
    return rho_c2 / Complex{0.0, omega * cone.volume};
}

Complex y_drum(const EardrumLoad& load, const Medium& medium, double frequency_hz) {
    check_frequency(frequency_hz);
    if (load.mode == TerminationMode::rigid)
        return 1.0 / kRigidEardrumImpedance;
    const double omega = 2.0 * kPi * frequency_hz;
    const double rho_c2 = medium.density * medium.speed_of_sound * medium.speed_of_sound;
    return z_ed_admittance(load.resonators, frequency_hz) +
           Complex{0.0, omega * load.cone.volume / rho_c2};
}

Complex z_drum(const EardrumLoad& load, const Medium& medium, double frequency_hz) {
    const Complex y = y_drum(load, medium, frequency_hz);
    if (y == Complex{})
        throw std::domain_error("eardrum admittance vanishes");
    return 1.0 / y;
}

} // namespace earfit
