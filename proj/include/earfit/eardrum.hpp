#ifndef EARFIT_EARDRUM_HPP
#define EARFIT_EARDRUM_HPP

#include "earfit/acoustics.hpp"

namespace earfit {

/// Two damped resonators in parallel. The second level is stored as an
/// offset from the first, so L02 >= L01 whenever the offset is non-negative.
struct TwoResonatorParams {
    double level_db = 161.0;        ///< L01, dB re 1 Pa s/m^3
    double level_offset_db = 20.0;  ///< L02 - L01, dB
    double quality1 = 1.2;
    double quality2 = 1.2;
    double resonance1_hz = 900.0;
    double resonance2_hz = 4000.0;

    double level2_db() const { return level_db + level_offset_db; }
    void validate() const;
};

/// Lumped compliance of the innermost part of the canal.
struct ConeLoad {
    double volume = 2.62e-8;  ///< m^3

    static ConeLoad right_circular(double radius, double height);
};

enum class TerminationMode { two_resonator_with_cone, rigid };

/// Stand-in for a rigid eardrum. Finite so the Robin term stays well defined.
inline constexpr Complex kRigidEardrumImpedance{8.4e22, -8.8e15};

struct EardrumLoad {
    TwoResonatorParams resonators;
    ConeLoad cone;
    TerminationMode mode = TerminationMode::two_resonator_with_cone;

    static EardrumLoad rigid() { return {{}, {}, TerminationMode::rigid}; }
};

/// Normalized detuning w/(2 pi f0) - 2 pi f0/w.
double detuning(double frequency_hz, double resonance_hz);

Complex z_ed(const TwoResonatorParams& params, double frequency_hz);
Complex z_vol(const ConeLoad& cone, const Medium& medium, double frequency_hz);

/// Admittance 1/Z_d of the termination. Zero cone volume is allowed and simply
/// drops the compliance branch.
Complex y_drum(const EardrumLoad& load, const Medium& medium, double frequency_hz);
Complex z_drum(const EardrumLoad& load, const Medium& medium, double frequency_hz);

} // namespace earfit

#endif
