#ifndef EARFIT_HORN_FEM_HPP
#define EARFIT_HORN_FEM_HPP

#include "earfit/acoustics.hpp"
#include "earfit/area_function.hpp"
#include "earfit/eardrum.hpp"
#include "earfit/tridiagonal.hpp"

#include <span>
#include <vector>

namespace earfit {

/// Horn equation on [0, l] driven by a volume velocity at x = 0 and closed by
/// the eardrum impedance at x = l.
struct HornProblem {
    AreaFunctionParams area;
    EardrumLoad load;
    Medium medium;
    double volume_velocity = 1.0;  ///< q, m^3/s

    void validate() const;
};

/// Element count for linear elements at one frequency:
/// N = ceil(4 max(1 m * l / lambda^2, 1)).
int element_count(double length, double wavelength);

/// Mesh selection. By default N follows element_count(); `refinement`
/// multiplies it, `fixed_elements > 0` overrides it.
struct MeshOptions {
    int fixed_elements = 0;
    int refinement = 1;

    int elements_for(double length, double wavelength) const;
};

/// Linear-element discretization of the horn problem at one frequency.
///
/// The matrices are kept in tridiagonal form. `mass` already carries the k^2
/// factor, so the system is (stiffness - mass + robin e_N e_N^T) c = load e_0.
struct HornDiscretization {
    double frequency = 0.0;
    int elements = 0;
    std::vector<double> nodes;
    TridiagonalSystem stiffness;
    TridiagonalSystem mass;
    Complex robin{};  ///< R_NN = i w rho / Z_d
    Complex load{};   ///< F_0 = i w rho q
    std::vector<Complex> pressures;

    /// Assembled A - M + R.
    TridiagonalSystem system_matrix() const;
    Complex entrance_pressure() const { return pressures.front(); }
    Complex eardrum_pressure() const { return pressures.back(); }
};

HornDiscretization assemble(const HornProblem& problem, double frequency_hz,
                            const MeshOptions& mesh = {});

/// Assembles and solves; throws NumericalFailure carrying the frequency when
/// the system cannot be solved.
HornDiscretization solve(const HornProblem& problem, double frequency_hz,
                         const MeshOptions& mesh = {});

struct EndPressures {
    Complex entrance;
    Complex eardrum;
};

/// Reusable workspace for the hot loop of the fit. Holds no state between
/// calls beyond scratch buffers, so one instance per thread suffices.
class HornSolver {
public:
    EndPressures solve_ends(const HornProblem& problem, double frequency_hz,
                            const MeshOptions& mesh = {});

private:
    TridiagonalSystem system_;
    std::vector<Complex> rhs_;
    std::vector<Complex> x_;
    std::vector<double> area_nodes_;
    TridiagonalSolver solver_;
};

struct ImpedancePair {
    ImpedanceSpectrum input;     ///< Z_in = p(0)/q
    ImpedanceSpectrum transfer;  ///< Z_tr = p(l)/q
};

/// Input and transfer impedance over `grid`, one independent solve per
/// frequency, distributed across OpenMP threads.
ImpedancePair impedances(const HornProblem& problem, std::span<const double> grid,
                         const MeshOptions& mesh = {});

/// Single-threaded reference for impedances().
ImpedancePair impedances_serial(const HornProblem& problem, std::span<const double> grid,
                                const MeshOptions& mesh = {});

/// Z_in = -i (rho c / S) cot(k l) of a uniform duct with a rigid end.
Complex rigid_cylinder_input_impedance(double area, double length, const Medium& medium,
                                       double frequency_hz);

} // namespace earfit

#endif
