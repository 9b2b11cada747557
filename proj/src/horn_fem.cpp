#include "earfit/horn_fem.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#include <omp.h>

namespace earfit {

void HornProblem::validate() const {
    area.validate();
    medium.validate();
    if (load.mode == TerminationMode::two_resonator_with_cone)
        load.resonators.validate();
    if (volume_velocity == 0.0 || !std::isfinite(volume_velocity))
        throw std::invalid_argument("volume velocity must be nonzero and finite");
}

int element_count(double length, double wavelength) {
    if (!(length > 0.0) || !(wavelength > 0.0))
        throw std::invalid_argument("element count needs positive length and wavelength");
    constexpr double unit_length = 1.0;  // m, makes l / lambda^2 dimensionless
    const double n = 4.0 * std::max(unit_length * length / (wavelength * wavelength), 1.0);
    return static_cast<int>(std::ceil(n));
}

int MeshOptions::elements_for(double length, double wavelength) const {
    if (fixed_elements > 0)
        return fixed_elements;
    if (refinement < 1)
        throw std::invalid_argument("mesh refinement must be >= 1");
    return refinement * element_count(length, wavelength);
}

namespace {

struct FrequencyTerms {
    int elements;
    double h;
    double k2;
    Complex robin;
    Complex load;
};

FrequencyTerms frequency_terms(const HornProblem& p, double frequency_hz, const MeshOptions& mesh) {
    const FrequencyPoint fp(frequency_hz, p.medium);
    FrequencyTerms t{};
    t.elements = mesh.elements_for(p.area.length, fp.wavelength());
    t.h = p.area.length / t.elements;
    t.k2 = fp.wavenumber() * fp.wavenumber();
    const Complex i_omega_rho{0.0, fp.angular_frequency() * p.medium.density};
    const Complex admittance = y_drum(p.load, p.medium, frequency_hz);
    if (!std::isfinite(admittance.real()) || !std::isfinite(admittance.imag()))
        throw std::domain_error("eardrum impedance is zero: Robin term is singular");
    t.robin = i_omega_rho * admittance;
    // Volume velocity q flows into the duct at x = 0.
    t.load = i_omega_rho * p.volume_velocity;
    return t;
}

// Visits each element with its Simpson-weighted integrals:
//   stiffness  S_bar / h * [[1, -1], [-1, 1]],  S_bar = (S_a + 4 S_m + S_b) / 6
//   mass       h / 6 * [[S_a + S_m, S_m], [S_m, S_m + S_b]]      (before k^2)
template <typename Visit>
void for_each_element(const AreaFunctionParams& area, int elements, double h,
                      std::vector<double>& node_area, Visit&& visit) {
    node_area.resize(static_cast<std::size_t>(elements) + 1);
    for (int n = 0; n <= elements; ++n) {
        const double x = (n == elements) ? area.length : n * h;
        node_area[static_cast<std::size_t>(n)] = detail::area_unchecked(area, x);
    }
    for (int e = 0; e < elements; ++e) {
        const double sa = node_area[static_cast<std::size_t>(e)];
        const double sb = node_area[static_cast<std::size_t>(e) + 1];
        const double sm = detail::area_unchecked(area, (e + 0.5) * h);
        const double stiff = (sa + 4.0 * sm + sb) / (6.0 * h);
        const double m_aa = h * (sa + sm) / 6.0;
        const double m_ab = h * sm / 6.0;
        const double m_bb = h * (sm + sb) / 6.0;
        visit(static_cast<std::size_t>(e), stiff, m_aa, m_ab, m_bb);
    }
}

} // namespace

TridiagonalSystem HornDiscretization::system_matrix() const {
    TridiagonalSystem s;
    s.resize(stiffness.size());
    for (std::size_t i = 0; i < s.diag.size(); ++i)
        s.diag[i] = stiffness.diag[i] - mass.diag[i];
    for (std::size_t i = 0; i < s.upper.size(); ++i) {
        s.upper[i] = stiffness.upper[i] - mass.upper[i];
        s.lower[i] = stiffness.lower[i] - mass.lower[i];
    }
    s.diag.back() += robin;
    return s;
}

HornDiscretization assemble(const HornProblem& problem, double frequency_hz,
                            const MeshOptions& mesh) {
    problem.validate();
    const FrequencyTerms t = frequency_terms(problem, frequency_hz, mesh);

    HornDiscretization d;
    d.frequency = frequency_hz;
    d.elements = t.elements;
    const auto n_nodes = static_cast<std::size_t>(t.elements) + 1;
    d.nodes.resize(n_nodes);
    for (std::size_t n = 0; n < n_nodes; ++n)
        d.nodes[n] = (n + 1 == n_nodes) ? problem.area.length : static_cast<double>(n) * t.h;
    d.stiffness.resize(n_nodes);
    d.mass.resize(n_nodes);

    std::vector<double> node_area;
    for_each_element(problem.area, t.elements, t.h, node_area,
                     [&](std::size_t e, double stiff, double m_aa, double m_ab, double m_bb) {
                         d.stiffness.diag[e] += stiff;
                         d.stiffness.diag[e + 1] += stiff;
                         d.stiffness.upper[e] -= stiff;
                         d.stiffness.lower[e] -= stiff;
                         d.mass.diag[e] += t.k2 * m_aa;
                         d.mass.diag[e + 1] += t.k2 * m_bb;
                         d.mass.upper[e] += t.k2 * m_ab;
                         d.mass.lower[e] += t.k2 * m_ab;
                     });
    d.robin = t.robin;
    d.load = t.load;
    return d;
}

HornDiscretization solve(const HornProblem& problem, double frequency_hz,
                         const MeshOptions& mesh) {
    HornDiscretization d = assemble(problem, frequency_hz, mesh);
    const TridiagonalSystem system = d.system_matrix();
    std::vector<Complex> rhs(system.size());
    rhs.front() = d.load;
    d.pressures.resize(system.size());
    try {
        TridiagonalSolver solver;
        solver.solve(system, rhs, d.pressures);
    } catch (const SingularSystem& e) {
        throw NumericalFailure(std::string("horn solve failed: ") + e.what(), frequency_hz);
    }
    return d;
}

EndPressures HornSolver::solve_ends(const HornProblem& problem, double frequency_hz,
                                    const MeshOptions& mesh) {
    const FrequencyTerms t = frequency_terms(problem, frequency_hz, mesh);
    const auto n_nodes = static_cast<std::size_t>(t.elements) + 1;
    system_.resize(n_nodes);
    for_each_element(problem.area, t.elements, t.h, area_nodes_,
                     [&](std::size_t e, double stiff, double m_aa, double m_ab, double m_bb) {
                         system_.diag[e] += stiff - t.k2 * m_aa;
                         system_.diag[e + 1] += stiff - t.k2 * m_bb;
                         const double off = -stiff - t.k2 * m_ab;
                         system_.upper[e] += off;
                         system_.lower[e] += off;
                     });
    system_.diag.back() += t.robin;
    rhs_.assign(n_nodes, Complex{});
    rhs_.front() = t.load;
    x_.resize(n_nodes);
    try {
        solver_.solve(system_, rhs_, x_);
    } catch (const SingularSystem& e) {
        throw NumericalFailure(std::string("horn solve failed: ") + e.what(), frequency_hz);
    }
    return {x_.front(), x_.back()};
}

namespace {

ImpedancePair to_pair(std::span<const double> grid, const std::vector<Complex>& zin,
                      const std::vector<Complex>& ztr) {
    std::vector<double> f(grid.begin(), grid.end());
    return {ImpedanceSpectrum(SpectrumKind::input, f, zin),
            ImpedanceSpectrum(SpectrumKind::transfer, f, ztr)};
}

void check_grid(std::span<const double> grid) {
    if (grid.empty())
        throw std::invalid_argument("impedance grid is empty");
}

} // namespace

ImpedancePair impedances_serial(const HornProblem& problem, std::span<const double> grid,
                                const MeshOptions& mesh) {
    problem.validate();
    check_grid(grid);
    std::vector<Complex> zin(grid.size()), ztr(grid.size());
    HornSolver solver;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const EndPressures p = solver.solve_ends(problem, grid[i], mesh);
        zin[i] = p.entrance / problem.volume_velocity;
        ztr[i] = p.eardrum / problem.volume_velocity;
    }
    return to_pair(grid, zin, ztr);
}

ImpedancePair impedances(const HornProblem& problem, std::span<const double> grid,
                         const MeshOptions& mesh) {
    problem.validate();
    check_grid(grid);
    const auto n = static_cast<std::ptrdiff_t>(grid.size());
    std::vector<Complex> zin(grid.size()), ztr(grid.size());

    // Exceptions cannot leave an OpenMP region; keep the lowest failing index.
    std::ptrdiff_t failed_at = n;
    std::exception_ptr failure;

#pragma omp parallel
    {
        HornSolver solver;
#pragma omp for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            try {
                const EndPressures p = solver.solve_ends(problem, grid[idx], mesh);
                zin[idx] = p.entrance / problem.volume_velocity;
                ztr[idx] = p.eardrum / problem.volume_velocity;
            } catch (...) {
#pragma omp critical(earfit_impedance_failure)
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    return to_pair(grid, zin, ztr);
}

Complex rigid_cylinder_input_impedance(double area, double length, const Medium& medium,
                                       double frequency_hz) {
    const FrequencyPoint fp(frequency_hz, medium);
    const double kl = fp.wavenumber() * length;
    const double characteristic = medium.density * medium.speed_of_sound / area;
    return Complex{0.0, -characteristic * std::cos(kl) / std::sin(kl)};
}

} // namespace earfit
