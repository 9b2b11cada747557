#include "earfit/horn_fem.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace earfit;

namespace {

HornProblem rigid_cylinder(double area = 6e-5, double length = 0.03) {
    return {AreaFunctionParams::constant(area, length, 4), EardrumLoad::rigid(), Medium{}, 1.0};
}

HornProblem reference_ear() {
    HornProblem p;
    p.area = AreaFunctionParams::constant(6e-5, 0.025, 4);
    p.area.cos_coeffs = {3e-6, -2e-6, 1e-6, 5e-7};
    p.area.sin_coeffs = {-4e-6, 1e-6, 0.0, -2e-7};
    p.load.resonators = {153.0, 4.0, 1.1, 1.5, 1000.0, 3500.0};
    p.load.cone = ConeLoad{2.62e-8};
    return p;
}

// Exact integral of the Fourier area series over [a, b].
double area_integral(const AreaFunctionParams& p, double a, double b) {
    auto prim = [&](double x) {
        double s = p.mean_area * x;
        for (std::size_t m = 1; m <= p.cos_coeffs.size(); ++m) {
            const double w = static_cast<double>(m) * oracle::pi / p.length;
            s += p.cos_coeffs[m - 1] * std::sin(w * x) / w - p.sin_coeffs[m - 1] * std::cos(w * x) / w;
        }
        return s;
    };
    return prim(b) - prim(a);
}

double level_db(Complex a, Complex b) { return 20.0 * std::log10(std::abs(a) / std::abs(b)); }
double phase(Complex a, Complex b) { return std::arg(a / b); }

} // namespace

TEST(ElementCount, Rule) {
    EXPECT_EQ(element_count(0.03, 343.0 / 100.0), 4);
    EXPECT_EQ(element_count(0.03, 343.0 / 20000.0), 408);
    // l / lambda^2 just above 1 rounds up
    EXPECT_EQ(element_count(1.0 + 1e-9, 1.0), 5);
    EXPECT_THROW(element_count(0.0, 1.0), std::invalid_argument);
    MeshOptions refined{0, 2};
    EXPECT_EQ(refined.elements_for(0.03, 343.0 / 20000.0), 816);
    MeshOptions fixed{5000, 1};
    EXPECT_EQ(fixed.elements_for(0.03, 343.0 / 20000.0), 5000);
}

TEST(HornAssembly, StiffnessMatchesExactIntegrals) {
    const auto p = reference_ear();
    const auto d = assemble(p, 1000.0, MeshOptions{200, 1});
    ASSERT_EQ(d.nodes.size(), 201u);
    for (std::size_t e = 0; e < 200; ++e) {
        const double a = d.nodes[e], b = d.nodes[e + 1], h = b - a;
        const double expected = area_integral(p.area, a, b) / (h * h);
        EXPECT_NEAR(-d.stiffness.upper[e].real(), expected, 1e-10 * expected);
        EXPECT_EQ(d.stiffness.upper[e], d.stiffness.lower[e]);
    }
}

TEST(HornAssembly, MassMatchesQuadratureOfShapeFunctions) {
    const auto p = reference_ear();
    const double f = 3000.0;
    const auto d = assemble(p, f, MeshOptions{150, 1});
    const double k = 2.0 * oracle::pi * f / p.medium.speed_of_sound;
    auto s = [&](double x) { return oracle::area_direct(p.area.mean_area, p.area.cos_coeffs, p.area.sin_coeffs, p.area.length, x); };
    // Simpson on S * phi_a * phi_b is off by about h^3 max|S''| / 240 per element
    double curvature = 0.0;
    for (std::size_t m = 1; m <= 4; ++m) {
        const double w = static_cast<double>(m) * oracle::pi / p.area.length;
        curvature += w * w * (std::abs(p.area.cos_coeffs[m - 1]) + std::abs(p.area.sin_coeffs[m - 1]));
    }
    const double h = p.area.length / 150;
    const double tol = k * k * 2.0 * h * h * h * curvature / 240.0;
    for (std::size_t e = 0; e < 150; ++e) {
        const double a = d.nodes[e], b = d.nodes[e + 1];
        const double m_ab = oracle::gauss_legendre([&](double x) { return s(x) * (b - x) * (x - a) / (h * h); }, a, b);
        EXPECT_NEAR(d.mass.upper[e].real(), k * k * m_ab, tol);
    }
    // diagonal: interior rows collect one end of two elements
    for (std::size_t n = 1; n < 150; ++n) {
        const double a = d.nodes[n - 1], b = d.nodes[n], c = d.nodes[n + 1];
        const double left = oracle::gauss_legendre([&](double x) { return s(x) * std::pow((x - a) / (b - a), 2); }, a, b);
        const double right = oracle::gauss_legendre([&](double x) { return s(x) * std::pow((c - x) / (c - b), 2); }, b, c);
        EXPECT_NEAR(d.mass.diag[n].real(), k * k * (left + right), 2.0 * tol);
    }
}

TEST(HornAssembly, SimpsonIsExactForConstantArea) {
    const auto p = rigid_cylinder();
    const auto d = assemble(p, 500.0, MeshOptions{10, 1});
    const double h = 0.003, k = 2.0 * oracle::pi * 500.0 / 343.0;
    for (std::size_t e = 0; e < 10; ++e) {
        EXPECT_NEAR(d.stiffness.upper[e].real(), -6e-5 / h, 1e-15);
        EXPECT_NEAR(d.mass.upper[e].real(), k * k * 6e-5 * h / 6.0, 1e-20);
    }
    EXPECT_NEAR(d.mass.diag[0].real(), k * k * 6e-5 * h / 3.0, 1e-20);
}

TEST(HornAssembly, StiffnessRowsSumToZero) {
    const auto d = assemble(reference_ear(), 2000.0, MeshOptions{64, 1});
    const auto& s = d.stiffness;
    for (std::size_t i = 0; i < s.size(); ++i) {
        Complex sum = s.diag[i];
        if (i > 0) sum += s.lower[i - 1];
        if (i + 1 < s.size()) sum += s.upper[i];
        EXPECT_NEAR(std::abs(sum), 0.0, 1e-12 * std::abs(s.diag[i]));
    }
}

TEST(HornAssembly, BoundaryTerms) {
    const auto p = reference_ear();
    const double f = 1500.0;
    const auto d = assemble(p, f);
    const double omega_rho = 2.0 * oracle::pi * f * p.medium.density;
    EXPECT_NEAR(d.load.real(), 0.0, 0.0);
    EXPECT_NEAR(d.load.imag(), omega_rho, 1e-12 * omega_rho);
    const Complex expected = Complex{0.0, omega_rho} / z_drum(p.load, p.medium, f);
    EXPECT_NEAR(std::abs(d.robin - expected), 0.0, 1e-12 * std::abs(expected));
    const auto sys = d.system_matrix();
    EXPECT_EQ(sys.diag.back(), d.stiffness.diag.back() - d.mass.diag.back() + d.robin);
}

TEST(HornSolve, RigidCylinderMatchesCotangentOnReferenceMesh) {
    const auto p = rigid_cylinder();
    const Medium air;
    const double first_zero = air.speed_of_sound / (4.0 * 0.03);
    for (double f : linear_grid(100.0, 20000.0, 200)) {
        const double kl = 2.0 * oracle::pi * f / air.speed_of_sound * 0.03;
        const double to_pole = std::abs(std::remainder(kl, oracle::pi));
        const double to_zero = std::abs(std::remainder(kl - oracle::pi / 2, oracle::pi));
        if (to_pole < 0.02 * oracle::pi / 2 || to_zero < 0.02 * oracle::pi / 2)
            continue;
        const auto d = solve(p, f, MeshOptions{5000, 1});
        const Complex fem = d.entrance_pressure();
        const Complex exact = oracle::rigid_cylinder_zin(6e-5, 0.03, air.density, air.speed_of_sound, f);
        EXPECT_LT(std::abs(level_db(fem, exact)), 0.1) << f;
        EXPECT_LT(std::abs(phase(fem, exact)), 0.01) << f;
    }
    // well below the first zero the default mesh already matches
    const auto d = solve(p, 1000.0);
    EXPECT_LT(1000.0, first_zero);
    const Complex exact = oracle::rigid_cylinder_zin(6e-5, 0.03, air.density, air.speed_of_sound, 1000.0);
    EXPECT_NEAR(exact.imag(), -1.12e7, 0.001e7);
    EXPECT_LT(std::abs(level_db(d.entrance_pressure(), exact)), 0.1);
    EXPECT_LT(std::abs(phase(d.entrance_pressure(), exact)), 0.01);
}

TEST(HornSolve, LibraryOracleMatchesIndependentOracle) {
    const Medium air;
    for (double f : {150.0, 1000.0, 7777.0}) {
        const Complex a = rigid_cylinder_input_impedance(6e-5, 0.03, air, f);
        const Complex b = oracle::rigid_cylinder_zin(6e-5, 0.03, air.density, air.speed_of_sound, f);
        EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12 * std::abs(b));
    }
}

TEST(HornSolve, FullSolutionMatchesDenseSolve) {
    const auto p = reference_ear();
    const auto d = solve(p, 4321.0, MeshOptions{40, 1});
    const auto sys = d.system_matrix();
    const std::size_t n = sys.size();
    std::vector<std::vector<Complex>> a(n, std::vector<Complex>(n));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = sys.diag[i];
        if (i + 1 < n) {
            a[i][i + 1] = sys.upper[i];
            a[i + 1][i] = sys.lower[i];
        }
    }
    std::vector<Complex> rhs(n);
    rhs[0] = d.load;
    const auto ref = oracle::dense_solve(a, rhs);
    for (std::size_t i = 0; i < n; ++i)
        EXPECT_NEAR(std::abs(d.pressures[i] - ref[i]), 0.0, 1e-10 * std::abs(ref[i]));
}

TEST(HornSolve, HotPathAgreesWithFullSolve) {
    const auto p = reference_ear();
    HornSolver solver;
    for (double f : {100.0, 2500.0, 9000.0, 20000.0}) {
        const auto full = solve(p, f);
        const auto ends = solver.solve_ends(p, f);
        EXPECT_NEAR(std::abs(ends.entrance - full.entrance_pressure()), 0.0, 1e-12 * std::abs(ends.entrance));
        EXPECT_NEAR(std::abs(ends.eardrum - full.eardrum_pressure()), 0.0, 1e-12 * std::abs(ends.eardrum));
    }
}

TEST(HornSolve, LinearInVolumeVelocity) {
    auto p = reference_ear();
    const auto grid = linear_grid(100.0, 20000.0, 40);
    const auto unit = impedances_serial(p, grid);
    p.volume_velocity = -3.5;
    const auto scaled = impedances_serial(p, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(std::abs(scaled.input.values()[i] - unit.input.values()[i]), 0.0, 1e-10 * std::abs(unit.input.values()[i]));
        EXPECT_NEAR(std::abs(scaled.transfer.values()[i] - unit.transfer.values()[i]), 0.0, 1e-10 * std::abs(unit.transfer.values()[i]));
    }
}

TEST(HornSolve, PassiveLoadGivesNonNegativeInputResistance) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        HornProblem p = reference_ear();
        p.area.mean_area = 6e-5 + 2e-5 * u(rng);
        p.area.length = 0.025 + 0.008 * u(rng);
        for (std::size_t m = 0; m < 4; ++m) {
            p.area.cos_coeffs[m] = std::ldexp(5e-6, -static_cast<int>(m)) * u(rng);
            p.area.sin_coeffs[m] = std::ldexp(5e-6, -static_cast<int>(m)) * u(rng);
        }
        p.load.resonators.quality1 = 1.0 + 0.5 * u(rng);
        p.load.resonators.resonance1_hz = 1000.0 + 400.0 * u(rng);
        const auto z = impedances_serial(p, linear_grid(100.0, 20000.0, 60));
        for (const Complex& v : z.input.values())
            EXPECT_GE(v.real(), -1e-9 * std::abs(v));
    }
}

TEST(HornSolve, ParallelMatchesSerialBitForBit) {
    const auto p = reference_ear();
    const auto grid = validation_grid();
    const auto par = impedances(p, grid);
    const auto ser = impedances_serial(p, grid);
    ASSERT_EQ(par.input.size(), ser.input.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(par.input.values()[i], ser.input.values()[i]);
        EXPECT_EQ(par.transfer.values()[i], ser.transfer.values()[i]);
    }
    EXPECT_EQ(par.input.kind(), SpectrumKind::input);
    EXPECT_EQ(par.transfer.kind(), SpectrumKind::transfer);
}

TEST(HornSolve, RefinementReducesError) {
    const auto p = reference_ear();
    const std::vector<double> grid{2000.0, 6000.0, 12000.0, 18000.0};
    const auto ref = impedances_serial(p, grid, MeshOptions{5000, 1});
    double prev = INFINITY;
    for (int r : {1, 2, 4}) {
        const auto z = impedances_serial(p, grid, MeshOptions{0, r});
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            worst = std::max(worst, std::abs(level_db(z.input.values()[i], ref.input.values()[i])));
        EXPECT_LT(worst, prev);
        prev = worst;
    }
}

TEST(HornSolve, InvalidProblemsRejected) {
    auto p = reference_ear();
    p.volume_velocity = 0.0;
    EXPECT_THROW(solve(p, 1000.0), std::invalid_argument);
    p = reference_ear();
    p.area.length = -0.01;
    EXPECT_THROW(solve(p, 1000.0), std::invalid_argument);
    EXPECT_THROW(impedances(reference_ear(), std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(solve(reference_ear(), -5.0), std::invalid_argument);
}

TEST(HornSolve, NonFiniteAreaReportsFrequency) {
    auto p = reference_ear();
    p.area.mean_area = NAN;
    try {
        (void)impedances(p, std::vector<double>{500.0, 800.0});
        FAIL() << "expected a failure";
    } catch (const NumericalFailure& e) {
        EXPECT_DOUBLE_EQ(e.frequency(), 500.0);
    }
}
