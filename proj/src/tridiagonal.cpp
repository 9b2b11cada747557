#include "earfit/tridiagonal.hpp"

#include <cmath>

namespace earfit {

void TridiagonalSystem::resize(std::size_t n) {
    diag.assign(n, Complex{});
    lower.assign(n > 0 ? n - 1 : 0, Complex{});
    upper.assign(n > 0 ? n - 1 : 0, Complex{});
}

namespace {

void check_shape(const TridiagonalSystem& s, std::span<const Complex> rhs, std::span<Complex> x) {
    const std::size_t n = s.size();
    if (n == 0 || s.lower.size() != n - 1 || s.upper.size() != n - 1 || rhs.size() != n ||
        x.size() != n)
        throw std::invalid_argument("tridiagonal system has inconsistent dimensions");
}

bool finite(const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

} // namespace

TridiagonalMethod TridiagonalSolver::solve(const TridiagonalSystem& system,
                                           std::span<const Complex> rhs, std::span<Complex> x) {
    check_shape(system, rhs, x);
    if (try_thomas(system, rhs, x))
        return TridiagonalMethod::thomas;
    solve_pivoted(system, rhs, x);
    return TridiagonalMethod::pivoted;
}

bool TridiagonalSolver::try_thomas(const TridiagonalSystem& s, std::span<const Complex> rhs,
                                   std::span<Complex> x) {
    const std::size_t n = s.size();
    d_.resize(n);
    b_.resize(n);
    d_[0] = s.diag[0];
    b_[0] = rhs[0];
    for (std::size_t i = 0;; ++i) {
        double row_norm = std::abs(s.diag[i]);
        if (i > 0)
            row_norm += std::abs(s.lower[i - 1]);
        if (i + 1 < n)
            row_norm += std::abs(s.upper[i]);
        if (!(std::abs(d_[i]) > kPivotTolerance * row_norm))
            return false;
        if (i + 1 == n)
            break;
        const Complex w = s.lower[i] / d_[i];
        d_[i + 1] = s.diag[i + 1] - w * s.upper[i];
        b_[i + 1] = rhs[i + 1] - w * b_[i];
    }
    x[n - 1] = b_[n - 1] / d_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] = (b_[i] - s.upper[i] * x[i + 1]) / d_[i];
    return true;
}

void TridiagonalSolver::solve_pivoted(const TridiagonalSystem& s, std::span<const Complex> rhs,
                                      std::span<Complex> x) {
    check_shape(s, rhs, x);
    const std::size_t n = s.size();
    d_.assign(s.diag.begin(), s.diag.end());
    du_.assign(s.upper.begin(), s.upper.end());
    dl_.assign(s.lower.begin(), s.lower.end());  // reused as the second superdiagonal
    b_.assign(rhs.begin(), rhs.end());

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d_[i]) >= std::abs(dl_[i])) {
            if (d_[i] == Complex{})
                throw SingularSystem("zero pivot in tridiagonal elimination");
            const Complex fact = dl_[i] / d_[i];
            d_[i + 1] -= fact * du_[i];
            b_[i + 1] -= fact * b_[i];
            dl_[i] = Complex{};
        } else {
            // swap rows i and i+1
            const Complex fact = d_[i] / dl_[i];
            d_[i] = dl_[i];
            const Complex temp = d_[i + 1];
            d_[i + 1] = du_[i] - fact * temp;
            if (i + 2 < n) {
                dl_[i] = du_[i + 1];
                du_[i + 1] = -fact * dl_[i];
            } else {
                dl_[i] = Complex{};
            }
            du_[i] = temp;
            const Complex tb = b_[i];
            b_[i] = b_[i + 1];
            b_[i + 1] = tb - fact * b_[i + 1];
        }
    }
    if (d_[n - 1] == Complex{})
        throw SingularSystem("zero pivot in tridiagonal elimination");

    x[n - 1] = b_[n - 1] / d_[n - 1];
    if (n > 1) {
        x[n - 2] = (b_[n - 2] - du_[n - 2] * x[n - 1]) / d_[n - 2];
        for (std::size_t i = n - 2; i-- > 0;)
            x[i] = (b_[i] - du_[i] * x[i + 1] - dl_[i] * x[i + 2]) / d_[i];
    }

    for (const auto& v : x)
        if (!finite(v))
            throw SingularSystem("non-finite tridiagonal solution");
}

} // namespace earfit
