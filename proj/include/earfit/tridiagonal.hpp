#ifndef EARFIT_TRIDIAGONAL_HPP
#define EARFIT_TRIDIAGONAL_HPP

#include "earfit/acoustics.hpp"

#include <span>
#include <vector>

namespace earfit {

/// Complex tridiagonal system. `lower[i]` couples row i+1 to column i,
/// `upper[i]` couples row i to column i+1.
struct TridiagonalSystem {
    std::vector<Complex> lower;
    std::vector<Complex> diag;
    std::vector<Complex> upper;

    std::size_t size() const { return diag.size(); }
    void resize(std::size_t n);
};

enum class TridiagonalMethod { thomas, pivoted };

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scratch buffers so repeated solves do not allocate.
class TridiagonalSolver {
public:
    /// Pivot threshold, relative to the row norm, below which elimination
    /// without pivoting is abandoned.
    static constexpr double kPivotTolerance = 1e-14;

    /// Solves system * x = rhs into `x`. Tries plain elimination first and
    /// falls back to partial pivoting on a tiny pivot. Returns the method used.
    TridiagonalMethod solve(const TridiagonalSystem& system, std::span<const Complex> rhs,
                            std::span<Complex> x);

    /// Partially pivoted elimination only (LAPACK gtsv ordering).
    void solve_pivoted(const TridiagonalSystem& system, std::span<const Complex> rhs,
                       std::span<Complex> x);

private:
    bool try_thomas(const TridiagonalSystem& system, std::span<const Complex> rhs,
                    std::span<Complex> x);

    std::vector<Complex> d_, du_, dl_, b_;
};

} // namespace earfit

#endif
