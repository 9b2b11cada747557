#ifndef EARFIT_NELDER_MEAD_HPP
#define EARFIT_NELDER_MEAD_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace earfit {

using Objective = std::function<double(std::span<const double>)>;

/// Box-constrained minimization problem. A coordinate with lower == upper is
/// frozen and never perturbed.
struct BoundedProblem {
    std::vector<double> lower;
    std::vector<double> upper;
    Objective objective;

    std::size_t dimension() const { return lower.size(); }
    void validate() const;
};

struct NelderMeadOptions {
    int restarts = 3;
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double x_tolerance = 1e-8;   ///< relative simplex diameter
    double f_tolerance = 1e-10;  ///< spread of vertex values
    int evals_per_dimension = 400;  ///< per-run budget is this times the free dimension
    std::optional<long> max_evals;  ///< total budget across all runs
    double initial_step = 0.05;
    double zero_step = 0.00025;
};

/// Vertices and values of one simplex, kept sorted by value.
struct SimplexState {
    std::vector<std::vector<double>> vertices;
    std::vector<double> values;
    long iterations = 0;
    long evaluations = 0;
};

struct RunDiagnostics {
    double best_value;
    long iterations;
    long evaluations;
    bool converged;
};

struct MinimizeResult {
    std::vector<double> point;
    double value;
    long evaluations = 0;
    bool eval_limit_reached = false;
    std::vector<RunDiagnostics> runs;
};

/// Nelder-Mead on the unbounded variable u with x = lower + (upper - lower) sin^2(u).
/// Runs 1 + restarts times, each restart rebuilding the simplex around the
/// previous optimum. NaN objective values count as +infinity.
MinimizeResult minimize(const BoundedProblem& problem, std::span<const double> start,
                        const NelderMeadOptions& options = {});

/// Maps a box-bounded point to the internal coordinates and back. Exposed for tests.
class BoxTransform {
public:
    BoxTransform(std::span<const double> lower, std::span<const double> upper);

    std::size_t free_dimension() const { return free_.size(); }
    std::vector<double> to_internal(std::span<const double> x) const;
    void to_external(std::span<const double> u, std::span<double> x) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<std::size_t> free_;
};

} // namespace earfit

#endif
