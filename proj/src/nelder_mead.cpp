#include "earfit/nelder_mead.hpp"

#include "earfit/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace earfit {

void BoundedProblem::validate() const {
    if (lower.empty() || lower.size() != upper.size())
        throw std::invalid_argument("bounds must be non-empty and of equal length");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw std::invalid_argument("each lower bound must not exceed its upper bound");
    if (!objective)
        throw std::invalid_argument("bounded problem has no objective");
}

BoxTransform::BoxTransform(std::span<const double> lower, std::span<const double> upper)
    : lower_(lower.begin(), lower.end()), upper_(upper.begin(), upper.end()) {
    for (std::size_t i = 0; i < lower_.size(); ++i)
        if (lower_[i] < upper_[i])
            free_.push_back(i);
}

std::vector<double> BoxTransform::to_internal(std::span<const double> x) const {
    std::vector<double> u(free_.size());
    for (std::size_t j = 0; j < free_.size(); ++j) {
        const std::size_t i = free_[j];
        const double t = std::clamp((x[i] - lower_[i]) / (upper_[i] - lower_[i]), 0.0, 1.0);
        // Offset by 2 pi keeps the relative initial simplex step away from zero.
        u[j] = 2.0 * kPi + std::asin(std::sqrt(t));
    }
    return u;
}

void BoxTransform::to_external(std::span<const double> u, std::span<double> x) const {
    for (std::size_t i = 0; i < lower_.size(); ++i)
        x[i] = lower_[i];
    for (std::size_t j = 0; j < free_.size(); ++j) {
        const std::size_t i = free_[j];
        const double s = std::sin(u[j]);
        x[i] = std::clamp(lower_[i] + (upper_[i] - lower_[i]) * s * s, lower_[i], upper_[i]);
    }
}

namespace {

using Point = std::vector<double>;

class Evaluator {
public:
    Evaluator(const BoundedProblem& problem, const BoxTransform& transform)
        : problem_(problem), transform_(transform), x_(problem.dimension()) {}

    double operator()(const Point& u) {
        transform_.to_external(u, x_);
        ++count_;
        const double v = problem_.objective(x_);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    }

    const Point& external(const Point& u) {
        transform_.to_external(u, x_);
        return x_;
    }

    long count() const { return count_; }

private:
    const BoundedProblem& problem_;
    const BoxTransform& transform_;
    Point x_;
    long count_ = 0;
};

void sort_simplex(SimplexState& s) {
    std::vector<std::size_t> order(s.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    SimplexState sorted;
    for (std::size_t i : order) {
        sorted.vertices.push_back(std::move(s.vertices[i]));
        sorted.values.push_back(s.values[i]);
    }
    s.vertices = std::move(sorted.vertices);
    s.values = std::move(sorted.values);
}

bool converged(const SimplexState& s, const NelderMeadOptions& opt) {
    const Point& best = s.vertices.front();
    double scale = 1.0;
    for (double v : best)
        scale = std::max(scale, std::abs(v));
    double diameter = 0.0;
    for (std::size_t k = 1; k < s.vertices.size(); ++k)
        for (std::size_t j = 0; j < best.size(); ++j)
            diameter = std::max(diameter, std::abs(s.vertices[k][j] - best[j]));
    const double spread = s.values.back() - s.values.front();
    return diameter <= opt.x_tolerance * scale && spread <= opt.f_tolerance;
}

Point affine(const Point& base, const Point& target, double t) {
    // base + t (target - base)
    Point out(base.size());
    for (std::size_t j = 0; j < base.size(); ++j)
        out[j] = base[j] + t * (target[j] - base[j]);
    return out;
}

struct RunOutcome {
    Point best;
    double value;
    RunDiagnostics diagnostics;
};

RunOutcome run_simplex(Evaluator& eval, const Point& start, long budget,
                       const NelderMeadOptions& opt) {
    const std::size_t n = start.size();
    const long first_eval = eval.count();
    SimplexState s;
    s.vertices.push_back(start);
    s.values.push_back(eval(start));
    for (std::size_t j = 0; j < n && eval.count() - first_eval < budget; ++j) {
        Point v = start;
        v[j] = (v[j] != 0.0) ? (1.0 + opt.initial_step) * v[j] : opt.zero_step;
        s.values.push_back(eval(v));
        s.vertices.push_back(std::move(v));
    }
    sort_simplex(s);

    bool done = s.vertices.size() < n + 1;
    bool is_converged = false;
    while (!done) {
        if (converged(s, opt)) {
            is_converged = true;
            break;
        }
        if (eval.count() - first_eval >= budget)
            break;
        ++s.iterations;

        Point centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j)
                centroid[j] += s.vertices[k][j];
        for (double& c : centroid)
            c /= static_cast<double>(n);

        const Point& worst = s.vertices.back();
        const double f_best = s.values.front();
        const double f_second_worst = s.values[n - 1];
        const double f_worst = s.values.back();

        Point reflected = affine(centroid, worst, -opt.reflection);
        const double f_reflected = eval(reflected);

        bool do_shrink = false;
        if (f_reflected < f_best) {
            Point expanded = affine(centroid, worst, -opt.reflection * opt.expansion);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                s.vertices.back() = std::move(expanded);
                s.values.back() = f_expanded;
            } else {
                s.vertices.back() = std::move(reflected);
                s.values.back() = f_reflected;
            }
        } else if (f_reflected < f_second_worst) {
            s.vertices.back() = std::move(reflected);
            s.values.back() = f_reflected;
        } else if (f_reflected < f_worst) {
            Point outside = affine(centroid, reflected, opt.contraction);
            const double f_outside = eval(outside);
            if (f_outside <= f_reflected) {
                s.vertices.back() = std::move(outside);
                s.values.back() = f_outside;
            } else {
                do_shrink = true;
            }
        } else {
            Point inside = affine(centroid, worst, opt.contraction);
            const double f_inside = eval(inside);
            if (f_inside < f_worst) {
                s.vertices.back() = std::move(inside);
                s.values.back() = f_inside;
            } else {
                do_shrink = true;
            }
        }

        if (do_shrink) {
            for (std::size_t k = 1; k <= n; ++k) {
                s.vertices[k] = affine(s.vertices.front(), s.vertices[k], opt.shrink);
                s.values[k] = eval(s.vertices[k]);
            }
        }
        sort_simplex(s);
    }

    s.evaluations = eval.count() - first_eval;
    return {s.vertices.front(), s.values.front(),
            {s.values.front(), s.iterations, s.evaluations, is_converged}};
}

} // namespace

MinimizeResult minimize(const BoundedProblem& problem, std::span<const double> start,
                        const NelderMeadOptions& options) {
    problem.validate();
    if (start.size() != problem.dimension())
        throw std::invalid_argument("start point dimension does not match bounds");
    if (options.restarts < 0)
        throw std::invalid_argument("restarts must be non-negative");

    Point clamped(start.begin(), start.end());
    for (std::size_t i = 0; i < clamped.size(); ++i)
        clamped[i] = std::clamp(clamped[i], problem.lower[i], problem.upper[i]);

    const BoxTransform transform(problem.lower, problem.upper);
    Evaluator eval(problem, transform);
    MinimizeResult result;

    Point u = transform.to_internal(clamped);
    if (u.empty()) {
        result.value = eval(u);
        result.point = eval.external(u);
        result.evaluations = eval.count();
        result.runs.push_back({result.value, 0, 1, true});
        return result;
    }

    const long per_run = static_cast<long>(options.evals_per_dimension) *
                         static_cast<long>(transform.free_dimension());
    double best_value = std::numeric_limits<double>::infinity();
    for (int run = 0; run <= options.restarts; ++run) {
        long budget = per_run;
        if (options.max_evals) {
            const long remaining = *options.max_evals - eval.count();
            if (remaining <= 0) {
                result.eval_limit_reached = true;
                break;
            }
            budget = std::min(budget, remaining);
        }
        RunOutcome outcome = run_simplex(eval, u, budget, options);
        if (options.max_evals && eval.count() >= *options.max_evals && !outcome.diagnostics.converged)
            result.eval_limit_reached = true;
        result.runs.push_back(outcome.diagnostics);
        if (outcome.value <= best_value) {
            best_value = outcome.value;
            u = std::move(outcome.best);
        }
    }

    result.value = best_value;
    result.point = eval.external(u);
    result.evaluations = eval.count();
    return result;
}

} // namespace earfit
