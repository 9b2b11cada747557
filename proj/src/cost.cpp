#include "earfit/fit.hpp"

#include <cmath>
#include <limits>

namespace earfit {

void CostWeights::validate() const {
    if (!(magnitude_weight >= 0.0) || !(phase_weight >= 0.0))
        throw std::invalid_argument("cost weights A and B must be non-negative");
    if (!(area_floor > 0.0))
        throw std::invalid_argument("area floor H1 must be positive");
    if (!(end_margin >= 0.0))
        throw std::invalid_argument("end margin H2 must be non-negative");
}

namespace {

constexpr double kPenaltyScale = 1e4;

double misfit_term(Complex model, Complex data, const CostWeights& w) {
    const LevelPhaseDiff d = level_phase_diff(model, data);
    const double decades = d.level_db / 20.0;
    return w.magnitude_weight * decades * decades + w.phase_weight * d.phase_rad * d.phase_rad;
}

} // namespace

double cost_j0(const ImpedanceSpectrum& model, const ImpedanceSpectrum& data,
               const CostWeights& weights, std::span<const double> frequencies) {
    double sum = 0.0;
    for (double f : frequencies)
        sum += misfit_term(model.at(f), data.at(f), weights);
    return sum;
}

double penalty_j1(const AreaFunctionParams& area, double area_floor, int samples) {
    double worst = 0.0;
    for (const AreaSample& s : sample_area(area, samples))
        worst = std::max(worst, area_floor - s.area);
    return kPenaltyScale * worst / area_floor;
}

double penalty_j2(const AreaFunctionParams& area, double end_margin, int samples) {
    const auto grid = sample_area(area, samples);
    const double end_area = grid.back().area;
    double worst = 0.0;
    for (const AreaSample& s : grid) {
        const double excess = end_area - s.area - end_margin;
        if (excess <= 0.0)
            continue;
        const double magnitude = std::abs(s.area);
        if (magnitude == 0.0)
            return std::numeric_limits<double>::infinity();
        worst = std::max(worst, excess / magnitude);
    }
    return kPenaltyScale * worst;
}

CostBreakdown cost_breakdown(const ModelParameters& params, const ImpedanceSpectrum& data_zin,
                             const CostWeights& weights, std::span<const double> frequencies,
                             const Medium& medium, int penalty_samples) {
    CostBreakdown c;
    c.area_floor = penalty_j1(params.area, weights.area_floor, penalty_samples);
    c.end_minimum = penalty_j2(params.area, weights.end_margin, penalty_samples);
    const HornProblem problem = params.problem(medium);
    HornSolver solver;
    try {
        for (double f : frequencies) {
            const EndPressures p = solver.solve_ends(problem, f);
            c.misfit += misfit_term(p.entrance / problem.volume_velocity, data_zin.at(f), weights);
        }
    } catch (const NumericalFailure&) {
        c.misfit = std::numeric_limits<double>::infinity();
    }
    return c;
}

double total_cost(const ModelParameters& params, const ImpedanceSpectrum& data_zin,
                  const CostWeights& weights, std::span<const double> frequencies,
                  const Medium& medium) {
    return cost_breakdown(params, data_zin, weights, frequencies, medium).total();
}

CostEvaluator::CostEvaluator(const ImpedanceSpectrum& data_zin, CostWeights weights,
                             std::vector<double> frequencies, Medium medium, int order,
                             int penalty_samples)
    : weights_(weights), frequencies_(std::move(frequencies)), medium_(medium), order_(order),
      penalty_samples_(penalty_samples) {
    weights_.validate();
    medium_.validate();
    data_.reserve(frequencies_.size());
    for (double f : frequencies_)
        data_.push_back(data_zin.at(f));
}

double CostEvaluator::operator()(std::span<const double> parameters) {
    ++evaluations_;
    const ModelParameters params = from_vector(parameters, order_);
    double cost = penalty_j1(params.area, weights_.area_floor, penalty_samples_) +
                  penalty_j2(params.area, weights_.end_margin, penalty_samples_);
    const HornProblem problem = params.problem(medium_);
    try {
        for (std::size_t i = 0; i < frequencies_.size(); ++i) {
            const EndPressures p = solver_.solve_ends(problem, frequencies_[i]);
            cost += misfit_term(p.entrance, data_[i], weights_);
        }
    } catch (const NumericalFailure&) {
        return std::numeric_limits<double>::infinity();
    }
    return cost;
}

} // namespace earfit
