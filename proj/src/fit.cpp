#include "earfit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

namespace earfit {

std::size_t parameter_dimension(int order) { return 2 * static_cast<std::size_t>(order) + 9; }

std::vector<double> to_vector(const ModelParameters& p) {
    std::vector<double> v;
    v.reserve(parameter_dimension(p.order()));
    v.push_back(p.area.mean_area);
    v.insert(v.end(), p.area.cos_coeffs.begin(), p.area.cos_coeffs.end());
    v.insert(v.end(), p.area.sin_coeffs.begin(), p.area.sin_coeffs.end());
    v.push_back(p.area.length);
    v.push_back(p.drum.level_db);
    v.push_back(p.drum.level_offset_db);
    v.push_back(p.drum.quality1);
    v.push_back(p.drum.quality2);
    v.push_back(p.drum.resonance1_hz);
    v.push_back(p.drum.resonance2_hz);
    v.push_back(p.cone_volume);
    return v;
}

ModelParameters from_vector(std::span<const double> v, int order) {
    if (order < 1 || v.size() != parameter_dimension(order))
        throw std::invalid_argument("parameter vector length does not match the area order");
    const auto m = static_cast<std::size_t>(order);
    ModelParameters p;
    p.area.mean_area = v[0];
    p.area.cos_coeffs.assign(v.begin() + 1, v.begin() + 1 + static_cast<std::ptrdiff_t>(m));
    p.area.sin_coeffs.assign(v.begin() + 1 + static_cast<std::ptrdiff_t>(m),
                             v.begin() + 1 + static_cast<std::ptrdiff_t>(2 * m));
    std::size_t i = 1 + 2 * m;
    p.area.length = v[i++];
    p.drum.level_db = v[i++];
    p.drum.level_offset_db = v[i++];
    p.drum.quality1 = v[i++];
    p.drum.quality2 = v[i++];
    p.drum.resonance1_hz = v[i++];
    p.drum.resonance2_hz = v[i++];
    p.cone_volume = v[i];
    return p;
}

std::vector<std::string> parameter_names(int order) {
    std::vector<std::string> names{"S0"};
    for (int m = 1; m <= order; ++m)
        names.push_back("c" + std::to_string(m));
    for (int m = 1; m <= order; ++m)
        names.push_back("s" + std::to_string(m));
    for (const char* n : {"length", "L01", "dL", "Q1", "Q2", "f01", "f02", "V"})
        names.emplace_back(n);
    return names;
}

FitBounds FitBounds::defaults(int order) {
    if (order < 1 || order > 8)
        throw std::invalid_argument("area function order must be within 1..8");
    FitBounds b;
    const auto m = static_cast<std::size_t>(order);
    b.lower.area = AreaFunctionParams::constant(1e-5, kMinLength, order);
    b.upper.area = AreaFunctionParams::constant(2e-4, kMaxLength, order);
    b.basic.area = AreaFunctionParams::constant(6e-5, kBasicLength, order);
    for (std::size_t k = 0; k < m; ++k) {
        // 2^(-m+2) * 1e-5 for harmonic m = k + 1
        const double limit = std::ldexp(1e-5, 1 - static_cast<int>(k));
        b.lower.area.cos_coeffs[k] = b.lower.area.sin_coeffs[k] = -limit;
        b.upper.area.cos_coeffs[k] = b.upper.area.sin_coeffs[k] = limit;
    }
    b.basic.area.cos_coeffs[0] = 2e-6;

    b.lower.drum = {50.0, 0.0, 0.3, 0.3, 500.0, 2500.0};
    b.upper.drum = {200.0, 40.0, 10.0, 10.0, 2500.0, 6000.0};
    b.basic.drum = {161.0, 20.0, 1.2, 1.2, 900.0, 4000.0};
    b.lower.cone_volume = 1.3e-8;
    b.upper.cone_volume = 5.23e-8;
    b.basic.cone_volume = 2.62e-8;
    return b;
}

FitBounds FitBounds::with_length_estimate(double length_estimate) const {
    FitBounds b = *this;
    b.lower.area.length = std::max(lower.area.length, length_estimate - 0.003);
    b.upper.area.length = std::min(upper.area.length, length_estimate + 0.001);
    if (b.lower.area.length > b.upper.area.length)
        throw std::invalid_argument("length estimate lies outside the length bounds");
    b.basic.area.length = std::clamp(length_estimate, b.lower.area.length, b.upper.area.length);
    return b;
}

void FitBounds::validate() const {
    const auto lo = to_vector(lower);
    const auto hi = to_vector(upper);
    const auto base = to_vector(basic);
    if (lo.size() != hi.size() || lo.size() != base.size())
        throw std::invalid_argument("bounds and basic values have different orders");
    const auto names = parameter_names(lower.order());
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] <= hi[i]))
            throw std::invalid_argument("lower bound exceeds upper bound for " + names[i]);
        if (!(base[i] >= lo[i] && base[i] <= hi[i]))
            throw std::invalid_argument("basic value outside bounds for " + names[i]);
    }
    if (!(lower.area.length > 0.0))
        throw std::invalid_argument("length bounds must be positive");
    if (!(lower.drum.quality1 > 0.0 && lower.drum.quality2 > 0.0 &&
          lower.drum.resonance1_hz > 0.0 && lower.drum.resonance2_hz > 0.0 &&
          lower.cone_volume >= 0.0))
        throw std::invalid_argument("eardrum bounds must keep Q, f0 positive and V non-negative");
}

std::vector<ModelParameters> initial_points(const FitBounds& bounds, double length_estimate,
                                            int n_starts, std::uint64_t seed) {
    if (n_starts < 1)
        throw std::invalid_argument("need at least one start");
    const auto lo = to_vector(bounds.lower);
    const auto hi = to_vector(bounds.upper);
    const auto base = to_vector(bounds.basic);
    const int order = bounds.basic.order();
    const std::size_t length_index = 1 + 2 * static_cast<std::size_t>(order);

    std::mt19937_64 engine(seed);
    // 53 random bits -> [0, 1); avoids the implementation-defined distributions.
    auto symmetric_unit = [&engine] {
        return 2.0 * (static_cast<double>(engine() >> 11) * 0x1.0p-53) - 1.0;
    };

    std::vector<ModelParameters> starts;
    starts.reserve(static_cast<std::size_t>(n_starts));
    for (int s = 0; s < n_starts; ++s) {
        std::vector<double> v(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            if (i == length_index) {
                v[i] = std::clamp(length_estimate, lo[i], hi[i]);
                continue;
            }
            v[i] = std::clamp(base[i] * (1.0 + 0.25 * symmetric_unit()), lo[i], hi[i]);
        }
        starts.push_back(from_vector(v, order));
    }
    return starts;
}

FitBounds FitConfig::effective_bounds() const {
    return bounds ? *bounds : FitBounds::defaults(order);
}

void FitConfig::validate() const {
    medium.validate();
    weights.validate();
    if (order < 1 || order > 8)
        throw std::invalid_argument("area function order must be within 1..8");
    if (multistart.n_starts < 1 || multistart.restarts < 0)
        throw std::invalid_argument("need n_starts >= 1 and restarts >= 0");
    if (penalty_samples < 2)
        throw std::invalid_argument("penalty grid needs at least two samples");
    const FitBounds b = effective_bounds();
    if (b.basic.order() != order || b.lower.order() != order || b.upper.order() != order)
        throw std::invalid_argument("bounds do not match the configured area order");
    b.validate();
}

namespace {

double full_grid_misfit(const ModelParameters& p, const ImpedanceSpectrum& data,
                        const CostWeights& weights, const Medium& medium) {
    try {
        const ImpedancePair model = impedances_serial(p.problem(medium), data.frequencies());
        return cost_j0(model.input, data, weights, data.frequencies());
    } catch (const NumericalFailure&) {
        return std::numeric_limits<double>::infinity();
    }
}

StartDiagnostics run_start(const ModelParameters& start, const ImpedanceSpectrum& data,
                           const FitConfig& config, const std::vector<double>& frequencies,
                           const std::vector<double>& lower, const std::vector<double>& upper) {
    CostEvaluator cost(data, config.weights, frequencies, config.medium, config.order,
                       config.penalty_samples);
    BoundedProblem problem{lower, upper,
                           [&cost](std::span<const double> x) { return cost(x); }};
    NelderMeadOptions options = config.optimizer;
    options.restarts = config.multistart.restarts;
    const MinimizeResult r = minimize(problem, to_vector(start), options);

    StartDiagnostics d;
    d.initial = start;
    d.optimum = from_vector(r.point, config.order);
    d.fit_cost = r.value;
    d.selection_cost = std::isfinite(r.value)
                           ? full_grid_misfit(d.optimum, data, config.weights, config.medium)
                           : std::numeric_limits<double>::infinity();
    d.evaluations = r.evaluations;
    d.eval_limit_reached = r.eval_limit_reached;
    d.runs = r.runs;
    return d;
}

} // namespace

FitResult fit(const ImpedanceSpectrum& data_zin, const FitConfig& config) {
    config.validate();
    if (data_zin.kind() != SpectrumKind::input)
        throw std::invalid_argument("fit expects input impedance data");
    if (!data_zin.covers(config.frequencies.f_lo, config.frequencies.f_cap))
        throw std::invalid_argument("input impedance data does not reach the configured f_cap");

    FitResult result;
    result.medium = config.medium;
    result.length_estimate = estimate_length(data_zin, config.medium);
    result.bounds = config.effective_bounds().with_length_estimate(result.length_estimate.length);
    result.frequency_set = build_frequency_set(data_zin, config.frequencies);

    const auto starts = initial_points(result.bounds, result.length_estimate.length,
                                       config.multistart.n_starts, config.multistart.seed);
    const auto lower = to_vector(result.bounds.lower);
    const auto upper = to_vector(result.bounds.upper);

    std::vector<StartDiagnostics> diagnostics(starts.size());
    const auto n = static_cast<std::ptrdiff_t>(starts.size());
    std::exception_ptr failure;
    std::ptrdiff_t failed_at = n;
    const bool parallel = config.execution == Execution::parallel;

#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            diagnostics[idx] =
                run_start(starts[idx], data_zin, config, result.frequency_set, lower, upper);
        } catch (...) {
#pragma omp critical(earfit_fit_failure)
            if (i < failed_at) {
                failed_at = i;
                failure = std::current_exception();
            }
        }
    }
    if (failure)
        std::rethrow_exception(failure);

    // Lowest full-grid misfit wins; strict comparison keeps the earliest start on ties.
    std::size_t best = diagnostics.size();
    for (std::size_t i = 0; i < diagnostics.size(); ++i) {
        if (!std::isfinite(diagnostics[i].selection_cost))
            continue;
        if (best == diagnostics.size() ||
            diagnostics[i].selection_cost < diagnostics[best].selection_cost)
            best = i;
    }
    if (best == diagnostics.size())
        throw FitFailure("every start failed to produce a finite cost", std::move(diagnostics));

    result.best_start = best;
    result.parameters = diagnostics[best].optimum;
    result.selection_cost = diagnostics[best].selection_cost;
    result.cost = cost_breakdown(result.parameters, data_zin, config.weights,
                                 result.frequency_set, config.medium, config.penalty_samples);
    result.penalty_active = result.cost.area_floor > 0.0 || result.cost.end_minimum > 0.0;
    const ImpedancePair model =
        impedances_serial(result.parameters.problem(config.medium), data_zin.frequencies());
    result.zin = model.input;
    result.ztr = model.transfer;
    result.starts = std::move(diagnostics);
    return result;
}

} // namespace earfit
