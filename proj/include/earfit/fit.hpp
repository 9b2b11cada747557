#ifndef EARFIT_FIT_HPP
#define EARFIT_FIT_HPP

#include "earfit/acoustics.hpp"
#include "earfit/area_function.hpp"
#include "earfit/eardrum.hpp"
#include "earfit/horn_fem.hpp"
#include "earfit/nelder_mead.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace earfit {

/// Weights of the data misfit (magnitude A, phase B) and the penalty
/// thresholds H1 (minimum area) and H2 (end-area margin).
struct CostWeights {
    double magnitude_weight = 10.0;
    double phase_weight = 1.0;
    double area_floor = 1e-5;   ///< m^2
    double end_margin = 0.0;

    void validate() const;
};

/// Everything the optimizer varies: the area function and the eardrum.
struct ModelParameters {
    AreaFunctionParams area;
    TwoResonatorParams drum;
    double cone_volume = 2.62e-8;

    int order() const { return area.order(); }
    EardrumLoad load() const { return {drum, {cone_volume}, TerminationMode::two_resonator_with_cone}; }
    HornProblem problem(const Medium& medium) const { return {area, load(), medium, 1.0}; }
};

/// Flat layout: S0, c_1..c_M, s_1..s_M, l, L01, dL, Q1, Q2, f01, f02, V.
std::size_t parameter_dimension(int order);
std::vector<double> to_vector(const ModelParameters& p);
ModelParameters from_vector(std::span<const double> v, int order);
std::vector<std::string> parameter_names(int order);

/// Lower/upper bounds and the basic estimate for every parameter.
struct FitBounds {
    ModelParameters lower;
    ModelParameters upper;
    ModelParameters basic;

    /// Default box for an area expansion of the given order.
    static FitBounds defaults(int order);
    /// Length bounds tightened to [estimate - 3 mm, estimate + 1 mm],
    /// intersected with the current length bounds.
    FitBounds with_length_estimate(double length_estimate) const;
    void validate() const;
};

// -- cost terms --------------------------------------------------------------

/// Weighted squared log-magnitude and phase misfit summed over `frequencies`.
double cost_j0(const ImpedanceSpectrum& model, const ImpedanceSpectrum& data,
               const CostWeights& weights, std::span<const double> frequencies);

/// Penalty for the area dropping below the floor H1.
double penalty_j1(const AreaFunctionParams& area, double area_floor,
                  int samples = kDefaultAreaSamples);

/// Penalty for any interior area being smaller than the area at x = l (by more
/// than H2 relative).
double penalty_j2(const AreaFunctionParams& area, double end_margin,
                  int samples = kDefaultAreaSamples);

struct CostBreakdown {
    double misfit = 0.0;       ///< J0
    double area_floor = 0.0;   ///< J1
    double end_minimum = 0.0;  ///< J2
    double total() const { return misfit + area_floor + end_minimum; }
};

/// Misfit plus penalties. Penalties are evaluated first; the horn model is
/// solved only on `frequencies`. A failed solve yields +infinity.
CostBreakdown cost_breakdown(const ModelParameters& params, const ImpedanceSpectrum& data_zin,
                             const CostWeights& weights, std::span<const double> frequencies,
                             const Medium& medium, int penalty_samples = kDefaultAreaSamples);

double total_cost(const ModelParameters& params, const ImpedanceSpectrum& data_zin,
                  const CostWeights& weights, std::span<const double> frequencies,
                  const Medium& medium);

/// Reusable cost evaluator for the optimizer; owns a FEM workspace, so use one
/// per thread.
class CostEvaluator {
public:
    CostEvaluator(const ImpedanceSpectrum& data_zin, CostWeights weights,
                  std::vector<double> frequencies, Medium medium, int order,
                  int penalty_samples = kDefaultAreaSamples);

    double operator()(std::span<const double> parameters);
    long evaluations() const { return evaluations_; }

private:
    std::vector<Complex> data_;
    CostWeights weights_;
    std::vector<double> frequencies_;
    Medium medium_;
    int order_;
    int penalty_samples_;
    HornSolver solver_;
    long evaluations_ = 0;
};

// -- frequency bookkeeping ---------------------------------------------------

/// Discrete local extrema of |Z| (strict against both neighbours; plateaus
/// report their leftmost point).
struct Extremum {
    std::size_t index;
    double frequency;
    bool is_maximum;
};
std::vector<Extremum> magnitude_extrema(const ImpedanceSpectrum& spectrum);

inline constexpr double kMinLength = 0.015;
inline constexpr double kMaxLength = 0.045;
inline constexpr double kBasicLength = 0.030;

struct LengthEstimate {
    double length;            ///< m
    double peak_frequency;    ///< first |Z_in| maximum, Hz (0 on fallback)
    bool fallback = false;    ///< no maximum found; basic length used
};

/// l_est = c / (2 f_max) from the first local maximum of |Z_in|, clamped
/// into [15, 45] mm.
LengthEstimate estimate_length(const ImpedanceSpectrum& data_zin, const Medium& medium);

enum class FrequencyDistribution { logarithmic, linear };

struct FrequencySetOptions {
    int count = 25;
    double f_lo = 100.0;
    double f_cap = 10000.0;
    FrequencyDistribution distribution = FrequencyDistribution::logarithmic;
    bool include_extrema = true;
};

/// Round up to the next multiple of 100 Hz.
double round_up_100hz(double frequency_hz);

/// Fit frequencies: `count` points spaced per the distribution on
/// [f_lo, f_cap], rounded up to 100 Hz, optionally joined by the |Z_in|
/// extrema in range. Sorted, unique, all present on the data grid.
std::vector<double> build_frequency_set(const ImpedanceSpectrum& data_zin,
                                        const FrequencySetOptions& options);

// -- multistart --------------------------------------------------------------

/// Deterministic starting points: every basic value scaled by
/// 1 + 0.25 U(-1, 1) and clamped to bounds; the length starts at the estimate.
std::vector<ModelParameters> initial_points(const FitBounds& bounds, double length_estimate,
                                            int n_starts, std::uint64_t seed);

enum class Execution { serial, parallel };

struct MultistartOptions {
    int n_starts = 12;
    int restarts = 3;
    std::uint64_t seed = 1;
};

struct FitConfig {
    Medium medium;
    int order = 4;
    CostWeights weights;
    FrequencySetOptions frequencies;
    MultistartOptions multistart;
    NelderMeadOptions optimizer;
    int penalty_samples = kDefaultAreaSamples;
    Execution execution = Execution::parallel;
    /// Empty means FitBounds::defaults(order).
    std::optional<FitBounds> bounds;

    FitBounds effective_bounds() const;
    void validate() const;
};

struct StartDiagnostics {
    ModelParameters initial;
    ModelParameters optimum;
    double fit_cost;        ///< J at the optimum on the fit frequencies
    double selection_cost;  ///< J0 on the full data grid
    long evaluations;
    bool eval_limit_reached;
    std::vector<RunDiagnostics> runs;
};

struct FitResult {
    ModelParameters parameters;
    ImpedanceSpectrum zin;
    ImpedanceSpectrum ztr;
    CostBreakdown cost;         ///< at the optimum, on the fit frequencies
    double selection_cost;      ///< full-grid J0 of the winner
    LengthEstimate length_estimate;
    FitBounds bounds;           ///< including the tightened length bounds
    std::vector<double> frequency_set;
    std::vector<StartDiagnostics> starts;
    std::size_t best_start = 0;
    bool penalty_active = false;  ///< J1 or J2 nonzero at the optimum
    Medium medium;
};

class FitFailure : public std::runtime_error {
public:
    FitFailure(const std::string& what, std::vector<StartDiagnostics> starts)
        : std::runtime_error(what), starts_(std::move(starts)) {}
    const std::vector<StartDiagnostics>& starts() const { return starts_; }

private:
    std::vector<StartDiagnostics> starts_;
};

/// Estimate length, tighten its bounds, pick fit frequencies, run the
/// multistart minimization and keep the start with the lowest full-grid J0.
FitResult fit(const ImpedanceSpectrum& data_zin, const FitConfig& config);

// -- validation --------------------------------------------------------------

struct Validation {
    double jval;
    std::vector<double> frequencies;
    std::vector<LevelPhaseDiff> differences;
};

/// Transfer-impedance misfit of a fitted spectrum against reference data on
/// the reference grid.
Validation validate(const ImpedanceSpectrum& fitted_ztr, const ImpedanceSpectrum& data_ztr,
                    const CostWeights& weights = {});
Validation validate(const FitResult& fit, const ImpedanceSpectrum& data_ztr,
                    const CostWeights& weights = {});

struct QuantileCurves {
    std::vector<double> frequencies;
    std::vector<double> level_mean, level_q05, level_q95;
    std::vector<double> phase_mean, phase_q05, phase_q95;
};

/// Linearly interpolated sample quantile (p in [0, 1]).
double quantile(std::vector<double> values, double p);

/// Per-frequency mean and 5 %/95 % quantiles over a batch of validations that
/// share a grid.
QuantileCurves summarize(std::span<const Validation> batch);

} // namespace earfit

#endif
