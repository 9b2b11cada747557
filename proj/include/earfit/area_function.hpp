#ifndef EARFIT_AREA_FUNCTION_HPP
#define EARFIT_AREA_FUNCTION_HPP

#include <vector>

namespace earfit {

/// Truncated Fourier series for the canal cross-section,
///
///   S(x) = S0 + sum_m c_m cos(m pi x / l) + s_m sin(m pi x / l),  0 <= x <= l.
///
/// Nothing here forces S(x) > 0; fitting keeps it positive through penalties.
struct AreaFunctionParams {
    double mean_area = 6e-5;         ///< S0 in m^2
    std::vector<double> cos_coeffs;  ///< c_1..c_M in m^2
    std::vector<double> sin_coeffs;  ///< s_1..s_M in m^2
    double length = 0.03;            ///< l in m

    int order() const { return static_cast<int>(cos_coeffs.size()); }
    void validate() const;

    /// Zero-coefficient series of the given order.
    static AreaFunctionParams constant(double area, double length, int order = 4);
};

struct AreaSample {
    double x;
    double area;
};

/// Default resolution of the discrete supremum norms in the penalties.
inline constexpr int kDefaultAreaSamples = 101;

double eval_area(const AreaFunctionParams& params, double x);

/// Uniform samples on [0, l], both endpoints included.
std::vector<AreaSample> sample_area(const AreaFunctionParams& params, int n_samples);

/// Smallest sampled area; ties go to the smallest x.
AreaSample min_area(const AreaFunctionParams& params, int n_samples);

namespace detail {
// No range check; callers guarantee 0 <= x <= l. Used by the FEM assembly loop.
double area_unchecked(const AreaFunctionParams& params, double x);
} // namespace detail

} // namespace earfit

#endif
