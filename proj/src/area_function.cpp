#include "earfit/area_function.hpp"

#include "earfit/acoustics.hpp"

#include <cmath>
#include <stdexcept>

namespace earfit {

void AreaFunctionParams::validate() const {
    if (cos_coeffs.empty() || cos_coeffs.size() != sin_coeffs.size())
        throw std::invalid_argument("area function needs M >= 1 cosine and sine coefficients");
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("area function length must be positive");
}

AreaFunctionParams AreaFunctionParams::constant(double area, double length, int order) {
    AreaFunctionParams p;
    p.mean_area = area;
    p.length = length;
    p.cos_coeffs.assign(static_cast<std::size_t>(order), 0.0);
    p.sin_coeffs.assign(static_cast<std::size_t>(order), 0.0);
    return p;
}

namespace detail {

double area_unchecked(const AreaFunctionParams& params, double x) {
    // cos(m t), sin(m t) by angle addition: two trig calls per point instead of 2M.
    const double theta = kPi * x / params.length;
    const double c1 = std::cos(theta);
    const double s1 = std::sin(theta);
    double cm = c1;
    double sm = s1;
    double area = params.mean_area;
    const std::size_t order = params.cos_coeffs.size();
    for (std::size_t m = 0; m < order; ++m) {
        area += params.cos_coeffs[m] * cm + params.sin_coeffs[m] * sm;
        const double next_c = cm * c1 - sm * s1;
        sm = sm * c1 + cm * s1;
        cm = next_c;
    }
    return area;
}

} // namespace detail

double eval_area(const AreaFunctionParams& params, double x) {
    params.validate();
    if (!(x >= 0.0 && x <= params.length))
        throw std::invalid_argument("area function evaluated outside [0, l]");
    return detail::area_unchecked(params, x);
}

std::vector<AreaSample> sample_area(const AreaFunctionParams& params, int n_samples) {
    params.validate();
    if (n_samples < 2)
        throw std::invalid_argument("area sampling needs at least two points");
    std::vector<AreaSample> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double x = (i == n_samples - 1) ? params.length
                                              : params.length * i / (n_samples - 1);
        out.push_back({x, detail::area_unchecked(params, x)});
    }
    return out;
}

AreaSample min_area(const AreaFunctionParams& params, int n_samples) {
    const auto samples = sample_area(params, n_samples);
    AreaSample best = samples.front();
    for (const auto& s : samples)
        if (s.area < best.area)
            best = s;
    return best;
}

} // namespace earfit
