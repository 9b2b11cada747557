#include "earfit/nelder_mead.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace earfit;

namespace {

double rosenbrock(std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

double sphere_at(std::span<const double> x, const std::vector<double>& centre) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += (x[i] - centre[i]) * (x[i] - centre[i]);
    return s;
}

} // namespace

TEST(BoxTransform, RoundTripAndRange) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0), wild(-100.0, 100.0);
    const std::vector<double> lo{-1.0, 0.0, 5.0, 2.0}, hi{1.0, 1e-5, 6000.0, 2.0};
    const BoxTransform t(lo, hi);
    EXPECT_EQ(t.free_dimension(), 3u);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> x(4), back(4);
        for (std::size_t i = 0; i < 4; ++i)
            x[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
        t.to_external(t.to_internal(x), back);
        for (std::size_t i = 0; i < 4; ++i)
            EXPECT_NEAR(back[i], x[i], 1e-12 * std::max(1.0, std::abs(hi[i] - lo[i])));
        // any internal point maps inside the box
        std::vector<double> any(3);
        for (auto& v : any) v = wild(rng);
        t.to_external(any, back);
        for (std::size_t i = 0; i < 4; ++i) {
            EXPECT_GE(back[i], lo[i]);
            EXPECT_LE(back[i], hi[i]);
        }
        EXPECT_EQ(back[3], 2.0);
    }
}

TEST(BoxTransform, EndpointsMapToBounds) {
    const std::vector<double> lo{0.0}, hi{1.0};
    const BoxTransform t(lo, hi);
    std::vector<double> x(1);
    t.to_external(t.to_internal(std::vector<double>{0.0}), x);
    EXPECT_NEAR(x[0], 0.0, 1e-30);
    t.to_external(t.to_internal(std::vector<double>{1.0}), x);
    EXPECT_NEAR(x[0], 1.0, 1e-15);
    // the internal coordinate is offset away from zero
    EXPECT_GT(t.to_internal(std::vector<double>{0.0})[0], 6.0);
}

TEST(Minimize, RosenbrockInsideBox) {
    const BoundedProblem p{{-2.0, -2.0}, {2.0, 2.0}, rosenbrock};
    const auto r = minimize(p, std::vector<double>{-1.2, 1.0});
    EXPECT_NEAR(r.point[0], 1.0, 1e-4);
    EXPECT_NEAR(r.point[1], 1.0, 1e-4);
    EXPECT_LT(r.value, 1e-8);
    EXPECT_EQ(r.runs.size(), 4u);
    EXPECT_FALSE(r.eval_limit_reached);
}

TEST(Minimize, ConstrainedOptimumOnBoundary) {
    const std::vector<double> centre{3.0, -0.5, 0.25};
    const BoundedProblem p{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0},
                           [&](std::span<const double> x) { return sphere_at(x, centre); }};
    const auto r = minimize(p, std::vector<double>{0.5, 0.5, 0.5});
    EXPECT_NEAR(r.point[0], 1.0, 1e-6);
    EXPECT_NEAR(r.point[1], 0.0, 1e-6);
    EXPECT_NEAR(r.point[2], 0.25, 1e-4);
}

TEST(Minimize, FrozenCoordinatesUntouched) {
    std::vector<std::vector<double>> seen;
    const BoundedProblem p{{-1.0, 0.7, -1.0}, {1.0, 0.7, 1.0},
                           [&](std::span<const double> x) {
                               seen.emplace_back(x.begin(), x.end());
                               return x[0] * x[0] + (x[2] - 0.3) * (x[2] - 0.3);
                           }};
    const auto r = minimize(p, std::vector<double>{0.5, 0.7, 0.5});
    for (const auto& x : seen)
        EXPECT_EQ(x[1], 0.7);
    EXPECT_EQ(r.point[1], 0.7);
    EXPECT_NEAR(r.point[2], 0.3, 1e-4);
}

TEST(Minimize, AllFrozenEvaluatesOnce) {
    int calls = 0;
    const BoundedProblem p{{1.0, 2.0}, {1.0, 2.0}, [&](std::span<const double> x) {
                               ++calls;
                               return x[0] + x[1];
                           }};
    const auto r = minimize(p, std::vector<double>{1.0, 2.0});
    EXPECT_EQ(calls, 1);
    EXPECT_EQ(r.value, 3.0);
}

TEST(Minimize, PropertyEveryEvaluationInsideBoxAndBudgetBounded) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 6);
        std::vector<double> lo(d), hi(d), centre(d), start(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double a = u(rng), b = u(rng);
            lo[i] = std::min(a, b);
            hi[i] = std::max(a, b) + 1e-3;
            centre[i] = u(rng);
            start[i] = u(rng);  // may be outside; gets clamped
        }
        long calls = 0;
        bool inside = true;
        const BoundedProblem p{lo, hi, [&](std::span<const double> x) {
                                   ++calls;
                                   for (std::size_t i = 0; i < d; ++i)
                                       inside = inside && x[i] >= lo[i] && x[i] <= hi[i];
                                   return sphere_at(x, centre);
                               }};
        NelderMeadOptions opt;
        opt.restarts = 2;
        const auto r = minimize(p, start, opt);
        EXPECT_TRUE(inside);
        EXPECT_EQ(r.evaluations, calls);
        const long per_run = 400 * static_cast<long>(d);
        // one iteration may overshoot the per-run budget by at most d + 1 evaluations
        EXPECT_LE(calls, 3 * (per_run + static_cast<long>(d) + 1));
        for (std::size_t i = 0; i < d; ++i)
            EXPECT_NEAR(r.point[i], std::clamp(centre[i], lo[i], hi[i]), 1e-3);
        // restart values never get worse
        for (std::size_t k = 1; k < r.runs.size(); ++k)
            EXPECT_LE(r.runs[k].best_value, r.runs[k - 1].best_value);
    }
}

TEST(Minimize, NaNTreatedAsInfinity) {
    const BoundedProblem p{{-1.0, -1.0}, {1.0, 1.0}, [](std::span<const double> x) {
                               if (x[0] > 0.5)
                                   return std::nan("");
                               return (x[0] - 0.2) * (x[0] - 0.2) + x[1] * x[1];
                           }};
    const auto r = minimize(p, std::vector<double>{0.0, 0.3});
    EXPECT_TRUE(std::isfinite(r.value));
    EXPECT_NEAR(r.point[0], 0.2, 1e-4);
}

TEST(Minimize, TotalEvaluationLimit) {
    NelderMeadOptions opt;
    opt.max_evals = 50;
    const BoundedProblem p{{-2.0, -2.0}, {2.0, 2.0}, rosenbrock};
    const auto r = minimize(p, std::vector<double>{-1.2, 1.0}, opt);
    EXPECT_TRUE(r.eval_limit_reached);
    EXPECT_LE(r.evaluations, 50 + 3);
}

TEST(Minimize, Deterministic) {
    const BoundedProblem p{{-2.0, -2.0}, {2.0, 2.0}, rosenbrock};
    const auto a = minimize(p, std::vector<double>{-1.2, 1.0});
    const auto b = minimize(p, std::vector<double>{-1.2, 1.0});
    EXPECT_EQ(a.point, b.point);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Minimize, InvalidInput) {
    const BoundedProblem bad{{1.0}, {0.0}, rosenbrock};
    EXPECT_THROW(minimize(bad, std::vector<double>{0.5}), std::invalid_argument);
    const BoundedProblem p{{0.0, 0.0}, {1.0, 1.0}, rosenbrock};
    EXPECT_THROW(minimize(p, std::vector<double>{0.5}), std::invalid_argument);
    NelderMeadOptions opt;
    opt.restarts = -1;
    EXPECT_THROW(minimize(p, std::vector<double>{0.5, 0.5}, opt), std::invalid_argument);
}
