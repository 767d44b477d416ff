#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mbm/hurst.hpp"
#include "oracles.hpp"

using mbm::hurst::HurstFunction;

namespace {

std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

HurstFunction sine() { return HurstFunction::sinusoidal(0.5, 0.2, 2.0 * std::numbers::pi); }

}  // namespace

TEST(HurstEval, ConstantKind) { EXPECT_DOUBLE_EQ(HurstFunction::constant(0.5)(0.3), 0.5); }

TEST(HurstEval, LinearKind) { EXPECT_DOUBLE_EQ(HurstFunction::linear(0.3, 0.4)(0.5), 0.5); }

TEST(HurstEval, SinusoidalKind) { EXPECT_NEAR(sine()(0.25), 0.7, 1e-15); }

TEST(HurstEval, NegativeTimeIsDomainError) {
    EXPECT_THROW(HurstFunction::constant(0.5)(-0.1), std::domain_error);
}

TEST(HurstEval, TableInterpolatesLinearly) {
    auto h = HurstFunction::table({0.0, 0.5, 1.0}, {0.3, 0.7, 0.5});
    EXPECT_NEAR(h(0.25), 0.5, 1e-15);
    EXPECT_NEAR(h(0.75), 0.6, 1e-15);
    EXPECT_NEAR(h(2.0), 0.5, 1e-15);
}

TEST(HurstEval, RejectsRangeOutsideUnitInterval) {
    EXPECT_THROW(HurstFunction::constant(1.0), std::invalid_argument);
    EXPECT_THROW(HurstFunction::linear(0.5, 0.6), std::invalid_argument);
    EXPECT_THROW(HurstFunction::sinusoidal(0.5, 0.6, 1.0), std::invalid_argument);
}

TEST(HurstSupInf, Constant) {
    auto b = HurstFunction::constant(0.5).sup_inf(0.0, 1.0);
    EXPECT_EQ(b.inf, 0.5);
    EXPECT_EQ(b.sup, 0.5);
}

TEST(HurstSupInf, LinearMonotone) {
    auto b = HurstFunction::linear(0.3, 0.4).sup_inf(0.0, 0.5);
    EXPECT_DOUBLE_EQ(b.inf, 0.3);
    EXPECT_DOUBLE_EQ(b.sup, 0.5);
}

TEST(HurstSupInf, SinusoidalMatchesBruteForce) {
    auto h = sine();
    auto b = h.sup_inf(0.0, 1.0);
    auto [lo, hi] = mbm::oracle::brute_extrema([&](double t) { return h(t); }, 0.0, 1.0, 1e-5);
    EXPECT_NEAR(b.inf, 0.3, 1e-12);
    EXPECT_NEAR(b.sup, 0.7, 1e-12);
    EXPECT_NEAR(b.inf, lo, 1e-9);
    EXPECT_NEAR(b.sup, hi, 1e-9);
}

TEST(HurstSupInf, EmptyIntervalIsDomainError) {
    EXPECT_THROW(sine().sup_inf(0.5, 0.5), std::domain_error);
}

TEST(HurstSupInf, BracketsGridValuesAndIsNested) {
    auto h = HurstFunction::sinusoidal(0.6, 0.1, 2.0 * std::numbers::pi, 0.3);
    const double pairs[][2] = {{0.0, 1.0}, {0.1, 0.9}, {0.2, 0.35}, {0.26, 0.3}};
    mbm::hurst::Bracket outer{0.0, 1.0};
    for (auto& ab : pairs) {
        auto b = h.sup_inf(ab[0], ab[1]);
        for (double t : uniform_grid(ab[0], ab[1], 101)) {
            EXPECT_LE(b.inf, h(t) + 1e-15);
            EXPECT_GE(b.sup, h(t) - 1e-15);
        }
        EXPECT_GE(b.inf, outer.inf);
        EXPECT_LE(b.sup, outer.sup);
        outer = b;
    }
}

TEST(HurstCondition, ConstantHoldsWithZeroRatio) {
    for (double beta : {0.6, 0.8, 1.0}) {
        auto rep = mbm::hurst::check_condition_beta(HurstFunction::constant(0.5).with_holder(beta, 0.0),
                                                    uniform_grid(0, 1, 50));
        EXPECT_TRUE(rep.holds);
        EXPECT_EQ(rep.worst_ratio, 0.0);
    }
}

TEST(HurstCondition, LinearLipschitz) {
    auto rep = mbm::hurst::check_condition_beta(HurstFunction::linear(0.3, 0.4).with_holder(1.0, 0.4),
                                                uniform_grid(0, 1, 101));
    EXPECT_TRUE(rep.holds);
    EXPECT_NEAR(rep.worst_ratio, 0.4, 1e-12);
}

TEST(HurstCondition, SinusoidalWithMaxDerivative) {
    auto h = sine().with_holder(1.0, 0.4 * std::numbers::pi);
    auto rep = mbm::hurst::check_condition_beta(h, uniform_grid(0, 1, 2001));
    EXPECT_TRUE(rep.holds);
    EXPECT_LE(rep.pairs_checked, 10000u);
    EXPECT_GT(rep.worst_ratio, 0.99 * 0.4 * std::numbers::pi);
}

TEST(HurstCondition, TooSmallConstantFails) {
    auto h = sine().with_holder(1.0, 1.0);
    EXPECT_FALSE(mbm::hurst::check_condition_beta(h, uniform_grid(0, 1, 201)).holds);
}

TEST(HurstCondition, NuNotBelowBetaFails) {
    auto h = HurstFunction::constant(0.7).with_holder(0.6, 1.0);
    auto rep = mbm::hurst::check_condition_beta(h, uniform_grid(0, 1, 11));
    EXPECT_FALSE(rep.exponent_ok);
    EXPECT_FALSE(rep.holds);
}
