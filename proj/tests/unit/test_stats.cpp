#include <gtest/gtest.h>

#include "mbm/random.hpp"
#include "mbm/stats.hpp"

using mbm::stats::Sample;

namespace {

Sample normals(std::size_t n, std::size_t d, std::uint64_t seed, double shift = 0.0) {
    mbm::Rng rng(seed);
    Sample s(n, d);
    for (auto& v : s.data) v = rng.gaussian() + shift;
    return s;
}

}  // namespace

TEST(EnergyTest, IdenticalSamplesHaveZeroDistance) {
    auto a = normals(200, 3, 1);
    EXPECT_NEAR(mbm::stats::energy_distance(a, a), 0.0, 1e-12);
    auto c = normals(200, 1, 2);
    EXPECT_NEAR(mbm::stats::energy_distance(c, c), 0.0, 1e-12);
}

TEST(EnergyTest, UnivariateShortcutMatchesPairwiseSums) {
    auto a = normals(150, 1, 3), b = normals(220, 1, 4, 0.3);
    Sample a2(a.rows, 2), b2(b.rows, 2);
    for (std::size_t i = 0; i < a.rows; ++i) a2(i, 0) = a(i, 0);
    for (std::size_t i = 0; i < b.rows; ++i) b2(i, 0) = b(i, 0);
    auto r1 = mbm::stats::energy_test(a, b, 100, 9);
    auto r2 = mbm::stats::energy_test(a2, b2, 100, 9);
    EXPECT_NEAR(r1.distance, r2.distance, 1e-12);
    EXPECT_DOUBLE_EQ(r1.p_value, r2.p_value);
}

TEST(EnergyTest, NullCalibration) {
    int pass = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        auto r = mbm::stats::energy_test(normals(200, 3, 2 * rep + 10), normals(200, 3, 2 * rep + 11), 200, rep);
        if (r.p_value > 0.01) ++pass;
    }
    EXPECT_GE(pass, 95);
}

TEST(EnergyTest, SeparatesShiftedLaws) {
    auto r = mbm::stats::energy_test(normals(300, 2, 5), normals(300, 2, 6, 0.5));
    EXPECT_LT(r.p_value, 0.01);
}

TEST(EnergyTest, RejectsShapeMismatch) {
    EXPECT_THROW(mbm::stats::energy_test(normals(10, 2, 1), normals(10, 3, 2)), std::invalid_argument);
}

TEST(BootstrapMedian, IntervalContainsMedian) {
    auto s = normals(500, 1, 8);
    auto ci = mbm::stats::bootstrap_median(s.data);
    EXPECT_LE(ci.lo, ci.median);
    EXPECT_GE(ci.hi, ci.median);
    EXPECT_LT(ci.hi - ci.lo, 0.5);
}
