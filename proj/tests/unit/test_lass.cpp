#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mbm/lass.hpp"
#include "mbm/localtime.hpp"
#include "mbm/numerics.hpp"
#include "mbm/random.hpp"
#include "mbm/synth.hpp"
#include "oracles.hpp"

using mbm::Representation;
using mbm::SamplePath;
using mbm::TimeGrid;
using mbm::hurst::HurstFunction;
namespace lass = mbm::lass;
namespace lt = mbm::localtime;
namespace synth = mbm::synth;
using mbm::stats::Sample;

namespace {

double mean_of(const std::vector<double>& v) { return mbm::numerics::mean(v); }
double se_of(const std::vector<double>& v) { return mbm::numerics::std_error(v); }

HurstFunction sinusoid_half_at(double t0) {
    // H(t0) = 0.5, H' = -0.2 * 2 pi at t0
    return HurstFunction::sinusoidal(0.5, 0.2, 2 * std::numbers::pi, std::numbers::pi - 2 * std::numbers::pi * t0)
        .with_holder(1.0, 0.2 * 2 * std::numbers::pi);
}

}  // namespace

// ==== scaling pair ====

TEST(ScalingPair, InvariantsEnforced) {
    lass::ScalingPair ok{0.6, 1.1};
    EXPECT_TRUE(ok.violations(0.5).empty());
    EXPECT_NO_THROW(ok.validate(0.5));
    EXPECT_NEAR(ok.psi(0.01) / ok.theta(0.01), std::pow(0.01, 0.5), 1e-15);
    lass::ScalingPair low{0.4, 0.9};
    auto v = low.violations(0.5);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("a > H0"), std::string::npos);
    EXPECT_THROW(low.validate(0.5), std::invalid_argument);
    EXPECT_EQ((lass::ScalingPair{0.4, 1.1}).violations(0.5).size(), 2u);
}

// ==== rescale_path ====

TEST(RescalePath, ConstantHurstIsSelfSimilar) {
    const double H = 0.7;
    auto h = HurstFunction::constant(H);
    const double v2 = synth::moving_average_unit_variance(H);
    const double us[] = {0.25, 0.5, 1.0};
    for (double rho : {0.1, 0.01}) {
        lass::WindowOptions opt;
        opt.grid_n = 256;
        lass::RescaledGenerator gen(h, 0.5, rho, 1.0, opt);
        std::vector<std::vector<double>> prod(9);
        for (std::size_t r = 0; r < 3000; ++r) {
            auto p = gen.generate(mbm::split_seed(1, r));
            EXPECT_EQ(p.values[0], 0.0);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    prod[3 * i + j].push_back(p.values[std::size_t(us[i] * 256)] * p.values[std::size_t(us[j] * 256)]);
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                EXPECT_NEAR(mean_of(prod[3 * i + j]), v2 * mbm::oracle::fbm_covariance(H, us[i], us[j]),
                            3.5 * se_of(prod[3 * i + j]))
                    << rho << " " << us[i] << " " << us[j];
    }
}

TEST(RescalePath, SinusoidalCovarianceConvergesInRho) {
    auto h = HurstFunction::sinusoidal(0.5, 0.2, 2 * std::numbers::pi, 0.0);
    const double t0 = 0.5, H0 = h(t0);
    const double v2 = synth::moving_average_unit_variance(H0);
    const double us[] = {0.25, 0.5, 1.0};
    double previous = 1e300;
    for (double rho : {1e-1, 1e-2, 1e-3}) {
        std::vector<double> pts{t0};
        for (double u : us) pts.push_back(t0 + rho * u);
        auto cov = synth::increment_covariance(h, pts, {}, Representation::moving_average);
        double err = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                err = std::max(err, std::abs(cov[3 * i + j] / std::pow(rho, 2 * H0) -
                                             v2 * mbm::oracle::fbm_covariance(H0, us[i], us[j])));
        EXPECT_LT(err, previous) << rho;
        previous = err;
    }
    // the remaining error is the rho^{2 (H(t) - H0)} drift, of order |H'| rho |log rho|
    EXPECT_LT(previous, 0.03);
}

TEST(RescalePath, RefusesTinyRho) {
    EXPECT_THROW(lass::rescale_path(HurstFunction::constant(0.5), 0.5, 1e-14, 1024, 1), std::invalid_argument);
    EXPECT_THROW(lass::rescale_path(HurstFunction::linear(0.3, 0.2), 0.5, 0.1, 64, 1, Representation::fbm_exact),
                 std::invalid_argument);
}

// ==== rescaled local time ====

TEST(RescaledLocalTime, ChangeOfVariablesIdentity) {
    auto h = HurstFunction::linear(0.3, 0.4);
    auto p = synth::gen_mbm_moving_average(h, TimeGrid::over(0.0, 1.0, 4097), 5);
    const double t0 = 0.5, rho = 0.125, x = 0.3, H0 = h(t0);
    const double b0 = p.values[2048], s = std::pow(rho, H0);
    const double dx = 0.01;
    auto field = lt::local_time_field(p, lt::XGrid::covering(-6, 6, dx, b0 + s * x));
    auto y = lass::rescaled_local_time(field, p, h, t0, rho, x);
    EXPECT_EQ(y.values.front(), 0.0);
    SamplePath r = lt::slice(p, 2048, 2048 + 512);
    r.grid = TimeGrid{0.0, p.grid.dt / rho, r.grid.n};
    for (double& v : r.values) v = (v - b0) / s;
    auto fr = lt::local_time_field(r, lt::XGrid::covering(-6 / s, 6 / s, dx / s, x));
    ASSERT_EQ(fr.rows(), y.values.size());
    for (std::size_t k = 0; k < fr.rows(); ++k) EXPECT_NEAR(fr.value(fr.grid.at(k), x), y.values[k], 1e-9 * (1 + y.values[k]));
}

TEST(RescaledLocalTime, BrownianScalingMean) {
    auto h = HurstFunction::constant(0.5);
    for (double rho : {0.1, 0.001}) {
        lass::WindowOptions opt;
        opt.grid_n = 1024;
        lass::RescaledGenerator gen(h, 0.5, rho, 1.0, opt);
        std::vector<double> v;
        for (std::size_t r = 0; r < 3000; ++r) {
            auto p = gen.generate(mbm::split_seed(2, r));
            auto f = lt::local_time_field(p, lt::default_x_grid(p, 0.5), {true, 1024});
            v.push_back(f.value(1.0, 0.0));
        }
        EXPECT_NEAR(mean_of(v), std::sqrt(2 / std::numbers::pi), 3 * se_of(v)) << rho;
    }
}

TEST(RescaledLocalTime, LevelOutOfRange) {
    auto p = synth::gen_fbm(0.5, TimeGrid::over(0.0, 1.0, 1025), 1);
    auto f = lt::local_time_field(p, lt::XGrid::covering(-1, 1, 0.05));
    EXPECT_THROW(lass::rescaled_local_time(f, p, HurstFunction::constant(0.5), 0.5, 0.25, 50.0), std::out_of_range);
}

// ==== fdd_distance ====

TEST(FddDistance, ShapesAndIdentity) {
    mbm::Rng rng(3);
    Sample a(250, 2), b(250, 3), small(100, 2);
    for (auto& v : a.data) v = rng.gaussian();
    EXPECT_NEAR(lass::fdd_distance(a, a).distance, 0.0, 1e-12);
    EXPECT_THROW(lass::fdd_distance(a, b), std::invalid_argument);
    EXPECT_THROW(lass::fdd_distance(a, small), std::invalid_argument);
}

// ==== verify_lass_localtime ====

TEST(VerifyLass, ConstantHurstFlat) {
    auto h = HurstFunction::constant(0.6).with_holder(1.0, 0.0);
    const double rhos[] = {1e-1, 3e-2, 1e-2}, ts[] = {0.5, 1.0};
    lass::LassOptions opt;
    opt.window.grid_n = 512;
    opt.permutations = 200;
    auto rep = lass::verify_lass_localtime(h, 0.5, 0.0, rhos, ts, 300, 7, opt);
    for (auto& r : rep.per_rho) EXPECT_GT(r.p_value, 0.01) << r.rho;
    EXPECT_TRUE(rep.verdict);
}

TEST(VerifyLass, SinusoidalConvergesAndNegativeControlSeparates) {
    auto h = sinusoid_half_at(0.5);
    ASSERT_NEAR(h(0.5), 0.5, 1e-12);
    const double rhos[] = {1e-1, 3e-2, 1e-2}, ts[] = {0.5, 1.0};
    lass::LassOptions opt;
    opt.window.grid_n = 512;
    opt.permutations = 200;
    auto rep = lass::verify_lass_localtime(h, 0.5, 0.0, rhos, ts, 300, 8, opt);
    EXPECT_TRUE(rep.verdict) << rep.per_rho[0].distance << " " << rep.per_rho[1].distance << " " << rep.per_rho[2].distance;
    opt.reference_shift = 0.2;
    auto neg = lass::verify_lass_localtime(h, 0.5, 0.0, rhos, ts, 300, 8, opt);
    EXPECT_LT(neg.per_rho.back().p_value, 0.01);
    EXPECT_FALSE(neg.verdict);
}

TEST(VerifyLass, RequiresDeclaredCondition) {
    const double rhos[] = {1e-1}, ts[] = {1.0};
    EXPECT_THROW(lass::verify_lass_localtime(HurstFunction::constant(0.5), 0.5, 0.0, rhos, ts, 200, 1),
                 std::invalid_argument);
}

TEST(Tightness, ConstantsBoundedAcrossRho) {
    auto h = sinusoid_half_at(0.5);
    const double rhos[] = {1e-1, 3e-2, 1e-2};
    const std::pair<double, double> pairs[] = {{0.0, 0.25}, {0.25, 0.5}, {0.5, 1.0}};
    const int orders[] = {2, 4};
    lass::WindowOptions opt;
    opt.grid_n = 512;
    auto tab = lass::tightness_constants(h, 0.5, 0.0, rhos, pairs, orders, 400, 9, opt);
    for (std::size_t m = 0; m < 2; ++m) {
        double lo = 1e300, hi = 0;
        for (std::size_t r = 0; r < 3; ++r) {
            lo = std::min(lo, tab.constants[r * 2 + m]);
            hi = std::max(hi, tab.constants[r * 2 + m]);
        }
        EXPECT_GT(lo, 0.0);
        EXPECT_LT(hi / lo, 2.0) << orders[m];
    }
}

// ==== test functions and functionals ====

TEST(TestFunction, AntiderivativesMatchQuadrature) {
    std::vector<lass::TestFunction> fs{lass::TestFunction::indicator(-1, 2, 0.5), lass::TestFunction::triangle(0.3, 0.7, 2.0),
                                       lass::TestFunction::truncated_gaussian(-0.2, 0.4, 3.0)};
    for (auto& f : fs) {
        for (double x : {-3.0, -0.5, 0.1, 0.4, 1.5, 3.0}) {
            double q = mbm::numerics::integrate([&](double s) { return f(s); }, -4.0, x, 1e-12).value;
            EXPECT_NEAR(f.antiderivative(x), q, 1e-8) << f.describe() << " " << x;
        }
        EXPECT_NEAR(f.scaled(2.0).integral(), 2 * f.integral(), 1e-14);
        EXPECT_TRUE(std::isfinite(f.abs_moment(0.3)));
    }
    EXPECT_NEAR(fs[0].integral(), 1.5, 1e-15);
    EXPECT_NEAR(fs[1].integral(), 1.4, 1e-15);
}

TEST(PathIntegral, IndicatorMatchesOccupation) {
    auto p = synth::gen_fbm(0.5, TimeGrid::over(0.0, 1.0, 2001), 4);
    auto f = lass::TestFunction::indicator(-0.3, 0.2);
    EXPECT_NEAR(lass::path_integral(p, f, 0.77), lt::occupation_integral(p, lt::StepFunction::indicator(-0.3, 0.2), 0.77),
                1e-12);
    EXPECT_NEAR(lass::path_integral(p, f, 1.0, 2.0, 0.1),
                lt::occupation_integral(p, lt::StepFunction::indicator(-0.05, 0.2), 1.0), 1e-12);
}

TEST(OccupationFunctional, MatchesDirectBrownianSimulation) {
    auto f = lass::TestFunction::indicator(-1, 1);
    auto h = HurstFunction::constant(0.5);
    lass::FunctionalOptions opt;
    opt.replicas = 3000;
    opt.window.grid_n = 512;
    auto v = lass::occupation_functional(f, h, 0.5, 0.01, 1.0, 1.0, 11, opt);
    synth::FbmSynthesizer bm(0.5, TimeGrid::over(0.0, 1.0, 513));
    std::vector<double> d;
    for (std::size_t r = 0; r < 3000; ++r) d.push_back(lass::path_integral(bm.generate(mbm::split_seed(12, r)), f, 1.0));
    EXPECT_NEAR(mean_of(v), mean_of(d), 3 * std::hypot(se_of(v), se_of(d)));
    auto v2 = lass::occupation_functional(f.scaled(2.0), h, 0.5, 0.01, 1.0, 1.0, 11, opt);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v2[i], 2 * v[i], 1e-12);
}

TEST(OccupationFunctional, ApproachesLocalTimeLimit) {
    // narrow support keeps the finite-lambda smoothing bias, about width / (3 lambda^{H0}), below MC resolution
    auto f = lass::TestFunction::triangle(0.0, 0.05, 20.0);
    auto h = HurstFunction::linear(0.4, 0.2);  // H(0.5) = 0.5
    lass::FunctionalOptions opt;
    opt.replicas = 400;
    opt.window.grid_n = 1024;
    auto ref = lass::limit_reference(f, 0.5, 1.0, 0.0, 400, 13, 1024, lass::limit_scale(Representation::moving_average, 0.5));
    for (double lambda : {4.0, 16.0}) {
        auto v = lass::occupation_functional(f, h, 0.5, 1e-3, lambda, 1.0, 14, opt);
        auto res = mbm::stats::energy_test(Sample::column(v), Sample::column(ref), 300);
        EXPECT_GT(res.p_value, 0.01) << lambda;
    }
    EXPECT_THROW(lass::occupation_functional(f, h, 0.5, 1e-3, 0.5, 1.0, 1, opt), std::invalid_argument);
    opt.horizon = 2.0;
    EXPECT_THROW(lass::occupation_functional(f, h, 0.5, 1e-3, 4.0, 1.0, 1, opt), std::invalid_argument);
}

TEST(WeightedFunctional, MatchesLimitAndSeparatesLevels) {
    auto f = lass::TestFunction::indicator(-1, 1, 0.5);
    auto h = HurstFunction::constant(0.5);
    lass::ScalingPair sp{1.5, 2.0};  // kernel width rho^{a - H0} = rho
    lass::FunctionalOptions opt;
    opt.replicas = 400;
    opt.window.grid_n = 1024;
    auto ref0 = lass::limit_reference(f, 0.5, 1.0, 0.0, 400, 15, 1024);
    auto w0 = lass::weighted_occupation_functional(f, h, 0.5, 1e-2, 0.0, sp, 1.0, 16, opt);
    EXPECT_GT(mbm::stats::energy_test(Sample::column(w0), Sample::column(ref0), 300).p_value, 0.01);
    auto w1 = lass::weighted_occupation_functional(f, h, 0.5, 1e-2, 1.0, sp, 1.0, 17, opt);
    EXPECT_LT(mbm::stats::energy_test(Sample::column(w0), Sample::column(w1), 300).p_value, 0.01);
}

TEST(WeightedFunctional, ShallowScalingApproachesLimitSlowly) {
    // theta = rho^{0.6}: the kernel width is rho^{0.1} and the bias from the |x| kink of E l(1, x) shrinks like it
    auto f = lass::TestFunction::indicator(-1, 1, 0.5);
    auto h = HurstFunction::constant(0.5);
    lass::FunctionalOptions opt;
    opt.replicas = 1000;
    opt.window.grid_n = 512;
    double previous = 0.0;
    for (double rho : {1e-2, 1e-4, 1e-6}) {
        auto w = lass::weighted_occupation_functional(f, h, 0.5, rho, 0.0, {0.6, 1.1}, 1.0, 18, opt);
        const double m = mean_of(w);
        EXPECT_GT(m, previous);
        EXPECT_LT(m, std::sqrt(2 / std::numbers::pi));
        previous = m;
    }
}

TEST(WeightedFunctional, ConfigurationErrors) {
    auto f = lass::TestFunction::indicator(-1, 1);
    auto h = HurstFunction::constant(0.5);
    lass::FunctionalOptions opt;
    opt.replicas = 2;
    EXPECT_THROW(lass::weighted_occupation_functional(f, h, 0.5, 1e-2, 0.0, {0.4, 0.9}, 1.0, 1, opt),
                 std::invalid_argument);
    EXPECT_THROW(lass::weighted_occupation_functional(f, h, 0.5, 1e-2, 0.0, {0.6, 1.1}, 1.0, 1, opt, 0.6),
                 std::invalid_argument);
    EXPECT_NO_THROW(lass::weighted_occupation_functional(f, h, 0.5, 1e-2, 0.0, {0.6, 1.1}, 1.0, 1, opt, 0.2));
}
