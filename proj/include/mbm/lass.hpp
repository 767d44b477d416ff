#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mbm/common.hpp"
#include "mbm/hurst.hpp"
#include "mbm/localtime.hpp"
#include "mbm/stats.hpp"
#include "mbm/synth.hpp"

namespace mbm::lass {

// theta(rho) = rho^a, psi(rho) = rho^b
struct ScalingPair {
    double a = 0.0;
    double b = 0.0;

    double theta(double rho) const;
    double psi(double rho) const;
    // empty when b - a = 1 - H0 and a > H0
    std::vector<std::string> violations(double h0) const;
    void validate(double h0) const;
};

struct WindowOptions {
    Representation representation = Representation::moving_average;
    std::size_t grid_n = 4096;  // steps on the rescaled unit interval
    synth::KernelQuadrature kernel = {};
    synth::SpectralQuadrature spectral = {};
};

// u -> (B(t0 + rho u) - B(t0)) / rho^{H(t0)} on [0, horizon]
class RescaledGenerator {
public:
    RescaledGenerator(const hurst::HurstFunction& h, double t0, double rho, double horizon = 1.0,
                      WindowOptions opt = {});
    ~RescaledGenerator();
    RescaledGenerator(RescaledGenerator&&) noexcept;
    RescaledGenerator& operator=(RescaledGenerator&&) noexcept;

    SamplePath generate(std::uint64_t seed);
    double h0() const { return h0_; }
    double rho() const { return rho_; }

private:
    struct Impl;
    double h0_ = 0.5;
    double rho_ = 1.0;
    std::unique_ptr<Impl> impl_;
};

// standard deviation of the limiting fBm at u = 1 for each representation
double limit_scale(Representation rep, double h0);

SamplePath rescale_path(const hurst::HurstFunction& h, double t0, double rho, std::size_t grid_n, std::uint64_t seed,
                        Representation rep = Representation::moving_average);

// Y(u, x) = [L(t0 + rho u, X) - L(t0, X)] / rho^{1-H0}, X = rho^{H0} x + B(t0), u on the field rows in [t0, t0+rho]
struct YCurve {
    TimeGrid grid;
    std::vector<double> values;
};
YCurve rescaled_local_time(const localtime::LocalTimeField& field, const SamplePath& path,
                           const hurst::HurstFunction& h, double t0, double rho, double x);

// energy distance with permutation p-value, at least 200 replicas per sample
stats::TwoSampleResult fdd_distance(const stats::Sample& a, const stats::Sample& b, std::size_t permutations = 500,
                                    std::uint64_t seed = 1);

struct LassOptions {
    WindowOptions window = {};
    std::size_t permutations = 500;
    double p_threshold = 0.01;
    double reference_shift = 0.0;  // reference fBm index is H(t0) + shift
    double monotone_slack = 1.0;   // allowed increase, in null standard deviations
};

struct RhoResult {
    double rho = 0.0;
    double distance = 0.0;
    double p_value = 1.0;
    double null_sd = 0.0;
};

struct ConvergenceReport {
    double h0 = 0.0;
    double reference_hurst = 0.0;
    std::vector<RhoResult> per_rho;
    bool monotone = false;
    bool final_pass = false;
    bool verdict = false;
};

// Y_rho(t_j, x) against local times l(t_j, x) of limit_scale * fBm-H(t0), both from the local-time pipeline
// at dx = (1/grid_n)^{H0}
ConvergenceReport verify_lass_localtime(const hurst::HurstFunction& h, double t0, double x, std::span<const double> rhos,
                                        std::span<const double> t_coords, std::size_t n_replicas, std::uint64_t seed,
                                        const LassOptions& opt = {});

// C_m = max over pairs of E|Y(t) - Y(s)|^m / |t - s|^{(1-H0) m}, per rho and order
struct TightnessTable {
    std::vector<double> rhos;
    std::vector<int> orders;
    std::vector<double> constants;  // rhos x orders
};
TightnessTable tightness_constants(const hurst::HurstFunction& h, double t0, double x, std::span<const double> rhos,
                                   std::span<const std::pair<double, double>> pairs, std::span<const int> orders,
                                   std::size_t n_replicas, std::uint64_t seed, const WindowOptions& opt = {});

// closed library of compactly supported test functions
class TestFunction {
public:
    enum class Shape { indicator, triangle, truncated_gaussian };

    static TestFunction indicator(double lo, double hi, double height = 1.0);
    static TestFunction triangle(double center, double half_width, double height = 1.0);
    static TestFunction truncated_gaussian(double center, double sigma, double cutoff = 4.0, double height = 1.0);

    double operator()(double x) const;
    double antiderivative(double x) const;  // zero left of the support
    double integral() const;
    double abs_moment(double xi) const;  // int |f(x)| |x|^xi dx
    TestFunction scaled(double c) const;
    Shape shape() const { return shape_; }
    std::string describe() const;

private:
    TestFunction(Shape s, double c, double w, double height, double cutoff);
    Shape shape_;
    double center_;
    double width_;  // half width, or sigma
    double height_;
    double cutoff_;
};

// int_0^{u} f(kappa (X(s) - y)) ds along the piecewise-linear path
double path_integral(const SamplePath& path, const TestFunction& f, double u, double kappa = 1.0, double y = 0.0);

struct FunctionalOptions {
    WindowOptions window = {};
    std::size_t replicas = 500;
    double horizon = 0.0;  // rescaled horizon; 0 means exactly the integration range
};

// (1/lambda^{1-H0}) int_0^{lambda t} f(B^rho(s)) ds, one value per replica
std::vector<double> occupation_functional(const TestFunction& f, const hurst::HurstFunction& h, double t0, double rho,
                                          double lambda, double t, std::uint64_t seed,
                                          const FunctionalOptions& opt = {});

// (1/psi(rho)) int_{t0}^{t0 + rho t} f((B(s) - B(t0) - rho^{H0} y) / theta(rho)) ds; xi = 0 picks half the bound
std::vector<double> weighted_occupation_functional(const TestFunction& f, const hurst::HurstFunction& h, double t0,
                                                   double rho, double y, const ScalingPair& scaling, double t,
                                                   std::uint64_t seed, const FunctionalOptions& opt = {},
                                                   double xi = 0.0);

// int f dx * l(t, y) from scale * fBm-H0 paths on [0, t] through the local-time pipeline
std::vector<double> limit_reference(const TestFunction& f, double h0, double t, double y, std::size_t replicas,
                                    std::uint64_t seed, std::size_t grid_n = 4096, double scale = 1.0);

}  // namespace mbm::lass
