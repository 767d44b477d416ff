#pragma once

#include <span>
#include <string>
#include <vector>

#include "mbm/common.hpp"
#include "mbm/hurst.hpp"
#include "mbm/localtime.hpp"

namespace mbm::regularity {

struct ModulusCurve {
    std::vector<double> deltas;  // strictly decreasing
    std::vector<double> values;
    std::string normalizer;
    std::vector<double> running;  // running extremum over decreasing deltas, when defined
    std::vector<std::string> warnings;

    void validate() const;
};

// geometric ladder hi, hi*ratio, ... down to the last value >= lo
std::vector<double> delta_ladder(double hi, double lo, double ratio = 0.8408964152537145);
// 1e-1 down to max(1e-4, 10 dt)
std::vector<double> default_ladder(const TimeGrid& grid);

// cross-replica maximum and 99th percentile per delta
struct Envelope {
    ModulusCurve max;
    ModulusCurve q99;
};
Envelope envelope(std::span<const ModulusCurve> curves);

// growth of a curve as delta -> 0, as minus the log-log slope of values against deltas
double growth_exponent(const ModulusCurve& curve);
// finite, positive and not growing faster than delta^{-tol}
bool is_bounded(const ModulusCurve& curve, double tol = 0.03);

// exponent_offset is added to the power of delta in the denominator
struct LocalModulusOptions {
    localtime::Anchor anchor = localtime::Anchor::fixed_x;
    double x_level = 0.0;
    double exponent_offset = 0.0;
};

// [L(t+d, X) - L(t, X)] / [d^{1-H(t)} (log log 1/d)^{H(t)}], L binned on x
ModulusCurve local_modulus_curve(const SamplePath& path, const localtime::XGrid& x, const hurst::HurstFunction& h,
                                 double t, std::span<const double> deltas, const LocalModulusOptions& opt = {});

struct LocalModulus {
    std::vector<ModulusCurve> replicas;
    Envelope env;
};
LocalModulus local_modulus_statistic(std::span<const localtime::LocalTimeField> fields,
                                     std::span<const SamplePath> paths, const hurst::HurstFunction& h, double t,
                                     std::span<const double> deltas, const LocalModulusOptions& opt = {});

// sup over grid pairs at lag d of |L(t,x) - L(s,x)| / [d^{1-H*+offset} (log 1/d)^{H*}],
// H* = sup H over the path window plus hurst_shift
struct UniformModulusOptions {
    double exponent_offset = 0.0;
    double hurst_shift = 0.0;
};
ModulusCurve uniform_modulus_statistic(const SamplePath& path, const localtime::XGrid& x, double x_level,
                                       const hurst::HurstFunction& h, std::span<const double> deltas,
                                       const UniformModulusOptions& opt = {});

// sup_{[t0,t0+d]} |B(s) - B(t0)| / (d / log|log d|)^{H(t0)+offset}, running infimum
ModulusCurve chung_statistic(const SamplePath& path, const hurst::HurstFunction& h, double t0,
                             std::span<const double> deltas, double exponent_offset = 0.0);
// sup_{[t0,t0+d]} |B(s) - B(t0)| / [d^{H(t0)+offset} (log|log d|)^{1/2}], running supremum
ModulusCurve lil_statistic(const SamplePath& path, const hurst::HurstFunction& h, double t0,
                           std::span<const double> deltas, double exponent_offset = 0.0);

enum class VGrouping { printed, under_root };
double v_constant(double hurst, Representation rep, VGrouping grouping = VGrouping::printed, double rel_tol = 1e-10);
// int_0^inf [(1+u)^{H-1/2} - u^{H-1/2}]^2 du
double moving_average_past_integral(double hurst, double rel_tol = 1e-10);

struct HolderOptions {
    std::size_t scales = 8;
    std::size_t points_per_scale = 256;
    std::size_t bins = 32;
    double level = 0.95;
};

struct HolderEstimate {
    double alpha_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::vector<double> scales;
    std::vector<double> mean_log_osc;
    double r_squared = 0.0;
    std::size_t replicas = 0;
    std::size_t degenerate = 0;
    bool flagged = false;
};

// log-log regression of sup_{|s-t0|<=d} |X(s) - X(t0)| on dyadic d
HolderEstimate holder_exponent_estimate(const SamplePath& path, double t0, const HolderOptions& opt = {});
HolderEstimate holder_exponent_estimate(std::span<const SamplePath> paths, double t0, const HolderOptions& opt = {});
// same regression for sup_x [L(t0+d, x) - L(t0, x)]; each scale is binned on its own window range
HolderEstimate local_time_holder_estimate(std::span<const SamplePath> paths, double t0, const HolderOptions& opt = {});

struct RangeReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 1.0;
    bool holds = false;
};
RangeReport range_inequality_check(const SamplePath& path, const localtime::LocalTimeField& field, double t0,
                                   double delta);

// sup_j |L(I, x_j + k dx) - L(I, x_j)| / (k dx)^alpha over bin spacings k
ModulusCurve space_modulus_statistic(const localtime::LocalTimeField& field, double t1, double t2,
                                     std::span<const std::size_t> spacings, double alpha,
                                     const hurst::HurstFunction& h);

}  // namespace mbm::regularity
