#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mbm/common.hpp"
#include "mbm/hurst.hpp"

namespace mbm::localtime {

// bins [x_min + j dx, x_min + (j+1) dx), j = 0..m-1
struct XGrid {
    double x_min = 0.0;
    double dx = 1.0;
    std::size_t m = 1;

    double edge(std::size_t j) const { return x_min + static_cast<double>(j) * dx; }
    double center(std::size_t j) const { return x_min + (static_cast<double>(j) + 0.5) * dx; }
    double x_max() const { return edge(m); }
    std::optional<std::size_t> bin_of(double x) const;
    void validate() const;

    // smallest grid of width dx covering [lo, hi] with `anchor` at a bin center
    static XGrid covering(double lo, double hi, double dx, double anchor = 0.0);
};

// dx = scale * dt^{mean_hurst}, anchored so that `anchor` is a bin center
XGrid default_x_grid(const SamplePath& path, double mean_hurst, double anchor = 0.0, double scale = 1.0);

struct FieldOptions {
    bool auto_extend = true;
    std::size_t time_stride = 1;  // path steps per stored row
};

struct LocalTimeField {
    TimeGrid grid;  // rows
    XGrid x;
    std::vector<double> table;       // rows x m, cumulative local time
    std::vector<double> total_mass;  // per row, sum_j L dx

    std::size_t rows() const { return grid.n; }
    double at(std::size_t k, std::size_t j) const { return table[k * x.m + j]; }
    std::span<const double> row(std::size_t k) const { return {table.data() + k * x.m, x.m}; }
    // L(t, x) at the bin containing x, t a row time
    double value(double t, double x_level) const;
};

LocalTimeField local_time_field(const SamplePath& path, XGrid x, FieldOptions options = {});

// L(t_k, bin j) for every path time t_k, built the same way as the field
std::vector<double> bin_series(const SamplePath& path, const XGrid& x, std::size_t j);

// piecewise-constant function: values[i] on [breaks[i-1], breaks[i]), values.size() == breaks.size() + 1
struct StepFunction {
    std::vector<double> breaks;
    std::vector<double> values;

    static StepFunction constant(double v);
    static StepFunction indicator(double a, double b, double height = 1.0);
    double operator()(double x) const;
    void validate() const;
};

// int_{t0}^{t} f(B(s)) ds over the piecewise-linear path
double occupation_integral(const SamplePath& path, const StepFunction& f, double t);

double local_time_increment(const LocalTimeField& field, double t1, double t2, double x_level);

SamplePath slice(const SamplePath& path, std::size_t k0, std::size_t k1);
SamplePath subsample(const SamplePath& path, std::size_t stride);

struct Ensemble {
    std::vector<SamplePath> paths;
    std::vector<LocalTimeField> fields;
    std::uint64_t master_seed = 0;
};

enum class Anchor { path_point, fixed_x };

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

// per replica L(t+h, x*) - L(t, x*), x* = B(t) or the given level
std::vector<double> local_time_increments(std::span<const LocalTimeField> fields, std::span<const SamplePath> paths,
                                          double t, double h, Anchor anchor, double x_level = 0.0);

// m-th moment of the increment, divided by h^{1 - H_{t,t+h}} when normalized
Estimate local_time_moment(std::span<const LocalTimeField> fields, std::span<const SamplePath> paths,
                           const hurst::HurstFunction& hf, int m, double h, double t, Anchor anchor,
                           double x_level = 0.0, bool normalized = true);
Estimate moment_of(std::span<const double> samples, int m);

// c_m = (M_m / (m!)^{H})^{1/m}; the fitted constant is max_m c_m, spread = max c_m / min c_m
struct MomentFit {
    double c_hat = 0.0;
    std::vector<double> per_order;
    double spread = 0.0;
};
MomentFit fit_moment_constant(std::span<const int> orders, std::span<const double> moments, double hurst_sup);

// int over t < s_1 < ... < s_m < t + h of prod (s_j - s_{j-1})^{-b_j}
double dirichlet_integral(std::span<const double> b, double h);

}  // namespace mbm::localtime
