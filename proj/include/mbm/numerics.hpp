#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mbm::numerics {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
};

// adaptive Gauss-Kronrod with singularity extrapolation (GSL qags)
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-10, double abs_tol = 0.0);
// integral over [a, inf) (GSL qagiu)
QuadResult integrate_upper(const std::function<double(double)>& f, double a,
                           double rel_tol = 1e-10, double abs_tol = 0.0);
// integral of f(x) cos(omega x) over [a, inf) (GSL qawf)
QuadResult integrate_cosine_tail(const std::function<double(double)>& f, double a, double omega,
                                 double abs_tol = 1e-13);

// Chebyshev points of the second kind on [a, b], ascending
std::vector<double> chebyshev_nodes(std::size_t count, double a, double b);
// barycentric interpolation weights of the nodes above evaluated at x
void barycentric_weights(std::span<const double> nodes, double x, std::span<double> out);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased
double std_error(std::span<const double> v);
double quantile(std::vector<double> v, double p);
double median(std::vector<double> v);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_se = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// E|N|^m for a standard normal N
double abs_normal_moment(double m);

}  // namespace mbm::numerics
