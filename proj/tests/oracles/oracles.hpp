#pragma once

#include <functional>
#include <span>
#include <vector>

// Independent reference computations used only by the tests.
namespace mbm::oracle {

// fBm covariance 1/2 (t^2H + s^2H - |t-s|^2H)
double fbm_covariance(double H, double s, double t);

// nested adaptive quadrature of the ordered-simplex integral
// int_{0<s_1<...<s_m<h} prod (s_j - s_{j-1})^{-b_j} ds, s_0 = 0
double dirichlet_nested(std::span<const double> b, double h);

// plain midpoint-free integral of f over [a, b] with algebraic endpoint singularities (GSL qaws)
double singular_integral(const std::function<double(double)>& f, double a, double b, double alpha, double beta);

// brute force min/max of f over [a, b] on a grid of the given step
std::pair<double, double> brute_extrema(const std::function<double(double)>& f, double a, double b, double step);

// kernel of the moving-average field, evaluated directly
double ma_kernel(double H, double t, double u);

// int_{-t_past}^{t} K_H(t,u)^2 du for constant H, straight from the kernel formula
double ma_variance_naive(double H, double t, double t_past);

}  // namespace mbm::oracle
