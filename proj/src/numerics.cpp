#include "mbm/numerics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace mbm::numerics {

namespace {

struct Workspace {
    explicit Workspace(std::size_t n) : ws(gsl_integration_workspace_alloc(n)) {}
    ~Workspace() { gsl_integration_workspace_free(ws); }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
    gsl_integration_workspace* ws;
};

double trampoline(double x, void* p) {
    return (*static_cast<const std::function<double(double)>*>(p))(x);
}

struct SilenceGsl {
    SilenceGsl() { old = gsl_set_error_handler_off(); }
    ~SilenceGsl() { gsl_set_error_handler(old); }
    gsl_error_handler_t* old;
};

constexpr std::size_t kLimit = 2000;

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                     double abs_tol) {
    if (a == b) return {};
    SilenceGsl guard;
    Workspace w(kLimit);
    gsl_function F{&trampoline, const_cast<std::function<double(double)>*>(&f)};
    QuadResult r;
    int status = gsl_integration_qags(&F, a, b, abs_tol, rel_tol, kLimit, w.ws, &r.value, &r.abs_error);
    if (status != GSL_SUCCESS && status != GSL_EROUND && r.abs_error > 1e-8 * std::max(1.0, std::abs(r.value)))
        throw std::runtime_error(std::string("quadrature failed: ") + gsl_strerror(status));
    return r;
}

QuadResult integrate_upper(const std::function<double(double)>& f, double a, double rel_tol,
                           double abs_tol) {
    SilenceGsl guard;
    Workspace w(kLimit);
    gsl_function F{&trampoline, const_cast<std::function<double(double)>*>(&f)};
    QuadResult r;
    int status = gsl_integration_qagiu(&F, a, abs_tol, rel_tol, kLimit, w.ws, &r.value, &r.abs_error);
    if (status != GSL_SUCCESS && status != GSL_EROUND && r.abs_error > 1e-8 * std::max(1.0, std::abs(r.value)))
        throw std::runtime_error(std::string("quadrature failed: ") + gsl_strerror(status));
    return r;
}

QuadResult integrate_cosine_tail(const std::function<double(double)>& f, double a, double omega,
                                 double abs_tol) {
    SilenceGsl guard;
    Workspace w(kLimit), cyc(kLimit);
    std::unique_ptr<gsl_integration_qawo_table, decltype(&gsl_integration_qawo_table_free)> tab(
        gsl_integration_qawo_table_alloc(omega, 1.0, GSL_INTEG_COSINE, 50), &gsl_integration_qawo_table_free);
    gsl_function F{&trampoline, const_cast<std::function<double(double)>*>(&f)};
    QuadResult r;
    int status = gsl_integration_qawf(&F, a, abs_tol, kLimit, w.ws, cyc.ws, tab.get(), &r.value, &r.abs_error);
    if (status != GSL_SUCCESS && status != GSL_EROUND && r.abs_error > 1e-8)
        throw std::runtime_error(std::string("oscillatory quadrature failed: ") + gsl_strerror(status));
    return r;
}

std::vector<double> chebyshev_nodes(std::size_t count, double a, double b) {
    std::vector<double> x(count);
    if (count == 1) {
        x[0] = 0.5 * (a + b);
        return x;
    }
    for (std::size_t i = 0; i < count; ++i) {
        double c = -std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1));
        x[i] = 0.5 * (a + b) + 0.5 * (b - a) * c;
    }
    return x;
}

void barycentric_weights(std::span<const double> nodes, double x, std::span<double> out) {
    const std::size_t n = nodes.size();
    if (n == 1) {
        out[0] = 1.0;
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (x == nodes[i]) {
            std::fill(out.begin(), out.end(), 0.0);
            out[i] = 1.0;
            return;
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = (i % 2 == 0) ? 1.0 : -1.0;
        if (i == 0 || i == n - 1) w *= 0.5;
        out[i] = w / (x - nodes[i]);
        total += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= total;
}

double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("variance needs at least 2 values");
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double std_error(std::span<const double> v) {
    return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(v.begin(), v.end());
    double pos = p * static_cast<double>(v.size() - 1);
    std::size_t i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= v.size()) return v.back();
    double w = pos - static_cast<double>(i);
    return v[i] * (1.0 - w) + v[i + 1] * w;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("linear_fit needs matching samples of size >= 2");
    double mx = mean(x), my = mean(y);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit fit;
    if (sxx == 0.0) throw std::invalid_argument("linear_fit with constant abscissa");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = syy - fit.slope * sxy;
    fit.r_squared = syy > 0 ? 1.0 - ssr / syy : 1.0;
    if (n > 2) fit.slope_se = std::sqrt(std::max(ssr, 0.0) / static_cast<double>(n - 2) / sxx);
    return fit;
}

double abs_normal_moment(double m) {
    return std::pow(2.0, m / 2.0) * std::tgamma((m + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

}  // namespace mbm::numerics
