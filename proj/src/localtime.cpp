#include "mbm/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mbm/numerics.hpp"

namespace mbm::localtime {

namespace {

long raw_bin(const XGrid& x, double v) { return static_cast<long>(std::floor((v - x.x_min) / x.dx)); }

// spreads the time dt of one path cell a -> b over the bins its linear interpolant crosses
template <typename Sink>
void distribute(double a, double b, double dt, const XGrid& x, Sink&& sink) {
    if (a == b) {
        sink(raw_bin(x, a), dt);
        return;
    }
    const double lo = std::min(a, b), hi = std::max(a, b);
    const long jl = raw_bin(x, lo), jh = raw_bin(x, hi);
    if (jl == jh) {
        sink(jl, dt);
        return;
    }
    const double span = hi - lo;
    double used = 0.0;
    for (long j = jl; j < jh; ++j) {
        const double upper = x.x_min + static_cast<double>(j + 1) * x.dx;
        const double lower = j == jl ? lo : x.x_min + static_cast<double>(j) * x.dx;
        const double w = (upper - lower) / span * dt;
        sink(j, w);
        used += w;
    }
    sink(jh, dt - used);
}

XGrid extend_to_path(const SamplePath& path, XGrid x, bool auto_extend) {
    auto [mn, mx] = std::minmax_element(path.values.begin(), path.values.end());
    if (raw_bin(x, *mn) >= 0 && raw_bin(x, *mx) < static_cast<long>(x.m)) return x;
    if (!auto_extend) {
        std::ostringstream os;
        os << "path range [" << *mn << ", " << *mx << "] leaves the space grid [" << x.x_min << ", " << x.x_max()
           << ")";
        throw std::out_of_range(os.str());
    }
    const long below = std::max(0L, -raw_bin(x, *mn));
    const long above = std::max(0L, raw_bin(x, *mx) - static_cast<long>(x.m) + 1);
    x.x_min -= static_cast<double>(below) * x.dx;
    x.m += static_cast<std::size_t>(below + above);
    // the shifted origin may round differently, so make sure both extremes fit
    while (raw_bin(x, *mn) < 0) {
        x.x_min -= x.dx;
        ++x.m;
    }
    while (raw_bin(x, *mx) >= static_cast<long>(x.m)) ++x.m;
    return x;
}

}  // namespace

std::optional<std::size_t> XGrid::bin_of(double v) const {
    long j = raw_bin(*this, v);
    if (j < 0 || j >= static_cast<long>(m)) return std::nullopt;
    return static_cast<std::size_t>(j);
}

void XGrid::validate() const {
    if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("space grid step must be positive");
    if (m < 1) throw std::invalid_argument("space grid needs at least one bin");
    if (!std::isfinite(x_min)) throw std::invalid_argument("space grid origin must be finite");
}

XGrid XGrid::covering(double lo, double hi, double dx, double anchor) {
    if (!(dx > 0.0)) throw std::invalid_argument("space grid step must be positive");
    if (!(hi >= lo)) throw std::invalid_argument("space grid needs lo <= hi");
    XGrid g;
    g.dx = dx;
    g.x_min = anchor + (std::floor((lo - anchor) / dx + 0.5) - 0.5) * dx;
    if (g.x_min > lo) g.x_min -= dx;
    g.m = static_cast<std::size_t>(std::floor((hi - g.x_min) / dx)) + 1;
    return g;
}

XGrid default_x_grid(const SamplePath& path, double mean_hurst, double anchor, double scale) {
    auto [mn, mx] = std::minmax_element(path.values.begin(), path.values.end());
    const double dx = scale * std::pow(path.grid.dt, mean_hurst);
    return XGrid::covering(std::min(*mn, anchor), std::max(*mx, anchor), dx, anchor);
}

double LocalTimeField::value(double t, double x_level) const {
    const std::size_t k = grid.index_of(t);
    auto j = x.bin_of(x_level);
    if (!j) throw std::out_of_range("level outside the space grid of the local-time field");
    return at(k, *j);
}

LocalTimeField local_time_field(const SamplePath& path, XGrid x, FieldOptions options) {
    path.validate();
    x.validate();
    if (options.time_stride < 1) throw std::invalid_argument("time stride must be >= 1");
    x = extend_to_path(path, x, options.auto_extend);
    const std::size_t n = path.grid.n;
    const std::size_t stride = options.time_stride;
    const std::size_t rows = (n - 1) / stride + 1;

    LocalTimeField f;
    f.grid = TimeGrid{path.grid.t0, path.grid.dt * static_cast<double>(stride), rows};
    f.x = x;
    f.table.assign(rows * x.m, 0.0);
    f.total_mass.assign(rows, 0.0);
    std::vector<double> occ(x.m, 0.0);
    const double dt = path.grid.dt;
    double mass = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        distribute(path.values[k], path.values[k + 1], dt, x, [&](long j, double w) {
            occ[static_cast<std::size_t>(j)] += w;
            mass += w;
        });
        if ((k + 1) % stride == 0) {
            const std::size_t r = (k + 1) / stride;
            double* row = f.table.data() + r * x.m;
            for (std::size_t j = 0; j < x.m; ++j) row[j] = occ[j] / x.dx;
            f.total_mass[r] = mass;
        }
    }
    return f;
}

std::vector<double> bin_series(const SamplePath& path, const XGrid& x, std::size_t j) {
    const std::size_t n = path.grid.n;
    std::vector<double> out(n, 0.0);
    const long target = static_cast<long>(j);
    double occ = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = path.values[k], b = path.values[k + 1];
        const long ja = raw_bin(x, a), jb = raw_bin(x, b);
        if (std::min(ja, jb) <= target && target <= std::max(ja, jb))
            distribute(a, b, path.grid.dt, x, [&](long i, double w) {
                if (i == target) occ += w;
            });
        out[k + 1] = occ / x.dx;
    }
    return out;
}

StepFunction StepFunction::constant(double v) { return StepFunction{{}, {v}}; }

StepFunction StepFunction::indicator(double a, double b, double height) {
    if (!(b > a)) throw std::invalid_argument("indicator needs a < b");
    return StepFunction{{a, b}, {0.0, height, 0.0}};
}

double StepFunction::operator()(double x) const {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    return values[static_cast<std::size_t>(it - breaks.begin())];
}

void StepFunction::validate() const {
    if (values.size() != breaks.size() + 1) throw std::invalid_argument("step function needs breaks + 1 values");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i] > breaks[i - 1])) throw std::invalid_argument("step function breaks must increase");
}

double occupation_integral(const SamplePath& path, const StepFunction& f, double t) {
    f.validate();
    const TimeGrid& g = path.grid;
    if (t < g.t0 || t > g.end() + 1e-12 * g.dt) throw std::invalid_argument("time outside the path grid");
    const double steps = (t - g.t0) / g.dt;
    const std::size_t full = std::min(static_cast<std::size_t>(std::floor(steps + 1e-9)), g.n - 1);
    const double frac = std::max(0.0, steps - static_cast<double>(full));

    auto cell = [&](double a, double b, double dt) {
        if (a == b) return dt * f(a);
        const double lo = std::min(a, b), hi = std::max(a, b);
        auto first = std::upper_bound(f.breaks.begin(), f.breaks.end(), lo);
        auto last = std::upper_bound(f.breaks.begin(), f.breaks.end(), hi);
        if (first == last) return dt * f.values[static_cast<std::size_t>(first - f.breaks.begin())];
        double acc = 0.0, lower = lo;
        for (auto it = first; it != last; ++it) {
            acc += (*it - lower) * f.values[static_cast<std::size_t>(it - f.breaks.begin())];
            lower = *it;
        }
        acc += (hi - lower) * f.values[static_cast<std::size_t>(last - f.breaks.begin())];
        return acc / (hi - lo) * dt;
    };

    double total = 0.0;
    for (std::size_t k = 0; k < full; ++k) total += cell(path.values[k], path.values[k + 1], g.dt);
    if (frac > 1e-9 && full + 1 < g.n) {
        const double a = path.values[full];
        const double b = a + frac * (path.values[full + 1] - a);
        total += cell(a, b, frac * g.dt);
    }
    return total;
}

double local_time_increment(const LocalTimeField& field, double t1, double t2, double x_level) {
    if (t2 < t1) throw std::invalid_argument("local_time_increment needs t1 <= t2");
    return field.value(t2, x_level) - field.value(t1, x_level);
}

SamplePath slice(const SamplePath& path, std::size_t k0, std::size_t k1) {
    if (!(k0 < k1) || k1 >= path.grid.n) throw std::out_of_range("slice bounds outside the path");
    SamplePath out;
    out.grid = TimeGrid{path.grid.at(k0), path.grid.dt, k1 - k0 + 1};
    out.values.assign(path.values.begin() + static_cast<long>(k0), path.values.begin() + static_cast<long>(k1) + 1);
    out.meta = path.meta;
    return out;
}

SamplePath subsample(const SamplePath& path, std::size_t stride) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    SamplePath out;
    const std::size_t n = (path.grid.n - 1) / stride + 1;
    out.grid = TimeGrid{path.grid.t0, path.grid.dt * static_cast<double>(stride), n};
    out.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.values[k] = path.values[k * stride];
    out.meta = path.meta;
    return out;
}

std::vector<double> local_time_increments(std::span<const LocalTimeField> fields, std::span<const SamplePath> paths,
                                          double t, double h, Anchor anchor, double x_level) {
    if (fields.size() != paths.size()) throw std::invalid_argument("fields and paths must pair up");
    std::vector<double> out;
    out.reserve(fields.size());
    for (std::size_t r = 0; r < fields.size(); ++r) {
        const auto& f = fields[r];
        const double level = anchor == Anchor::path_point ? paths[r].values[paths[r].grid.index_of(t)] : x_level;
        auto j = f.x.bin_of(level);
        // a level outside an auto-extended grid was never visited
        if (!j) {
            out.push_back(0.0);
            continue;
        }
        const std::size_t k1 = f.grid.index_of(t), k2 = f.grid.index_of(t + h);
        out.push_back(f.at(k2, *j) - f.at(k1, *j));
    }
    return out;
}

Estimate moment_of(std::span<const double> samples, int m) {
    std::vector<double> p(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) p[i] = std::pow(samples[i], m);
    return Estimate{numerics::mean(p), numerics::std_error(p), p.size()};
}

Estimate local_time_moment(std::span<const LocalTimeField> fields, std::span<const SamplePath> paths,
                           const hurst::HurstFunction& hf, int m, double h, double t, Anchor anchor, double x_level,
                           bool normalized) {
    if (m < 1 || m > 6) throw std::invalid_argument("moment order must lie in 1..6");
    if (fields.size() < 100) throw std::invalid_argument("local_time_moment needs at least 100 replicas");
    if (!(h > 0.0)) throw std::invalid_argument("increment length must be positive");
    auto inc = local_time_increments(fields, paths, t, h, anchor, x_level);
    if (normalized) {
        const double scale = std::pow(h, 1.0 - hf.sup_inf(t, t + h).sup);
        for (double& v : inc) v /= scale;
    }
    return moment_of(inc, m);
}

MomentFit fit_moment_constant(std::span<const int> orders, std::span<const double> moments, double hurst_sup) {
    if (orders.empty() || orders.size() != moments.size())
        throw std::invalid_argument("fit_moment_constant needs matching non-empty orders and moments");
    MomentFit fit;
    double lo = 1e300;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        const double m = orders[i];
        const double c = std::pow(moments[i] / std::pow(std::tgamma(m + 1.0), hurst_sup), 1.0 / m);
        fit.per_order.push_back(c);
        fit.c_hat = std::max(fit.c_hat, c);
        lo = std::min(lo, c);
    }
    fit.spread = fit.c_hat / lo;
    return fit;
}

double dirichlet_integral(std::span<const double> b, double h) {
    if (b.empty()) throw std::invalid_argument("dirichlet_integral needs at least one exponent");
    if (!(h > 0.0)) throw std::domain_error("dirichlet_integral needs h > 0");
    double sum_b = 0.0, log_num = 0.0;
    for (double bj : b) {
        if (!(bj < 1.0)) throw std::domain_error("dirichlet exponents must be < 1");
        sum_b += bj;
        log_num += std::lgamma(1.0 - bj);
    }
    const double m = static_cast<double>(b.size());
    return std::exp((m - sum_b) * std::log(h) + log_num - std::lgamma(1.0 + m - sum_b));
}

}  // namespace mbm::localtime
