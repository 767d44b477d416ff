#include "mbm/regularity.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mbm/numerics.hpp"

namespace mbm::regularity {

namespace {

constexpr double kInvE = 0.36787944117144233;

// grid lags for the requested deltas, rounded, deduplicated, at least 3 steps
std::vector<std::size_t> snap_lags(double dt, std::span<const double> deltas, std::size_t room) {
    std::vector<std::size_t> lags;
    double previous = std::numeric_limits<double>::infinity();
    for (double d : deltas) {
        if (!(d > 0.0) || d >= previous) throw std::invalid_argument("deltas must be positive and strictly decreasing");
        previous = d;
        if (d < 3.0 * dt * (1.0 - 1e-9)) throw std::invalid_argument("delta below 3 grid steps");
        auto k = static_cast<std::size_t>(std::llround(d / dt));
        if (k > room) throw std::invalid_argument("delta reaches beyond the grid");
        if (lags.empty() || k < lags.back()) lags.push_back(k);
    }
    return lags;
}

double loglog(double d) {
    if (!(d < kInvE)) throw std::invalid_argument("log log 1/delta requires delta < 1/e");
    return std::log(std::log(1.0 / d));
}

double z_of(double level) { return gsl_cdf_ugaussian_Pinv(0.5 * (1.0 + level)); }

std::vector<double> log_scales(std::size_t J, std::size_t N, double dt) {
    std::vector<double> s;
    for (std::size_t j = 0; j < J; ++j) s.push_back(static_cast<double>(N << (J - 1 - j)) * dt);
    return s;
}

void check_holder(const TimeGrid& grid, double t0, const HolderOptions& opt, std::size_t& i0, std::size_t& k0) {
    if (opt.scales < 8) throw std::invalid_argument("holder estimate needs at least 8 dyadic scales");
    if (opt.points_per_scale < 4 || opt.bins < 2) throw std::invalid_argument("holder estimate needs >= 4 points and >= 2 bins per scale");
    i0 = grid.index_of(t0);
    k0 = opt.points_per_scale << (opt.scales - 1);
    if (i0 + k0 >= grid.n)
        throw std::invalid_argument("grid holds fewer than the requested dyadic scales after t0");
}

// log oscillation per scale, empty when a scale has zero oscillation
std::vector<double> path_log_osc(const SamplePath& p, std::size_t i0, const HolderOptions& opt) {
    const std::size_t J = opt.scales, N = opt.points_per_scale;
    const std::size_t k0 = N << (J - 1);
    const bool two_sided = i0 >= k0;
    const double b0 = p.values[i0];
    std::vector<double> out;
    for (std::size_t j = 0; j < J; ++j) {
        const std::size_t stride = std::size_t{1} << (J - 1 - j);
        double osc = 0.0;
        for (std::size_t i = 1; i <= N; ++i) {
            osc = std::max(osc, std::abs(p.values[i0 + i * stride] - b0));
            if (two_sided) osc = std::max(osc, std::abs(p.values[i0 - i * stride] - b0));
        }
        if (!(osc > 0.0)) return {};
        out.push_back(std::log(osc));
    }
    return out;
}

std::vector<double> local_time_log_osc(const SamplePath& p, std::size_t i0, const HolderOptions& opt) {
    const std::size_t J = opt.scales, N = opt.points_per_scale;
    std::vector<double> out;
    for (std::size_t j = 0; j < J; ++j) {
        const std::size_t stride = std::size_t{1} << (J - 1 - j);
        SamplePath w;
        w.grid = TimeGrid{p.grid.at(i0), p.grid.dt * static_cast<double>(stride), N + 1};
        w.values.resize(N + 1);
        for (std::size_t i = 0; i <= N; ++i) w.values[i] = p.values[i0 + i * stride];
        auto [lo, hi] = std::minmax_element(w.values.begin(), w.values.end());
        const double range = *hi - *lo;
        if (!(range > 0.0)) return {};
        auto x = localtime::XGrid::covering(*lo, *hi, range / static_cast<double>(opt.bins), w.values[0]);
        auto f = localtime::local_time_field(w, x, {true, N});
        auto last = f.row(f.rows() - 1);
        out.push_back(std::log(*std::max_element(last.begin(), last.end())));
    }
    return out;
}

HolderEstimate regress(const std::vector<std::vector<double>>& per_replica, std::vector<double> scales,
                       std::size_t degenerate, double level) {
    HolderEstimate e;
    e.scales = std::move(scales);
    e.replicas = per_replica.size();
    e.degenerate = degenerate;
    if (per_replica.empty()) {
        e.flagged = true;
        return e;
    }
    std::vector<double> lx;
    for (double s : e.scales) lx.push_back(std::log(s));
    e.mean_log_osc.assign(e.scales.size(), 0.0);
    std::vector<double> slopes;
    for (const auto& r : per_replica) {
        for (std::size_t j = 0; j < r.size(); ++j) e.mean_log_osc[j] += r[j] / static_cast<double>(per_replica.size());
        slopes.push_back(numerics::linear_fit(lx, r).slope);
    }
    auto fit = numerics::linear_fit(lx, e.mean_log_osc);
    e.alpha_hat = fit.slope;
    e.r_squared = fit.r_squared;
    const double half = per_replica.size() > 1
                            ? z_of(level) * std::sqrt(numerics::variance(slopes) / static_cast<double>(slopes.size()))
                            : z_of(level) * fit.slope_se;
    e.ci_lo = e.alpha_hat - half;
    e.ci_hi = e.alpha_hat + half;
    e.flagged = degenerate > 0 && per_replica.size() == 1;
    return e;
}

}  // namespace

void ModulusCurve::validate() const {
    if (deltas.size() != values.size()) throw std::invalid_argument("modulus curve needs one value per delta");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) throw std::invalid_argument("modulus deltas must be positive");
        if (i > 0 && !(deltas[i] < deltas[i - 1])) throw std::invalid_argument("modulus deltas must be strictly decreasing");
        if (!(values[i] >= 0.0)) throw std::invalid_argument("modulus values must be nonnegative");
    }
}

std::vector<double> delta_ladder(double hi, double lo, double ratio) {
    if (!(hi > 0.0 && lo > 0.0 && lo <= hi)) throw std::invalid_argument("ladder needs 0 < lo <= hi");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ladder ratio must lie in (0, 1)");
    std::vector<double> d;
    for (std::size_t k = 0;; ++k) {
        double v = hi * std::pow(ratio, static_cast<double>(k));
        if (v < lo * (1.0 - 1e-12)) break;
        d.push_back(v);
    }
    return d;
}

std::vector<double> default_ladder(const TimeGrid& grid) {
    return delta_ladder(0.1, std::max(1e-4, 10.0 * grid.dt));
}

Envelope envelope(std::span<const ModulusCurve> curves) {
    if (curves.empty()) throw std::invalid_argument("envelope needs at least one curve");
    Envelope e;
    e.max.deltas = e.q99.deltas = curves.front().deltas;
    e.max.normalizer = e.q99.normalizer = curves.front().normalizer;
    for (std::size_t i = 0; i < e.max.deltas.size(); ++i) {
        std::vector<double> column;
        for (const auto& c : curves) {
            if (c.deltas.size() != e.max.deltas.size()) throw std::invalid_argument("curves must share deltas");
            column.push_back(c.values[i]);
        }
        e.max.values.push_back(*std::max_element(column.begin(), column.end()));
        e.q99.values.push_back(numerics::quantile(std::move(column), 0.99));
    }
    return e;
}

double growth_exponent(const ModulusCurve& curve) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < curve.deltas.size(); ++i)
        if (curve.values[i] > 0.0) {
            lx.push_back(std::log(curve.deltas[i]));
            ly.push_back(std::log(curve.values[i]));
        }
    if (lx.size() < 2) return 0.0;
    return -numerics::linear_fit(lx, ly).slope;
}

bool is_bounded(const ModulusCurve& curve, double tol) {
    for (double v : curve.values)
        if (!std::isfinite(v)) return false;
    return growth_exponent(curve) <= tol;
}

ModulusCurve local_modulus_curve(const SamplePath& path, const localtime::XGrid& x, const hurst::HurstFunction& h,
                                 double t, std::span<const double> deltas, const LocalModulusOptions& opt) {
    const std::size_t it = path.grid.index_of(t);
    auto lags = snap_lags(path.grid.dt, deltas, path.grid.n - 1 - it);
    const double level = opt.anchor == localtime::Anchor::path_point ? path.values[it] : opt.x_level;
    const double H = h(t);
    ModulusCurve c;
    c.normalizer = "d^(1-H(t)" + std::string(opt.exponent_offset != 0.0 ? "+offset" : "") + ") (log log 1/d)^H(t)";
    auto bin = x.bin_of(level);
    std::vector<double> series;
    if (bin) series = localtime::bin_series(path, x, *bin);
    for (std::size_t k : lags) {
        const double d = static_cast<double>(k) * path.grid.dt;
        const double inc = bin ? series[it + k] - series[it] : 0.0;
        c.deltas.push_back(d);
        c.values.push_back(inc / (std::pow(d, 1.0 - H + opt.exponent_offset) * std::pow(loglog(d), H)));
    }
    return c;
}

LocalModulus local_modulus_statistic(std::span<const localtime::LocalTimeField> fields,
                                     std::span<const SamplePath> paths, const hurst::HurstFunction& h, double t,
                                     std::span<const double> deltas, const LocalModulusOptions& opt) {
    if (fields.empty() || fields.size() != paths.size()) throw std::invalid_argument("need one field per path");
    const double H = h(t);
    LocalModulus out;
    for (std::size_t r = 0; r < fields.size(); ++r) {
        const auto& f = fields[r];
        const std::size_t kt = f.grid.index_of(t);
        auto lags = snap_lags(f.grid.dt, deltas, f.rows() - 1 - kt);
        const double level = opt.anchor == localtime::Anchor::path_point
                                 ? paths[r].values[paths[r].grid.index_of(t)]
                                 : opt.x_level;
        auto bin = f.x.bin_of(level);
        ModulusCurve c;
        c.normalizer = "d^(1-H(t)) (log log 1/d)^H(t)";
        for (std::size_t k : lags) {
            const double d = static_cast<double>(k) * f.grid.dt;
            const double inc = bin ? f.at(kt + k, *bin) - f.at(kt, *bin) : 0.0;
            c.deltas.push_back(d);
            c.values.push_back(inc / (std::pow(d, 1.0 - H + opt.exponent_offset) * std::pow(loglog(d), H)));
        }
        out.replicas.push_back(std::move(c));
    }
    out.env = envelope(out.replicas);
    return out;
}

ModulusCurve uniform_modulus_statistic(const SamplePath& path, const localtime::XGrid& x, double x_level,
                                       const hurst::HurstFunction& h, std::span<const double> deltas,
                                       const UniformModulusOptions& opt) {
    auto bin = x.bin_of(x_level);
    if (!bin) throw std::out_of_range("level outside the space grid");
    auto lags = snap_lags(path.grid.dt, deltas, path.grid.n - 1);
    const double Hs = h.sup_inf(path.grid.t0, path.grid.end()).sup + opt.hurst_shift;
    auto s = localtime::bin_series(path, x, *bin);
    ModulusCurve c;
    c.normalizer = "d^(1-Hsup) (log 1/d)^Hsup";
    for (std::size_t k : lags) {
        const double d = static_cast<double>(k) * path.grid.dt;
        if (!(d < 1.0)) throw std::invalid_argument("uniform modulus needs delta < 1");
        double sup = 0.0;
        for (std::size_t i = 0; i + k < s.size(); ++i) sup = std::max(sup, s[i + k] - s[i]);
        c.deltas.push_back(d);
        c.values.push_back(sup / (std::pow(d, 1.0 - Hs + opt.exponent_offset) * std::pow(std::log(1.0 / d), Hs)));
    }
    return c;
}

namespace {

std::vector<double> running_abs_max(const SamplePath& path, std::size_t i0, std::size_t kmax) {
    std::vector<double> m(kmax + 1, 0.0);
    for (std::size_t k = 1; k <= kmax; ++k) m[k] = std::max(m[k - 1], std::abs(path.values[i0 + k] - path.values[i0]));
    return m;
}

}  // namespace

ModulusCurve chung_statistic(const SamplePath& path, const hurst::HurstFunction& h, double t0,
                             std::span<const double> deltas, double exponent_offset) {
    const std::size_t i0 = path.grid.index_of(t0);
    auto lags = snap_lags(path.grid.dt, deltas, path.grid.n - 1 - i0);
    auto m = running_abs_max(path, i0, lags.front());
    const double H = h(t0) + exponent_offset;
    ModulusCurve c;
    c.normalizer = "(d / log|log d|)^H(t0)";
    double run = std::numeric_limits<double>::infinity();
    for (std::size_t k : lags) {
        const double d = static_cast<double>(k) * path.grid.dt;
        const double v = m[k] / std::pow(d / loglog(d), H);
        run = std::min(run, v);
        c.deltas.push_back(d);
        c.values.push_back(v);
        c.running.push_back(run);
    }
    return c;
}

ModulusCurve lil_statistic(const SamplePath& path, const hurst::HurstFunction& h, double t0,
                           std::span<const double> deltas, double exponent_offset) {
    const std::size_t i0 = path.grid.index_of(t0);
    auto lags = snap_lags(path.grid.dt, deltas, path.grid.n - 1 - i0);
    auto m = running_abs_max(path, i0, lags.front());
    const double H = h(t0) + exponent_offset;
    ModulusCurve c;
    c.normalizer = "d^H(t0) (log|log d|)^(1/2)";
    double run = 0.0;
    for (std::size_t k : lags) {
        const double d = static_cast<double>(k) * path.grid.dt;
        const double v = m[k] / (std::pow(d, H) * std::sqrt(loglog(d)));
        run = std::max(run, v);
        c.deltas.push_back(d);
        c.values.push_back(v);
        c.running.push_back(run);
    }
    return c;
}

double moving_average_past_integral(double hurst, double rel_tol) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("H must lie in (0, 1)");
    const double a = hurst - 0.5;
    if (a == 0.0) return 0.0;
    auto f = [a](double u) {
        const double g = std::pow(u, a) * std::expm1(a * std::log1p(1.0 / u));
        return g * g;
    };
    return numerics::integrate(f, 0.0, 1.0, rel_tol).value + numerics::integrate_upper(f, 1.0, rel_tol).value;
}

double v_constant(double hurst, Representation rep, VGrouping grouping, double rel_tol) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("H must lie in (0, 1)");
    switch (rep) {
        case Representation::harmonizable:
            return std::sqrt(std::numbers::pi / (hurst * std::tgamma(2.0 * hurst) * std::sin(std::numbers::pi * hurst)));
        case Representation::moving_average: {
            const double I = moving_average_past_integral(hurst, rel_tol);
            const double g = std::tgamma(hurst + 0.5);
            if (grouping == VGrouping::printed) return (std::sqrt(I) + 1.0 / (2.0 * hurst)) / g;
            return std::sqrt(I + 1.0 / (2.0 * hurst)) / g;
        }
        default:
            throw std::invalid_argument("v_constant is defined for the harmonizable and moving-average fields");
    }
}

HolderEstimate holder_exponent_estimate(const SamplePath& path, double t0, const HolderOptions& opt) {
    std::size_t i0, k0;
    check_holder(path.grid, t0, opt, i0, k0);
    auto r = path_log_osc(path, i0, opt);
    std::vector<std::vector<double>> per;
    if (!r.empty()) per.push_back(std::move(r));
    auto e = regress(per, log_scales(opt.scales, opt.points_per_scale, path.grid.dt), per.empty() ? 1 : 0, opt.level);
    e.flagged = per.empty();
    return e;
}

HolderEstimate holder_exponent_estimate(std::span<const SamplePath> paths, double t0, const HolderOptions& opt) {
    if (paths.empty()) throw std::invalid_argument("holder estimate needs at least one path");
    std::vector<std::vector<double>> per;
    std::size_t degenerate = 0;
    for (const auto& p : paths) {
        std::size_t i0, k0;
        check_holder(p.grid, t0, opt, i0, k0);
        auto r = path_log_osc(p, i0, opt);
        if (r.empty()) ++degenerate;
        else per.push_back(std::move(r));
    }
    return regress(per, log_scales(opt.scales, opt.points_per_scale, paths.front().grid.dt), degenerate, opt.level);
}

HolderEstimate local_time_holder_estimate(std::span<const SamplePath> paths, double t0, const HolderOptions& opt) {
    if (paths.empty()) throw std::invalid_argument("holder estimate needs at least one path");
    std::vector<std::vector<double>> per;
    std::size_t degenerate = 0;
    for (const auto& p : paths) {
        std::size_t i0, k0;
        check_holder(p.grid, t0, opt, i0, k0);
        auto r = local_time_log_osc(p, i0, opt);
        if (r.empty()) ++degenerate;
        else per.push_back(std::move(r));
    }
    auto e = regress(per, log_scales(opt.scales, opt.points_per_scale, paths.front().grid.dt), degenerate, opt.level);
    if (paths.size() == 1) e.flagged = per.empty();
    return e;
}

RangeReport range_inequality_check(const SamplePath& path, const localtime::LocalTimeField& field, double t0,
                                   double delta) {
    const std::size_t k0 = field.grid.index_of(t0), k1 = field.grid.index_of(t0 + delta);
    const std::size_t i0 = path.grid.index_of(t0), i1 = path.grid.index_of(t0 + delta);
    double sup_l = 0.0;
    for (std::size_t j = 0; j < field.x.m; ++j) sup_l = std::max(sup_l, field.at(k1, j) - field.at(k0, j));
    double osc = 0.0;
    for (std::size_t i = i0; i <= i1; ++i) osc = std::max(osc, std::abs(path.values[i] - path.values[i0]));
    RangeReport r;
    r.lhs = field.grid.at(k1) - field.grid.at(k0);
    r.rhs = 2.0 * sup_l * osc;
    r.slack = osc > 0.0 ? 1.0 + field.x.dx / osc : std::numeric_limits<double>::infinity();
    r.holds = osc > 0.0 ? r.lhs <= r.rhs * r.slack * (1.0 + 1e-12) : r.lhs <= 2.0 * sup_l * field.x.dx * (1.0 + 1e-12);
    return r;
}

ModulusCurve space_modulus_statistic(const localtime::LocalTimeField& field, double t1, double t2,
                                     std::span<const std::size_t> spacings, double alpha,
                                     const hurst::HurstFunction& h) {
    const std::size_t k1 = field.grid.index_of(t1), k2 = field.grid.index_of(t2);
    if (k2 <= k1) throw std::invalid_argument("interval must have positive length");
    std::vector<std::size_t> ks(spacings.begin(), spacings.end());
    std::sort(ks.rbegin(), ks.rend());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    if (ks.empty() || ks.back() == 0) throw std::invalid_argument("spacings must be positive");
    if (ks.front() >= field.x.m) throw std::invalid_argument("spacing exceeds the space grid");
    ModulusCurve c;
    c.normalizer = "|x-y|^alpha";
    const double Hs = h.sup_inf(t1, t2).sup;
    const double admissible = std::min(1.0 / (2.0 * Hs) - 0.5, 1.0);
    if (!(alpha < admissible))
        c.warnings.push_back("alpha " + std::to_string(alpha) + " is not below the admissible bound " + std::to_string(admissible));
    std::vector<double> inc(field.x.m);
    for (std::size_t j = 0; j < field.x.m; ++j) inc[j] = field.at(k2, j) - field.at(k1, j);
    for (std::size_t k : ks) {
        double sup = 0.0;
        for (std::size_t j = 0; j + k < inc.size(); ++j) sup = std::max(sup, std::abs(inc[j + k] - inc[j]));
        const double d = static_cast<double>(k) * field.x.dx;
        c.deltas.push_back(d);
        c.values.push_back(sup / std::pow(d, alpha));
    }
    return c;
}

}  // namespace mbm::regularity
