#include "statistics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "mbm/lass.hpp"
#include "mbm/localtime.hpp"
#include "mbm/numerics.hpp"
#include "mbm/random.hpp"
#include "mbm/regularity.hpp"
#include "mbm/stats.hpp"
#include "mbm/synth.hpp"

namespace mbm::harness::detail {

namespace lt = mbm::localtime;
namespace reg = mbm::regularity;

std::span<const SamplePath> RunContext::paths() {
    if (!ensemble_error_.empty()) throw EnsembleError(ensemble_error_);
    if (!ensemble_) {
        try {
            ensemble_ = mc_ensemble(cfg_);
        } catch (const std::exception& e) {
            ensemble_error_ = e.what();
            throw;
        }
    }
    return ensemble_->ensemble.paths;
}

lt::LocalTimeField RunContext::field(std::size_t replica) { return field_for(paths()[replica], cfg_); }

namespace {

constexpr double ladder_ratio = 0.8408964152537145;

Status verdict(bool ok) { return ok ? Status::pass : Status::fail; }

double mean_hurst(const ExperimentConfig& cfg) { return 0.5 * (cfg.hurst.mu() + cfg.hurst.nu()); }

bool on_grid(const TimeGrid& g, double t) {
    try {
        g.index_of(t);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

double read_time(Fields& f, const std::string& key, double def, const TimeGrid& g) {
    const double t = f.real(key, def);
    f.require(t >= g.t0 && t <= g.end() + 1e-9 * g.dt, key, "must lie on the simulation grid");
    if (t >= g.t0 && t <= g.end()) f.require(on_grid(g, t), key, "must be a grid time");
    return t;
}

std::vector<double> read_ladder(Fields& f, const TimeGrid& g, double t0) {
    const double room = g.end() - t0;
    const double hi = f.real("delta_hi", std::min(0.1, room));
    const double lo = f.real("delta_lo", std::max(1e-4, 10.0 * g.dt));
    bool ok = true;
    auto need = [&](bool c, const char* key, const char* msg) {
        if (!c) {
            f.fail(key, msg);
            ok = false;
        }
    };
    need(hi <= room * (1 + 1e-9), "delta_hi", "window beyond t0 is shorter than delta_hi");
    need(hi < 1.0 / std::numbers::e, "delta_hi", "log log 1/delta needs delta < 1/e");
    need(lo >= 3.0 * g.dt, "delta_lo", "must be at least 3 grid steps");
    need(hi > lo, "delta_lo", "must be smaller than delta_hi");
    if (!ok) return {};
    return reg::delta_ladder(hi, lo, ladder_ratio);
}

std::optional<lt::Anchor> read_anchor(Fields& f) {
    const std::string a = f.text("anchor", "fixed-x");
    if (a == "fixed-x") return lt::Anchor::fixed_x;
    if (a == "path-point") return lt::Anchor::path_point;
    f.fail("anchor", "expected fixed-x or path-point");
    return std::nullopt;
}

std::optional<std::pair<double, double>> read_bracket(Fields& f, std::pair<double, double> def) {
    auto v = f.reals("bracket", {def.first, def.second});
    if (v.size() != 2 || !(v[0] < v[1])) {
        f.fail("bracket", "expected [lo, hi] with lo < hi");
        return std::nullopt;
    }
    return std::make_pair(v[0], v[1]);
}

std::optional<lass::TestFunction> read_test_function(Fields& parent) {
    Fields f = parent.object("f");
    std::optional<lass::TestFunction> out;
    const std::string shape = f.text("shape", "triangle");
    try {
        if (shape == "triangle") {
            const double c = f.real("center", 0.0), w = f.real("half_width", 0.05);
            out = lass::TestFunction::triangle(c, w, f.real("height", 1.0 / w));
        } else if (shape == "indicator") {
            const double lo = f.real("lo", -1.0), hi = f.real("hi", 1.0);
            out = lass::TestFunction::indicator(lo, hi, f.real("height", 1.0 / (hi - lo)));
        } else if (shape == "truncated-gaussian") {
            const double c = f.real("center", 0.0), s = f.real("sigma", 0.05);
            const double cut = f.real("cutoff", 4.0);
            out = lass::TestFunction::truncated_gaussian(c, s, cut, f.real("height", 1.0 / (s * std::sqrt(2 * std::numbers::pi))));
        } else {
            f.fail("shape", "expected indicator, triangle or truncated-gaussian");
        }
    } catch (const std::exception& e) {
        f.fail("shape", e.what());
        out.reset();
    }
    parent.adopt("f", f);
    return out;
}

lass::WindowOptions window_for(const ExperimentConfig& cfg, std::size_t grid_n) {
    lass::WindowOptions w;
    w.representation = cfg.representation;
    w.grid_n = grid_n;
    w.kernel = cfg.kernel;
    w.spectral = cfg.spectral;
    return w;
}

json curve_json(const reg::ModulusCurve& c) {
    return json{{"growth_exponent", reg::growth_exponent(c)}, {"smallest_delta", c.deltas.back()},
                {"value_at_smallest_delta", c.values.back()}};
}

Table envelope_table(const std::string& name, const reg::Envelope& env) {
    Table t{name, {"delta", "max", "q99"}, {}};
    for (std::size_t i = 0; i < env.max.deltas.size(); ++i)
        t.rows.push_back({env.max.deltas[i], env.max.values[i], env.q99.values[i]});
    return t;
}

// ---- occupation-identity ----
class OccupationIdentity : public Statistic {
    double tol_ = 1e-12;
    std::size_t indicators_ = 8;

public:
    void read(Fields& f, const ParseContext&) override {
        tol_ = f.real("tolerance", 1e-12);
        f.require(tol_ > 0, "tolerance", "must be positive");
        const auto k = f.integer("indicators", 8);
        f.require(k >= 1, "indicators", "must be at least 1");
        indicators_ = static_cast<std::size_t>(std::max<std::int64_t>(k, 1));
    }

    Outcome run(RunContext& rc) override {
        auto paths = rc.paths();
        Outcome o;
        Table t{"replicas", {"replica", "comparisons", "max_rel_error"}, {}};
        double worst = 0.0;
        std::size_t total = 0;
        for (std::size_t r = 0; r < paths.size(); ++r) {
            const auto field = rc.field(r);
            const std::size_t last = field.rows() - 1;
            const double T = field.grid.at(last);
            const std::size_t m = field.x.m;
            const std::size_t K = std::min(indicators_, m);
            double rep_worst = 0.0;
            std::size_t count = 0;
            auto compare = [&](std::size_t j0, std::size_t j1) {
                double space = 0.0;
                for (std::size_t j = j0; j < j1; ++j) space += field.at(last, j) * field.x.dx;
                const double time = lt::occupation_integral(
                    paths[r], lt::StepFunction::indicator(field.x.edge(j0), field.x.edge(j1)), T);
                const double err = std::abs(space - time);
                const double rel = err == 0.0 ? 0.0 : err / std::max(std::abs(time), 1e-300);
                rep_worst = std::max(rep_worst, rel);
                ++count;
            };
            for (std::size_t q = 0; q < K; ++q) compare(q * m / K, (q + 1) * m / K);
            compare(0, m);
            t.rows.push_back({static_cast<double>(r), static_cast<double>(count), rep_worst});
            worst = std::max(worst, rep_worst);
            total += count;
        }
        o.estimates = {{"max_rel_error", worst}, {"comparisons", total}, {"tolerance", tol_}};
        o.status = verdict(worst <= tol_);
        o.tables.push_back(std::move(t));
        return o;
    }
};

// ---- variance ----
class Variance : public Statistic {
    std::vector<double> times_;
    double tol_se_ = 3.0;
    bool fit_scale_ = false;

public:
    void read(Fields& f, const ParseContext& pc) override {
        const auto& g = pc.cfg.grid;
        std::vector<double> def;
        for (std::size_t k = 1; k <= 5; ++k) def.push_back(g.at((k * (g.n - 1)) / 5));
        times_ = f.reals("times", def);
        f.require(!times_.empty(), "times", "needs at least one time");
        for (double t : times_) {
            if (!(t > g.t0 && t <= g.end() + 1e-9 * g.dt && on_grid(g, t))) {
                f.fail("times", "every time must be a grid time after the grid start");
                break;
            }
        }
        tol_se_ = f.real("tolerance_se", 3.0);
        f.require(tol_se_ > 0, "tolerance_se", "must be positive");
        fit_scale_ = f.flag("fit_scale", pc.cfg.representation == Representation::harmonizable);
        f.require(pc.cfg.replicas >= 2, "times", "needs at least 2 replicas");
    }

    Outcome run(RunContext& rc) override {
        const auto& cfg = rc.config();
        auto paths = rc.paths();
        const double s = cfg.representation == Representation::fbm_exact ? cfg.grid.t0 : 0.0;
        std::vector<double> emp, se, expected;
        for (double t : times_) {
            const std::size_t k = cfg.grid.index_of(t);
            std::vector<double> sq;
            sq.reserve(paths.size());
            for (const auto& p : paths) sq.push_back(p.values[k] * p.values[k]);
            emp.push_back(numerics::mean(sq));
            se.push_back(numerics::std_error(sq));
            expected.push_back(synth::increment_variance_exact(cfg.hurst, s, t, cfg.kernel, cfg.representation));
        }
        double scale = 1.0;
        if (fit_scale_) {
            double num = 0, den = 0;
            for (std::size_t i = 0; i < emp.size(); ++i) {
                num += emp[i] * expected[i];
                den += expected[i] * expected[i];
            }
            scale = num / den;
        }
        Outcome o;
        Table tb{"variance", {"t", "empirical", "std_error", "expected", "fitted_expected", "z"}, {}};
        double max_z = 0.0;
        for (std::size_t i = 0; i < emp.size(); ++i) {
            const double z = (emp[i] - scale * expected[i]) / se[i];
            max_z = std::max(max_z, std::abs(z));
            tb.rows.push_back({times_[i], emp[i], se[i], expected[i], scale * expected[i], z});
        }
        o.estimates = {{"fitted_scale", scale}, {"max_abs_z", max_z}, {"tolerance_se", tol_se_},
                       {"replicas", paths.size()}};
        o.status = verdict(max_z <= tol_se_);
        o.tables.push_back(std::move(tb));
        return o;
    }
};

// ---- variance-bounds ----
class VarianceBounds : public Statistic {
    double a_ = 0, b_ = 1;
    std::size_t pairs_ = 50, tuples_ = 50;

public:
    void read(Fields& f, const ParseContext& pc) override {
        auto iv = f.reals("interval", {std::max(pc.cfg.grid.t0, 0.0), pc.cfg.grid.end()});
        if (iv.size() != 2 || !(iv[0] >= 0.0 && iv[1] > iv[0])) {
            f.fail("interval", "expected [a, b] with 0 <= a < b");
        } else {
            a_ = iv[0];
            b_ = iv[1];
            f.require(b_ <= pc.cfg.hurst.horizon(), "interval", "exceeds hurst.horizon");
        }
        const auto p = f.integer("pairs", 50), t = f.integer("tuples", 50);
        f.require(p >= 1, "pairs", "must be at least 1");
        f.require(t >= 0, "tuples", "must be nonnegative");
        pairs_ = static_cast<std::size_t>(std::max<std::int64_t>(p, 1));
        tuples_ = static_cast<std::size_t>(std::max<std::int64_t>(t, 0));
    }

    Outcome run(RunContext& rc) override {
        const auto& cfg = rc.config();
        auto r = synth::verify_variance_bounds(cfg.hurst, a_, b_, pairs_, cfg.kernel, rc.seed(), cfg.representation,
                                               tuples_);
        Outcome o;
        Table tb{"pairs", {"s", "t", "variance", "lower_bound", "upper_ratio"}, {}};
        for (const auto& p : r.pairs) tb.rows.push_back({p.s, p.t, p.variance, p.lower_bound, p.upper_ratio});
        Table td{"determinants", {"m", "determinant", "bound"}, {}};
        for (const auto& d : r.tuples)
            td.rows.push_back({static_cast<double>(d.points.size() - 1), d.determinant, d.bound});
        o.estimates = {{"lower_violations", r.lower_violations},
                       {"min_lower_margin", r.min_lower_margin},
                       {"determinant_violations", r.determinant_violations},
                       {"min_determinant_margin", r.min_determinant_margin},
                       {"fitted_upper_constant", r.fitted_upper_constant},
                       {"upper_stable", r.upper_stable}};
        o.status = verdict(r.ok());
        o.tables.push_back(std::move(tb));
        o.tables.push_back(std::move(td));
        return o;
    }
};

// ---- local-time-moment ----
class LocalTimeMoment : public Statistic {
    std::vector<int> orders_;
    double t_ = 0, h_ = 0.5, x_ = 0, tol_se_ = 3, max_spread_ = 1.25;
    lt::Anchor anchor_ = lt::Anchor::fixed_x;
    std::string reference_;

public:
    void read(Fields& f, const ParseContext& pc) override {
        const auto& cfg = pc.cfg;
        orders_ = f.ints("orders", {1, 2, 3});
        bool orders_ok = !orders_.empty();
        for (int m : orders_) orders_ok = orders_ok && m >= 1;
        f.require(orders_ok, "orders", "expected positive integer orders");
        t_ = read_time(f, "t", cfg.grid.t0, cfg.grid);
        h_ = f.real("h", std::min(0.5, cfg.grid.end() - t_));
        f.require(h_ > 0 && t_ + h_ <= cfg.grid.end() + 1e-9 * cfg.grid.dt, "h", "t + h must stay on the grid");
        anchor_ = read_anchor(f).value_or(lt::Anchor::fixed_x);
        x_ = f.real("x", 0.0);
        const bool bm = pc.hurst_valid && cfg.hurst.is_constant() && cfg.hurst(0.0) == 0.5;
        reference_ = f.text("reference", bm ? "levy" : "fit");
        f.require(reference_ == "levy" || reference_ == "fit", "reference", "expected levy or fit");
        if (reference_ == "levy") {
            f.require(bm, "reference", "the Levy identity needs H = 0.5");
            f.require(cfg.representation != Representation::harmonizable, "reference",
                      "the Levy identity needs a unit-scale Brownian motion");
            f.require(anchor_ == lt::Anchor::path_point || (x_ == 0.0 && t_ == 0.0), "anchor",
                      "the Levy identity needs the level B(t), or x = 0 at t = 0");
        } else {
            f.require(orders_.size() >= 2, "orders", "a fitted constant needs at least two orders");
        }
        tol_se_ = f.real("tolerance_se", 3.0);
        max_spread_ = f.real("max_spread", 1.25);
        f.require(cfg.replicas >= 100, "orders", "moment estimates need at least 100 replicas");
    }

    Outcome run(RunContext& rc) override {
        const auto& cfg = rc.config();
        auto paths = rc.paths();
        std::vector<double> inc;
        inc.reserve(paths.size());
        for (std::size_t r = 0; r < paths.size(); ++r) {
            const auto field = rc.field(r);
            inc.push_back(lt::local_time_increments(std::span(&field, 1), paths.subspan(r, 1), t_, h_, anchor_, x_)[0]);
        }
        Outcome o;
        if (reference_ == "levy") {
            Table tb{"moments", {"order", "estimate", "std_error", "expected", "z"}, {}};
            double max_z = 0;
            for (int m : orders_) {
                auto e = lt::moment_of(inc, m);
                const double ex = std::pow(h_, 0.5 * m) * numerics::abs_normal_moment(m);
                const double z = (e.value - ex) / e.std_error;
                max_z = std::max(max_z, std::abs(z));
                tb.rows.push_back({static_cast<double>(m), e.value, e.std_error, ex, z});
            }
            o.estimates = {{"max_abs_z", max_z}, {"tolerance_se", tol_se_}, {"replicas", inc.size()}};
            o.status = verdict(max_z <= tol_se_);
            o.tables.push_back(std::move(tb));
        } else {
            const double hsup = cfg.hurst.sup_inf(t_, t_ + h_).sup;
            const double scale = std::pow(h_, 1.0 - hsup);
            for (double& v : inc) v /= scale;
            std::vector<double> moments, ses;
            for (int m : orders_) {
                auto e = lt::moment_of(inc, m);
                moments.push_back(e.value);
                ses.push_back(e.std_error);
            }
            auto fit = lt::fit_moment_constant(orders_, moments, hsup);
            Table tb{"moments", {"order", "normalized_moment", "std_error", "constant"}, {}};
            for (std::size_t i = 0; i < orders_.size(); ++i)
                tb.rows.push_back({static_cast<double>(orders_[i]), moments[i], ses[i], fit.per_order[i]});
            o.estimates = {{"c_hat", fit.c_hat}, {"spread", fit.spread}, {"max_spread", max_spread_}};
            o.status = verdict(fit.spread <= max_spread_);
            o.tables.push_back(std::move(tb));
        }
        return o;
    }
};

// ---- holder ----
class Holder : public Statistic {
    double t0_ = 0, expected_ = 0.5, tol_ = 0.05;
    bool local_time_ = false;
    reg::HolderOptions opt_;

public:
    void read(Fields& f, const ParseContext& pc) override {
        const auto& g = pc.cfg.grid;
        t0_ = read_time(f, "t0", g.at((g.n - 1) / 2), g);
        const std::string target = f.text("target", "path");
        f.require(target == "path" || target == "local-time", "target", "expected path or local-time");
        local_time_ = target == "local-time";
        const double H = pc.hurst_valid ? pc.cfg.hurst(std::max(t0_, 0.0)) : 0.5;
        expected_ = f.real("expected", local_time_ ? 1.0 - H : H);
        tol_ = f.real("tolerance", local_time_ ? 0.07 : 0.05);
        f.require(tol_ > 0, "tolerance", "must be positive");
        const auto sc = f.integer("scales", 8);
        f.require(sc >= 8, "scales", "must be at least 8");
        opt_.scales = static_cast<std::size_t>(std::max<std::int64_t>(sc, 8));
        const std::size_t i0 = on_grid(g, t0_) ? g.index_of(t0_) : 0;
        const std::size_t room = g.n - 1 - std::min(i0, g.n - 1);
        const auto fit = static_cast<std::int64_t>(room >> (opt_.scales - 1));
        const auto pts = f.integer("points_per_scale", std::clamp<std::int64_t>(fit, 4, 256));
        f.require(pts >= 4, "points_per_scale", "must be at least 4");
        opt_.points_per_scale = static_cast<std::size_t>(std::max<std::int64_t>(pts, 4));
        f.require(pts <= fit, "points_per_scale",
                  "points_per_scale * 2^(scales-1) must stay inside the grid after t0");
        const auto b = f.integer("bins", 32);
        f.require(b >= 2, "bins", "must be at least 2");
        opt_.bins = static_cast<std::size_t>(std::max<std::int64_t>(b, 2));
        opt_.level = f.real("level", 0.95);
        f.require(opt_.level > 0 && opt_.level < 1, "level", "must lie in (0, 1)");
    }

    Outcome run(RunContext& rc) override {
        auto paths = rc.paths();
        auto e = local_time_ ? reg::local_time_holder_estimate(paths, t0_, opt_)
                             : reg::holder_exponent_estimate(paths, t0_, opt_);
        Outcome o;
        Table tb{"scales", {"scale", "mean_log_osc"}, {}};
        for (std::size_t i = 0; i < e.scales.size(); ++i) tb.rows.push_back({e.scales[i], e.mean_log_osc[i]});
        o.estimates = {{"alpha_hat", e.alpha_hat}, {"ci_lo", e.ci_lo},       {"ci_hi", e.ci_hi},
                       {"expected", expected_},    {"tolerance", tol_},      {"r_squared", e.r_squared},
                       {"replicas", e.replicas},   {"degenerate", e.degenerate}, {"flagged", e.flagged}};
        o.status = verdict(!e.flagged && std::abs(e.alpha_hat - expected_) <= tol_);
        o.tables.push_back(std::move(tb));
        return o;
    }
};

// ---- chung and lil ----
class RunningExtremum : public Statistic {
    bool chung_;
    double t0_ = 0, offset_ = 0;
    std::vector<double> deltas_;
    std::pair<double, double> bracket_;

public:
    explicit RunningExtremum(bool chung) : chung_(chung) {}

    void read(Fields& f, const ParseContext& pc) override {
        t0_ = read_time(f, "t0", pc.cfg.grid.t0, pc.cfg.grid);
        deltas_ = read_ladder(f, pc.cfg.grid, t0_);
        offset_ = f.real("exponent_offset", 0.0);
        bracket_ = read_bracket(f, chung_ ? std::make_pair(0.85, 1.45) : std::make_pair(1.0, 1.9))
                       .value_or(std::make_pair(0.0, 0.0));
    }

    Outcome run(RunContext& rc) override {
        const auto& cfg = rc.config();
        auto paths = rc.paths();
        std::vector<reg::ModulusCurve> curves;
        std::vector<double> finals;
        for (const auto& p : paths) {
            curves.push_back(chung_ ? reg::chung_statistic(p, cfg.hurst, t0_, deltas_, offset_)
                                    : reg::lil_statistic(p, cfg.hurst, t0_, deltas_, offset_));
            finals.push_back(curves.back().running.back());
        }
        Table tb{"curve", {"delta", "median_value", "median_running"}, {}};
        for (std::size_t i = 0; i < curves.front().deltas.size(); ++i) {
            std::vector<double> v, r;
            for (const auto& c : curves) {
                v.push_back(c.values[i]);
                r.push_back(c.running[i]);
            }
            tb.rows.push_back({curves.front().deltas[i], numerics::median(v), numerics::median(r)});
        }
        auto ci = stats::bootstrap_median(finals, 500, 0.95, rc.seed());
        Outcome o;
        o.estimates = {{"median", ci.median},
                       {"ci_lo", ci.lo},
                       {"ci_hi", ci.hi},
                       {"bracket", {bracket_.first, bracket_.second}},
                       {"smallest_delta", curves.front().deltas.back()},
                       {"replicas", finals.size()}};
        o.status = verdict(ci.median >= bracket_.first && ci.median <= bracket_.second);
        o.tables.push_back(std::move(tb));
        return o;
    }
};

// ---- local-modulus ----
class LocalModulusStat : public Statistic {
    double t_ = 0, growth_tol_ = 0.03;
    reg::LocalModulusOptions opt_;
    std::vector<double> deltas_;

public:
    void read(Fields& f, const ParseContext& pc) override {
        t_ = read_time(f, "t", pc.cfg.grid.t0, pc.cfg.grid);
        opt_.anchor = read_anchor(f).value_or(lt::Anchor::fixed_x);
        opt_.x_level = f.real("x", 0.0);
        opt_.exponent_offset = f.real("exponent_offset", 0.0);
        deltas_ = read_ladder(f, pc.cfg.grid, t_);
        growth_tol_ = f.real("growth_tolerance", 0.03);
    }

    Outcome run(RunContext& rc) override {
        const auto& cfg = rc.config();
        auto paths = rc.paths();
        const std::size_t it = cfg.grid.index_of(t_);
        std::vector<reg::ModulusCurve> curves;
        for (const auto& p : paths) {
            const double level = opt_.anchor == lt::Anchor::path_point ? p.values[it] : opt_.x_level;
            auto x = lt::default_x_grid(p, mean_hurst(cfg), level, cfg.local_time.dx_scale);
            curves.push_back(reg::local_modulus_curve(p, x, cfg.hurst, t_, deltas_, opt_));
        }
        auto env = reg::envelope(curves);
        Outcome o;
        o.estimates = {{"envelope_max", curve_json(env.max)},
                       {"envelope_q99", curve_json(env.q99)},
                       {"growth_tolerance", growth_tol_}};
        o.status = verdict(reg::is_bounded(env.max, growth_tol_));
        o.tables.push_back(envelope_table("envelope", env));
        return o;
    }
};

// ---- uniform-modulus ----
class UniformModulusStat : public Statistic {
    double x_ = 0, growth_tol_ = 0.03;
    reg::UniformModulusOptions opt_;
    std::vector<double> deltas_;

public:
    void read(Fields& f, const ParseContext& pc) override {
        x_ = f.real("x", 0.0);
        opt_.exponent_offset = f.real("exponent_offset", 0.0);
        opt_.hurst_shift = f.real("hurst_shift", 0.0);
        deltas_ = read_ladder(f, pc.cfg.grid, pc.cfg.grid.t0);
        growth_tol_ = f.real("growth_tolerance", 0.03);
    }

    Outcome run(RunContext& rc) override {
        const auto& cfg = rc.config();
        auto paths = rc.paths();
        std::vector<reg::ModulusCurve> curves;
        for (const auto& p : paths) {
            auto x = lt::default_x_grid(p, mean_hurst(cfg), x_, cfg.local_time.dx_scale);
            curves.push_back(reg::uniform_modulus_statistic(p, x, x_, cfg.hurst, deltas_, opt_));
        }
        auto env = reg::envelope(curves);
        Outcome o;
        o.estimates = {{"envelope_max", curve_json(env.max)},
                       {"envelope_q99", curve_json(env.q99)},
                       {"growth_tolerance", growth_tol_}};
        o.status = verdict(reg::is_bounded(env.max, growth_tol_));
        o.tables.push_back(envelope_table("envelope", env));
        return o;
    }
};

// ---- range-inequality ----
class RangeInequality : public Statistic {
    double t0_ = 0;
    std::vector<double> deltas_;

public:
    void read(Fields& f, const ParseContext& pc) override {
        const auto& g = pc.cfg.grid;
        t0_ = read_time(f, "t0", g.t0, g);
        std::vector<double> def;
        for (double d : {0.01, 0.1}) def.push_back(g.dt * std::max(1.0, std::round(d / g.dt)));
        deltas_ = f.reals("deltas", def);
        bool ok = !deltas_.empty();
        for (double d : deltas_) {
            const double lag = std::round(d / g.dt);
            ok = ok && lag >= 1 && std::abs(d - lag * g.dt) <= 1e-6 * g.dt && t0_ + d <= g.end() + 1e-9 * g.dt;
        }
        f.require(ok, "deltas", "every delta must be a positive multiple of grid.dt keeping t0 + delta on the grid");
    }

    Outcome run(RunContext& rc) override {
        auto paths = rc.paths();
        Outcome o;
        std::vector<std::size_t> bad(deltas_.size(), 0);
        std::vector<double> worst(deltas_.size(), 0.0);
        for (std::size_t r = 0; r < paths.size(); ++r) {
            const auto field = rc.field(r);
            for (std::size_t i = 0; i < deltas_.size(); ++i) {
                auto rep = reg::range_inequality_check(paths[r], field, t0_, deltas_[i]);
                if (!rep.holds) ++bad[i];
                if (rep.rhs > 0) worst[i] = std::max(worst[i], rep.lhs / rep.rhs);
            }
        }
        Table tb{"deltas", {"delta", "violations", "max_lhs_over_rhs"}, {}};
        std::size_t total = 0;
        for (std::size_t i = 0; i < deltas_.size(); ++i) {
            tb.rows.push_back({deltas_[i], static_cast<double>(bad[i]), worst[i]});
            total += bad[i];
        }
        o.estimates = {{"violations", total}, {"replicas", paths.size()}};
        o.status = verdict(total == 0);
        o.tables.push_back(std::move(tb));
        return o;
    }
};

// ---- space-modulus ----
class SpaceModulus : public Statistic {
    double t1_ = 0, t2_ = 1, alpha_ = 0.4, growth_tol_ = 0.03;
    std::vector<std::size_t> spacings_;

public:
    void read(Fields& f, const ParseContext& pc) override {
        const auto& g = pc.cfg.grid;
        t1_ = read_time(f, "t1", g.t0, g);
        t2_ = read_time(f, "t2", g.end(), g);
        f.require(t2_ > t1_, "t2", "must exceed t1");
        alpha_ = f.real("alpha", 0.4);
        f.require(alpha_ > 0 && alpha_ < 1, "alpha", "must lie in (0, 1)");
        auto ks = f.ints("spacings", {1, 2, 4, 8, 16});
        bool ok = !ks.empty();
        spacings_.clear();
        for (int k : ks) {
            ok = ok && k >= 1;
            spacings_.push_back(static_cast<std::size_t>(std::max(k, 1)));
        }
        f.require(ok, "spacings", "expected positive bin spacings");
        growth_tol_ = f.real("growth_tolerance", 0.03);
    }

    Outcome run(RunContext& rc) override {
        const auto& cfg = rc.config();
        const std::size_t count = rc.paths().size();
        std::vector<reg::ModulusCurve> curves;
        std::vector<std::string> warnings;
        for (std::size_t r = 0; r < count; ++r) {
            curves.push_back(reg::space_modulus_statistic(rc.field(r), t1_, t2_, spacings_, alpha_, cfg.hurst));
            for (const auto& w : curves.back().warnings)
                if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
        }
        auto env = reg::envelope(curves);
        Outcome o;
        o.estimates = {{"envelope_max", curve_json(env.max)},
                       {"envelope_q99", curve_json(env.q99)},
                       {"alpha", alpha_},
                       {"growth_tolerance", growth_tol_}};
        o.notes = warnings;
        o.status = verdict(reg::is_bounded(env.max, growth_tol_));
        o.tables.push_back(envelope_table("envelope", env));
        return o;
    }
};

// ---- lass ----
class Lass : public Statistic {
    double t0_ = 0.5, x_ = 0;
    std::vector<double> rhos_, ts_;
    lass::LassOptions opt_;
    std::size_t grid_n_ = 512;

public:
    void read(Fields& f, const ParseContext& pc) override {
        const auto& cfg = pc.cfg;
        t0_ = f.real("t0", 0.5);
        f.require(t0_ >= 0 && t0_ < cfg.hurst.horizon(), "t0", "must lie in [0, hurst.horizon)");
        x_ = f.real("x", 0.0);
        rhos_ = f.reals("rhos", {1e-1, 3e-2, 1e-2});
        bool ok = !rhos_.empty();
        for (std::size_t i = 0; i < rhos_.size(); ++i)
            ok = ok && rhos_[i] > 0 && rhos_[i] < 1 && (i == 0 || rhos_[i] < rhos_[i - 1]);
        f.require(ok, "rhos", "expected a strictly decreasing list in (0, 1)");
        ts_ = f.reals("t_coords", {0.5, 1.0});
        ok = !ts_.empty();
        for (double t : ts_) ok = ok && t > 0 && t <= 1;
        f.require(ok, "t_coords", "expected times in (0, 1]");
        opt_.reference_shift = f.real("reference_shift", 0.0);
        const auto n = f.integer("grid_n", 512);
        f.require(n >= 64, "grid_n", "must be at least 64");
        grid_n_ = static_cast<std::size_t>(std::max<std::int64_t>(n, 64));
        const auto perms = f.integer("permutations", 200);
        f.require(perms >= 19, "permutations", "must be at least 19");
        opt_.permutations = static_cast<std::size_t>(std::max<std::int64_t>(perms, 19));
        opt_.monotone_slack = f.real("monotone_slack", 1.0);
        opt_.p_threshold = cfg.thresholds.p_value;
        f.require(cfg.replicas >= 200, "rhos", "the two-sample test needs at least 200 replicas");
        if (pc.hurst_valid && !cfg.hurst.holder())
            f.fail("t0", "local asymptotic self-similarity needs hurst.holder to be declared");
        if (pc.hurst_valid && !rhos_.empty() && t0_ >= 0 && t0_ + rhos_.front() > cfg.hurst.horizon())
            f.fail("rhos", "t0 + rho exceeds hurst.horizon");
    }

    Outcome run(RunContext& rc) override {
        const auto& cfg = rc.config();
        opt_.window = window_for(cfg, grid_n_);
        auto r = lass::verify_lass_localtime(cfg.hurst, t0_, x_, rhos_, ts_, cfg.replicas, rc.seed(), opt_);
        Outcome o;
        Table tb{"rho", {"rho", "distance", "p_value", "null_sd"}, {}};
        for (const auto& p : r.per_rho) tb.rows.push_back({p.rho, p.distance, p.p_value, p.null_sd});
        o.estimates = {{"h0", r.h0},
                       {"reference_hurst", r.reference_hurst},
                       {"monotone", r.monotone},
                       {"final_p_value", r.per_rho.back().p_value},
                       {"final_pass", r.final_pass}};
        o.status = verdict(r.verdict);
        o.tables.push_back(std::move(tb));
        return o;
    }
};

// ---- weighted-functional and occupation-functional ----
class Functional : public Statistic {
    bool weighted_;
    std::optional<lass::TestFunction> f_;
    double t0_ = 0.5, rho_ = 1e-2, y_ = 0, t_ = 1, xi_ = 0, lambda_ = 4;
    lass::ScalingPair sp_;
    std::size_t grid_n_ = 1024, perms_ = 300;

public:
    explicit Functional(bool weighted) : weighted_(weighted) {}

    void read(Fields& f, const ParseContext& pc) override {
        const auto& cfg = pc.cfg;
        f_ = read_test_function(f);
        t0_ = f.real("t0", 0.5);
        f.require(t0_ >= 0 && t0_ < cfg.hurst.horizon(), "t0", "must lie in [0, hurst.horizon)");
        rho_ = f.real("rho", weighted_ ? 1e-2 : 1e-3);
        f.require(rho_ > 0 && rho_ < 1, "rho", "must lie in (0, 1)");
        t_ = f.real("t", 1.0);
        f.require(t_ > 0, "t", "must be positive");
        const double h0 = pc.hurst_valid && t0_ >= 0 && t0_ < cfg.hurst.horizon() ? cfg.hurst(t0_) : 0.5;
        if (weighted_) {
            y_ = f.real("y", 0.0);
            sp_.a = f.real("a", h0 + 1.0);
            sp_.b = f.real("b", sp_.a + 1.0 - h0);
            if (pc.hurst_valid)
                for (const auto& v : sp_.violations(h0)) f.fail("a", "scaling pair: " + v);
            xi_ = f.real("xi", 0.0);
            const double bound = 1.0 / (2.0 * cfg.hurst.nu()) - 0.5;
            if (pc.hurst_valid)
                f.require(xi_ == 0.0 || (xi_ > 0 && xi_ < bound), "xi",
                          "xi must lie in (0, 1/(2 sup H) - 1/2) = (0, " + std::to_string(bound) + ")");
        } else {
            lambda_ = f.real("lambda", 4.0);
            f.require(lambda_ >= 1, "lambda", "must be at least 1");
        }
        if (pc.hurst_valid && t0_ >= 0) {
            const double span = rho_ * t_ * (weighted_ ? 1.0 : lambda_);
            f.require(t0_ + span <= cfg.hurst.horizon(), "rho", "the rescaled window exceeds hurst.horizon");
        }
        const auto n = f.integer("grid_n", 1024);
        f.require(n >= 64, "grid_n", "must be at least 64");
        grid_n_ = static_cast<std::size_t>(std::max<std::int64_t>(n, 64));
        const auto p = f.integer("permutations", 300);
        f.require(p >= 19, "permutations", "must be at least 19");
        perms_ = static_cast<std::size_t>(std::max<std::int64_t>(p, 19));
        f.require(cfg.replicas >= 50, "t", "the two-sample test needs at least 50 replicas");
    }

    Outcome run(RunContext& rc) override {
        const auto& cfg = rc.config();
        const double h0 = cfg.hurst(t0_);
        lass::FunctionalOptions opt;
        opt.window = window_for(cfg, grid_n_);
        opt.replicas = cfg.replicas;
        const std::uint64_t s = rc.seed();
        std::vector<double> v;
        if (weighted_) {
            v = lass::weighted_occupation_functional(*f_, cfg.hurst, t0_, rho_, y_, sp_, t_, split_seed(s, 0), opt,
                                                     xi_);
        } else {
            opt.horizon = lambda_ * t_;
            v = lass::occupation_functional(*f_, cfg.hurst, t0_, rho_, lambda_, t_, split_seed(s, 0), opt);
        }
        auto ref = lass::limit_reference(*f_, h0, t_, weighted_ ? y_ : 0.0, cfg.replicas, split_seed(s, 1), grid_n_,
                                         lass::limit_scale(cfg.representation, h0));
        auto test = stats::energy_test(stats::Sample::column(v), stats::Sample::column(ref), perms_, split_seed(s, 2));
        Outcome o;
        Table tb{"replicas", {"replica", "functional", "reference"}, {}};
        for (std::size_t i = 0; i < v.size(); ++i) tb.rows.push_back({static_cast<double>(i), v[i], ref[i]});
        o.estimates = {{"function", f_->describe()},
                       {"h0", h0},
                       {"mean", numerics::mean(v)},
                       {"reference_mean", numerics::mean(ref)},
                       {"distance", test.distance},
                       {"p_value", test.p_value},
                       {"p_threshold", cfg.thresholds.p_value}};
        o.status = verdict(test.p_value > cfg.thresholds.p_value);
        o.tables.push_back(std::move(tb));
        return o;
    }
};

// ---- v-constant ----
class VConstant : public Statistic {
    double hurst_ = 0.5, tol_ = 1e-6;
    std::optional<double> expected_;
    Representation rep_ = Representation::moving_average;
    reg::VGrouping grouping_ = reg::VGrouping::printed;

public:
    void read(Fields& f, const ParseContext& pc) override {
        const double def = pc.hurst_valid ? pc.cfg.hurst(std::max(pc.cfg.grid.t0, 0.0)) : 0.5;
        hurst_ = f.real("hurst", def);
        f.require(hurst_ > 0 && hurst_ < 1, "hurst", "must lie in (0, 1)");
        const auto cfg_rep = pc.cfg.representation == Representation::harmonizable ? "harmonizable" : "moving-average";
        const std::string r = f.text("representation", cfg_rep);
        if (r == "harmonizable")
            rep_ = Representation::harmonizable;
        else if (r == "moving-average")
            rep_ = Representation::moving_average;
        else
            f.fail("representation", "expected moving-average or harmonizable");
        const std::string g = f.text("grouping", "printed");
        if (g == "under-root")
            grouping_ = reg::VGrouping::under_root;
        else if (g != "printed")
            f.fail("grouping", "expected printed or under-root");
        if (f.has("expected")) expected_ = f.real("expected", 0.0);
        tol_ = f.real("tolerance", 1e-6);
    }

    Outcome run(RunContext&) override {
        const double v = reg::v_constant(hurst_, rep_, grouping_);
        Outcome o;
        o.estimates = {{"value", v},
                       {"printed", reg::v_constant(hurst_, rep_, reg::VGrouping::printed)},
                       {"under_root", reg::v_constant(hurst_, rep_, reg::VGrouping::under_root)}};
        if (expected_) {
            o.estimates["expected"] = *expected_;
            o.estimates["abs_error"] = std::abs(v - *expected_);
            o.status = verdict(std::abs(v - *expected_) <= tol_);
        }
        return o;
    }
};

// ---- dirichlet ----
class Dirichlet : public Statistic {
    std::vector<double> b_;
    double h_ = 1, tol_ = 1e-6;
    std::optional<double> expected_;

public:
    void read(Fields& f, const ParseContext&) override {
        b_ = f.reals("b", {0.5});
        bool ok = !b_.empty();
        for (double x : b_) ok = ok && x < 1;
        f.require(ok, "b", "expected exponents below 1");
        h_ = f.real("h", 1.0);
        f.require(h_ > 0, "h", "must be positive");
        if (f.has("expected")) expected_ = f.real("expected", 0.0);
        tol_ = f.real("tolerance", 1e-6);
    }

    Outcome run(RunContext&) override {
        const double v = lt::dirichlet_integral(b_, h_);
        Outcome o;
        o.estimates = {{"value", v}};
        if (expected_) {
            const double rel = std::abs(v - *expected_) / std::max(std::abs(*expected_), 1e-300);
            o.estimates["expected"] = *expected_;
            o.estimates["rel_error"] = rel;
            o.status = verdict(rel <= tol_);
        }
        return o;
    }
};

using Factory = std::function<std::unique_ptr<Statistic>()>;

const std::map<std::string, Factory>& registry() {
    static const std::map<std::string, Factory> r{
        {"occupation-identity", [] { return std::make_unique<OccupationIdentity>(); }},
        {"variance", [] { return std::make_unique<Variance>(); }},
        {"variance-bounds", [] { return std::make_unique<VarianceBounds>(); }},
        {"local-time-moment", [] { return std::make_unique<LocalTimeMoment>(); }},
        {"holder", [] { return std::make_unique<Holder>(); }},
        {"chung", [] { return std::make_unique<RunningExtremum>(true); }},
        {"lil", [] { return std::make_unique<RunningExtremum>(false); }},
        {"local-modulus", [] { return std::make_unique<LocalModulusStat>(); }},
        {"uniform-modulus", [] { return std::make_unique<UniformModulusStat>(); }},
        {"range-inequality", [] { return std::make_unique<RangeInequality>(); }},
        {"space-modulus", [] { return std::make_unique<SpaceModulus>(); }},
        {"lass", [] { return std::make_unique<Lass>(); }},
        {"weighted-functional", [] { return std::make_unique<Functional>(true); }},
        {"occupation-functional", [] { return std::make_unique<Functional>(false); }},
        {"v-constant", [] { return std::make_unique<VConstant>(); }},
        {"dirichlet", [] { return std::make_unique<Dirichlet>(); }},
    };
    return r;
}

}  // namespace

std::unique_ptr<Statistic> make_statistic(const std::string& name) {
    auto it = registry().find(name);
    return it == registry().end() ? nullptr : it->second();
}

std::vector<std::string> registered_statistics() {
    std::vector<std::string> out;
    for (const auto& [k, v] : registry()) out.push_back(k);
    return out;
}

}  // namespace mbm::harness::detail
