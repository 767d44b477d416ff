#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mbm/harness/config.hpp"
#include "mbm/harness/experiment.hpp"
#include "mbm/harness/io.hpp"
#include "mbm/lass.hpp"
#include "mbm/localtime.hpp"
#include "mbm/numerics.hpp"
#include "mbm/random.hpp"
#include "mbm/regularity.hpp"
#include "mbm/stats.hpp"
#include "mbm/synth.hpp"
#include "oracles.hpp"

using mbm::Representation;
using mbm::SamplePath;
using mbm::TimeGrid;
using mbm::hurst::HurstFunction;
namespace fs = std::filesystem;
namespace lt = mbm::localtime;
namespace reg = mbm::regularity;
namespace synth = mbm::synth;
namespace lass = mbm::lass;
namespace stats = mbm::stats;

namespace {

// pinned tolerances
constexpr double occupation_rel_tol = 1e-12;
constexpr double variance_tol_se = 3.0;
constexpr double moment_tol_se = 3.0;
constexpr double moment_max_spread = 1.25;
constexpr double dirichlet_rel_tol = 1e-6;
constexpr double path_holder_tol = 0.05;
constexpr double field_holder_tol = 0.07;
constexpr double chung_lo = 0.85, chung_hi = 1.45;
constexpr double lil_lo = 1.0, lil_hi = 1.9;
constexpr double v_constant_tol = 1e-6;
constexpr double p_threshold = 0.01;
constexpr double growth_tol = 0.03;
constexpr double min_inflation = 5.0;

struct Verdict {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [x]");
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

HurstFunction sinusoidal() { return HurstFunction::sinusoidal(0.5, 0.2, 2 * std::numbers::pi, 0.0); }

std::vector<SamplePath> fbm_paths(double H, const TimeGrid& g, std::size_t n, std::uint64_t master) {
    synth::FbmSynthesizer gen(H, g);
    std::vector<SamplePath> out;
    for (std::size_t r = 0; r < n; ++r) out.push_back(gen.generate(mbm::split_seed(master, r)));
    return out;
}

std::vector<SamplePath> kernel_paths(const HurstFunction& h, const TimeGrid& g, std::size_t n, std::uint64_t master,
                                     Representation rep = Representation::moving_average) {
    synth::KernelSynthesizer gen(h, g, rep);
    std::vector<SamplePath> out;
    for (std::size_t r = 0; r < n; ++r) out.push_back(gen.generate(mbm::split_seed(master, r)));
    return out;
}

// time the piecewise-linear path spends in [a, b) up to its last point
double time_in_interval(const SamplePath& p, double a, double b) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < p.values.size(); ++k) {
        const double u = p.values[k], v = p.values[k + 1];
        if (u == v) {
            if (u >= a && u < b) total += p.grid.dt;
            continue;
        }
        const double lo = std::min(u, v), hi = std::max(u, v);
        const double overlap = std::max(0.0, std::min(hi, b) - std::max(lo, a));
        total += p.grid.dt * overlap / (hi - lo);
    }
    return total;
}

// ---- 1 ----
Verdict occupation_identity() {
    Verdict v;
    auto run = [&](const std::vector<SamplePath>& paths, double mean_h, const std::string& label) {
        double worst = 0.0;
        std::size_t comparisons = 0;
        for (const auto& p : paths) {
            auto f = lt::local_time_field(p, lt::default_x_grid(p, mean_h));
            const auto last = f.row(f.rows() - 1);
            double all = 0.0;
            for (std::size_t j = 0; j < f.x.m; ++j) {
                const double space = last[j] * f.x.dx;
                all += space;
                const double time = time_in_interval(p, f.x.edge(j), f.x.edge(j + 1));
                if (time > 0.0 || space > 0.0) worst = std::max(worst, std::abs(space - time) / std::max(time, 1e-300));
                ++comparisons;
            }
            const double length = p.grid.length();
            worst = std::max(worst, std::abs(all - length) / length);
            ++comparisons;
        }
        v.check(worst <= occupation_rel_tol, label + " max rel err " + fmt(worst) + " over " + std::to_string(comparisons));
    };
    run(fbm_paths(0.5, TimeGrid::over(0.0, 1.0, 4097), 1000, 101), 0.5, "BM");
    run(kernel_paths(sinusoidal(), TimeGrid::over(0.0, 1.0, 4097), 200, 102), 0.5, "sinusoidal mBm");
    return v;
}

// ---- 2 ----
Verdict constant_h_reduction() {
    Verdict v;
    const auto h = HurstFunction::constant(0.5);
    const auto grid = TimeGrid::over(0.0, 1.0, 321);
    const std::size_t idx[] = {64, 128, 192, 256, 320};
    constexpr std::size_t replicas = 10000;

    auto assess = [&](const std::string& label, const std::function<SamplePath(std::uint64_t)>& gen, bool fit) {
        std::vector<std::vector<double>> sq(5);
        for (std::size_t r = 0; r < replicas; ++r) {
            auto p = gen(mbm::split_seed(202, r));
            for (std::size_t k = 0; k < 5; ++k) sq[k].push_back(p.values[idx[k]] * p.values[idx[k]]);
        }
        std::vector<double> mean(5), se(5), t(5);
        for (std::size_t k = 0; k < 5; ++k) {
            t[k] = grid.at(idx[k]);
            mean[k] = mbm::numerics::mean(sq[k]);
            double ss = 0.0;
            for (double x : sq[k]) ss += (x - mean[k]) * (x - mean[k]);
            se[k] = std::sqrt(ss / (replicas - 1) / replicas);
        }
        double c = 1.0;
        if (fit) {
            double num = 0.0, den = 0.0;
            for (std::size_t k = 0; k < 5; ++k) {
                num += mean[k] * t[k] / (se[k] * se[k]);
                den += t[k] * t[k] / (se[k] * se[k]);
            }
            c = num / den;
        }
        double max_z = 0.0;
        for (std::size_t k = 0; k < 5; ++k) max_z = std::max(max_z, std::abs(mean[k] - c * t[k]) / se[k]);
        v.check(max_z <= variance_tol_se, label + " max|z| " + fmt(max_z, 3) + (fit ? " scale " + fmt(c, 5) : ""));
    };

    synth::KernelSynthesizer ma(h, grid, Representation::moving_average);
    assess("moving-average", [&](std::uint64_t s) { return ma.generate(s); }, false);
    synth::KernelSynthesizer rl(h, grid, Representation::riemann_liouville);
    assess("riemann-liouville", [&](std::uint64_t s) { return rl.generate(s); }, false);
    synth::HarmonizableSynthesizer hz(h, grid);
    assess("harmonizable", [&](std::uint64_t s) { return hz.generate(s); }, true);
    return v;
}

// ---- 3 ----
Verdict variance_bounds() {
    Verdict v;
    const std::pair<std::string, HurstFunction> cases[] = {{"linear", HurstFunction::linear(0.3, 0.4)},
                                                           {"sinusoidal", sinusoidal()}};
    for (const auto& [label, h] : cases) {
        auto rep = synth::verify_variance_bounds(h, 0.0, 1.0, 50, {}, 303, Representation::moving_average, 50);
        v.check(rep.pairs.size() == 50 && rep.lower_violations == 0,
                label + " pair violations " + std::to_string(rep.lower_violations) + " (min margin " +
                    fmt(rep.min_lower_margin) + ")");
        v.check(rep.tuples.size() == 100 && rep.determinant_violations == 0,
                label + " determinant violations " + std::to_string(rep.determinant_violations) + " (min margin " +
                    fmt(rep.min_determinant_margin) + ")");
    }
    return v;
}

// ---- 4 ----
Verdict moment_structure() {
    Verdict v;
    {
        auto paths = fbm_paths(0.5, TimeGrid::over(0.0, 1.0, 4097), 8000, 404);
        std::vector<double> inc;
        for (const auto& p : paths) {
            auto x = lt::XGrid::covering(-0.2, 0.2, std::pow(p.grid.dt, 0.5));
            auto f = lt::local_time_field(p, x);
            inc.push_back(lt::local_time_increment(f, 0.0, 1.0, 0.0));
        }
        double max_z = 0.0;
        std::string per;
        for (int m : {1, 2, 3}) {
            const double closed = std::pow(2.0, 0.5 * m) * std::tgamma(0.5 * (m + 1)) / std::sqrt(std::numbers::pi);
            auto e = lt::moment_of(inc, m);
            const double z = (e.value - closed) / e.std_error;
            max_z = std::max(max_z, std::abs(z));
            per += " m" + std::to_string(m) + " " + fmt(e.value) + "/" + fmt(closed);
        }
        v.check(max_z <= moment_tol_se, "BM L(1,0) moments" + per + " max|z| " + fmt(max_z, 3));
    }
    {
        const auto h = sinusoidal();
        const double t = 0.25, len = 0.25;
        auto paths = kernel_paths(h, TimeGrid::over(0.0, 0.5, 2049), 1000, 405);
        std::vector<double> inc;
        for (const auto& p : paths) {
            auto f = lt::local_time_field(p, lt::default_x_grid(p, 0.5));
            inc.push_back(lt::local_time_increments(std::span(&f, 1), std::span(&p, 1), t, len, lt::Anchor::path_point)[0]);
        }
        const double hsup = h.sup_inf(t, t + len).sup;
        for (double& x : inc) x /= std::pow(len, 1.0 - hsup);
        const std::vector<int> orders = {2, 3, 4, 5};
        std::vector<double> moments;
        for (int m : orders) moments.push_back(lt::moment_of(inc, m).value);
        auto fit = lt::fit_moment_constant(orders, moments, hsup);
        bool dominated = true;
        for (std::size_t i = 0; i < orders.size(); ++i)
            dominated = dominated && moments[i] <= std::pow(fit.c_hat, orders[i]) *
                                                      std::pow(std::tgamma(orders[i] + 1.0), hsup) * (1 + 1e-12);
        v.check(dominated && fit.spread <= moment_max_spread,
                "mBm normalized moments C-hat " + fmt(fit.c_hat) + " spread " + fmt(fit.spread));
    }
    return v;
}

// ---- 5 ----
Verdict dirichlet() {
    Verdict v;
    std::mt19937_64 eng(505);
    std::uniform_real_distribution<double> ub(0.05, 0.85), uh(0.1, 3.0);
    std::uniform_int_distribution<int> um(1, 3);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> b(static_cast<std::size_t>(um(eng)));
        for (double& x : b) x = ub(eng);
        const double h = uh(eng);
        const double closed = lt::dirichlet_integral(b, h);
        const double nested = mbm::oracle::dirichlet_nested(b, h);
        worst = std::max(worst, std::abs(closed - nested) / std::abs(nested));
    }
    v.check(worst <= dirichlet_rel_tol, "max rel err " + fmt(worst) + " on 10 instances");
    return v;
}

// ---- 6 ----
Verdict holder_exponents() {
    Verdict v;
    reg::HolderOptions path_opt;
    path_opt.points_per_scale = 64;
    for (double H : {0.3, 0.5, 0.7}) {
        auto paths = fbm_paths(H, TimeGrid::over(0.0, 1.0, 16385), 1000, 606);
        auto e = reg::holder_exponent_estimate(paths, 0.5, path_opt);
        v.check(std::abs(e.alpha_hat - H) <= path_holder_tol, "fBm H=" + fmt(H, 2) + " alpha " + fmt(e.alpha_hat));
    }
    const auto h = sinusoidal();
    reg::HolderOptions field_opt;
    field_opt.points_per_scale = 128;
    for (double t0 : {0.25, 0.5, 0.75}) {
        auto paths = kernel_paths(h, TimeGrid::over(t0, t0 + 1.0 / 64, 16385), 1000, 607);
        auto e = reg::local_time_holder_estimate(paths, t0, field_opt);
        const double expected = 1.0 - h(t0);
        v.check(std::abs(e.alpha_hat - expected) <= field_holder_tol,
                "local time t0=" + fmt(t0, 2) + " alpha " + fmt(e.alpha_hat) + " vs " + fmt(expected));
    }
    return v;
}

std::vector<double> running_final(std::span<const reg::ModulusCurve> curves) {
    std::vector<double> out;
    for (const auto& c : curves) out.push_back(c.running.back());
    return out;
}

// ---- 7 ----
Verdict chung() {
    Verdict v;
    const auto bm = HurstFunction::constant(0.5);
    {
        auto paths = fbm_paths(0.5, TimeGrid::over(0.0, 0.1, 8193), 1000, 707);
        std::vector<reg::ModulusCurve> c;
        for (const auto& p : paths) c.push_back(reg::chung_statistic(p, bm, 0.0, reg::delta_ladder(0.1, 1e-4)));
        const double med = mbm::numerics::median(running_final(c));
        v.check(med >= chung_lo && med <= chung_hi, "BM median running inf " + fmt(med) + " in [" + fmt(chung_lo) +
                                                        ", " + fmt(chung_hi) + "]");
    }
    {
        const auto h = sinusoidal();
        const double t0 = 0.5;
        const auto deltas = reg::delta_ladder(1e-2, 1e-4);
        auto bm_paths = fbm_paths(0.5, TimeGrid::over(0.0, 0.01, 4097), 1000, 708);
        auto mbm_paths = kernel_paths(h, TimeGrid::over(t0, t0 + 0.01, 4097), 1000, 709);
        std::vector<double> a, b;
        for (const auto& p : bm_paths) a.push_back(reg::chung_statistic(p, bm, 0.0, deltas).running.back());
        for (const auto& p : mbm_paths) b.push_back(reg::chung_statistic(p, h, t0, deltas).running.back());
        auto res = stats::energy_test(stats::Sample::column(a), stats::Sample::column(b), 500, 710);
        v.check(res.p_value > p_threshold, "mBm at H(t0)=0.5 against BM p " + fmt(res.p_value, 3));
    }
    return v;
}

// ---- 8 ----
Verdict lil() {
    Verdict v;
    const double ma = reg::v_constant(0.5, Representation::moving_average);
    v.check(ma == 1.0, "V(0.5, moving-average) " + fmt(ma, 17));
    const double hz = reg::v_constant(0.5, Representation::harmonizable);
    const double root = std::sqrt(2 * std::numbers::pi);
    v.check(std::abs(hz - root) <= v_constant_tol, "V(0.5, harmonizable) " + fmt(hz, 12) + " vs " + fmt(root, 12));
    const auto h = HurstFunction::constant(0.5);
    auto paths = kernel_paths(h, TimeGrid::over(0.0, 0.1, 8193), 1000, 808);
    std::vector<reg::ModulusCurve> c;
    for (const auto& p : paths) c.push_back(reg::lil_statistic(p, h, 0.0, reg::delta_ladder(0.1, 1e-4)));
    const double med = mbm::numerics::median(running_final(c));
    v.check(med >= lil_lo && med <= lil_hi, "moving-average BM median running sup " + fmt(med));
    return v;
}

// ---- 9 ----
Verdict lass_localtime() {
    Verdict v;
    const auto h = sinusoidal().with_holder(1.0, 1.3);
    const double rhos[] = {1e-1, 3e-2, 1e-2};
    const double coords[] = {0.5, 1.0};
    lass::LassOptions opt;
    opt.window.grid_n = 512;
    opt.permutations = 300;
    opt.p_threshold = p_threshold;
    for (double t0 : {0.5, 0.25}) {
        auto rep = lass::verify_lass_localtime(h, t0, 0.0, rhos, coords, 500, 909, opt);
        std::string d;
        for (const auto& r : rep.per_rho) d += " " + fmt(r.distance, 3) + "(sd " + fmt(r.null_sd, 2) + ")";
        v.check(rep.monotone && rep.final_pass, "H0=" + fmt(rep.h0, 2) + " distances" + d + " final p " +
                                                    fmt(rep.per_rho.back().p_value, 3));
    }
    opt.reference_shift = 0.2;
    auto neg = lass::verify_lass_localtime(h, 0.5, 0.0, rhos, coords, 500, 910, opt);
    v.check(neg.per_rho.back().p_value < p_threshold,
            "wrong-H control p " + fmt(neg.per_rho.back().p_value, 3));
    return v;
}

// ---- 10 ----
Verdict limit_theorems() {
    Verdict v;
    const auto h = sinusoidal();
    const double t0 = 0.5, h0 = h(t0), rho = 1e-2;
    const double a = h0 + 1.0;
    const lass::ScalingPair sp{a, a + 1.0 - h0};
    lass::FunctionalOptions opt;
    opt.window.grid_n = 1024;
    opt.replicas = 400;
    const std::pair<std::string, lass::TestFunction> fs_[] = {
        {"triangle", lass::TestFunction::triangle(0.0, 0.05, 20.0)},
        {"indicator", lass::TestFunction::indicator(-1.0, 1.0, 0.5)}};
    std::uint64_t seed = 1000;
    for (const auto& [label, f] : fs_) {
        for (double y : {0.0, 1.0}) {
            auto a = lass::weighted_occupation_functional(f, h, t0, rho, y, sp, 1.0, mbm::split_seed(seed, 0), opt);
            auto b = lass::limit_reference(f, h0, 1.0, y, opt.replicas, mbm::split_seed(seed, 1), opt.window.grid_n,
                                           lass::limit_scale(Representation::moving_average, h0));
            auto res = stats::energy_test(stats::Sample::column(a), stats::Sample::column(b), 300,
                                          mbm::split_seed(seed, 2));
            v.check(res.p_value > p_threshold, label + " y=" + fmt(y, 2) + " p " + fmt(res.p_value, 3));
            ++seed;
        }
    }
    mbm::harness::json cfg = {{"seed", 1},
                              {"replicas", 100},
                              {"hurst", {{"kind", "constant"}, {"params", {0.5}}}},
                              {"statistics", {{{"name", "weighted-functional"}, {"t0", 0.5}, {"a", 0.6}, {"b", 1.0}}}}};
    auto parsed = mbm::harness::parse_config_checked(cfg.dump());
    bool rejected = false;
    for (const auto& x : parsed.violations) rejected = rejected || x.path == "statistics[0].a";
    v.check(!parsed.ok() && rejected, "scaling pair a=0.6 b=1.0 at H0=0.5 rejected at config time");
    return v;
}

// ---- 11 ----
Verdict exponent_sensitivity() {
    Verdict v;
    const double length = 1.5e-3;
    const std::size_t n = (std::size_t{1} << 16) + 1;
    // 52 quarter octaves above 1e-7, where delta^{-0.1} first exceeds 5
    const auto deltas = reg::delta_ladder(1e-7 * 8192, 0.99e-7);
    auto judge = [&](const std::string& label, std::vector<reg::ModulusCurve>& nominal,
                     std::vector<reg::ModulusCurve>& perturbed) {
        auto e0 = reg::envelope(nominal).max, e1 = reg::envelope(perturbed).max;
        const double ratio = e1.values.back() / e0.values.back();
        v.check(reg::is_bounded(e0, growth_tol) && ratio >= min_inflation,
                label + " growth " + fmt(reg::growth_exponent(e0), 3) + " inflation " + fmt(ratio, 3) + " at delta " +
                    fmt(e0.deltas.back(), 3));
    };

    const auto bm = HurstFunction::constant(0.5);
    auto bm_paths = fbm_paths(0.5, TimeGrid::over(0.0, length, n), 200, 1111);
    std::vector<reg::ModulusCurve> lm0, lm1, um0, um1, ch0, ch1, li0, li1;
    for (const auto& p : bm_paths) {
        auto x = lt::default_x_grid(p, 0.5);
        lm0.push_back(reg::local_modulus_curve(p, x, bm, 0.0, deltas));
        lm1.push_back(reg::local_modulus_curve(p, x, bm, 0.0, deltas, {lt::Anchor::fixed_x, 0.0, 0.1}));
        um0.push_back(reg::uniform_modulus_statistic(p, x, 0.0, bm, deltas));
        um1.push_back(reg::uniform_modulus_statistic(p, x, 0.0, bm, deltas, {0.1, 0.0}));
        ch0.push_back(reg::chung_statistic(p, bm, 0.0, deltas));
        ch1.push_back(reg::chung_statistic(p, bm, 0.0, deltas, 0.1));
        li0.push_back(reg::lil_statistic(p, bm, 0.0, deltas));
        li1.push_back(reg::lil_statistic(p, bm, 0.0, deltas, 0.1));
    }
    judge("BM local modulus", lm0, lm1);
    judge("BM uniform modulus", um0, um1);
    judge("BM chung", ch0, ch1);
    judge("BM lil", li0, li1);

    const auto h = sinusoidal();
    const double t = 0.5;
    auto mbm_paths = kernel_paths(h, TimeGrid::over(t, t + length, n), 100, 1112);
    std::vector<reg::ModulusCurve> m0, m1;
    for (const auto& p : mbm_paths) {
        auto x = lt::default_x_grid(p, h(t), p.values[0]);
        m0.push_back(reg::local_modulus_curve(p, x, h, t, deltas, {lt::Anchor::path_point, 0.0, 0.0}));
        m1.push_back(reg::local_modulus_curve(p, x, h, t, deltas, {lt::Anchor::path_point, 0.0, 0.1}));
    }
    judge("mBm local modulus", m0, m1);
    return v;
}

// ---- 12 ----
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict determinism() {
    Verdict v;
    const char* text = R"({
      "seed": 1212, "replicas": 60,
      "hurst": {"kind": "sinusoidal", "params": [0.5, 0.2, 6.283185307179586, 0.0],
                "holder": {"beta": 1.0, "constant": 1.2566370614359172}},
      "grid": {"n": 2049},
      "statistics": [
        {"name": "occupation-identity"},
        {"name": "variance"},
        {"name": "lil", "t0": 0.25},
        {"name": "local-modulus", "t": 0.5},
        {"name": "weighted-functional", "t0": 0.5, "grid_n": 256, "permutations": 49},
        {"name": "dirichlet", "b": [0.3, 0.6], "h": 0.5}
      ]
    })";
    const fs::path base = fs::temp_directory_path() / ("mbm-acceptance-" + std::to_string(::getpid()));
    std::vector<std::vector<std::pair<std::string, std::string>>> runs;
    int k = 0;
    for (const char* stamp : {"2020-01-01T00:00:00Z", "2030-06-15T12:34:56Z"}) {
        auto cfg = mbm::harness::parse_config(text);
        cfg.output_dir = (base / ("run" + std::to_string(k++))).string();
        mbm::harness::run_experiment(cfg, {true, stamp});
        std::vector<std::pair<std::string, std::string>> files;
        for (const auto& e : fs::directory_iterator(cfg.output_dir)) {
            std::string content = slurp(e.path());
            if (e.path().filename() == "report.json") {
                auto doc = mbm::harness::json::parse(content);
                doc["runtime"].erase("timestamp");
                content = doc.dump(2);
            }
            files.emplace_back(e.path().filename().string(), std::move(content));
        }
        std::sort(files.begin(), files.end());
        runs.push_back(std::move(files));
    }
    fs::remove_all(base);
    v.check(runs[0].size() == runs[1].size() && runs[0].size() > 1,
            std::to_string(runs[0].size()) + " vs " + std::to_string(runs[1].size()) + " files");
    bool same = runs[0] == runs[1];
    v.check(same, same ? "all files byte-identical modulo timestamp" : "outputs differ");
    return v;
}

struct Criterion {
    int id;
    const char* title;
    Verdict (*run)();
};

const Criterion criteria[] = {
    {1, "occupation identity", occupation_identity},
    {2, "constant-H reduction", constant_h_reduction},
    {3, "variance bounds", variance_bounds},
    {4, "moment structure", moment_structure},
    {5, "Dirichlet integral", dirichlet},
    {6, "Hoelder exponents", holder_exponents},
    {7, "Chung statistic", chung},
    {8, "LIL constants", lil},
    {9, "LASS of local time", lass_localtime},
    {10, "limit theorems", limit_theorems},
    {11, "exponent sensitivity", exponent_sensitivity},
    {12, "determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<int> only;
    app.add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, 12));
    CLI11_PARSE(app, argc, argv);

    bool all_pass = true;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all_pass = all_pass && v.pass;
        std::printf("criterion %2d %s  %s: %s (%.1fs)\n", c.id, v.pass ? "PASS" : "FAIL", c.title, v.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
