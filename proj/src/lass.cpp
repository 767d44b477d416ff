#include "mbm/lass.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "mbm/numerics.hpp"
#include "mbm/random.hpp"

namespace mbm::lass {

namespace {

constexpr std::uint64_t kReferenceStream = 0x9e3779b97f4a7c15ULL;

std::size_t steps_for(double horizon, std::size_t grid_n) {
    auto n = static_cast<std::size_t>(std::llround(horizon * static_cast<double>(grid_n)));
    return std::max<std::size_t>(n, 1);
}

std::vector<double> column_at(const SamplePath& p, double x, double h0, std::span<const std::size_t> rows) {
    auto xg = localtime::default_x_grid(p, h0, x);
    auto bin = xg.bin_of(x);
    std::vector<double> out;
    if (!bin) {
        out.assign(rows.size(), 0.0);
        return out;
    }
    auto s = localtime::bin_series(p, xg, *bin);
    for (std::size_t k : rows) out.push_back(s[k]);
    return out;
}

std::vector<std::size_t> rows_of(std::span<const double> t_coords, std::size_t grid_n) {
    if (t_coords.empty()) throw std::invalid_argument("need at least one time coordinate");
    std::vector<std::size_t> rows;
    for (double t : t_coords) {
        if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("time coordinates must lie in (0, 1]");
        rows.push_back(static_cast<std::size_t>(std::llround(t * static_cast<double>(grid_n))));
    }
    return rows;
}

}  // namespace

double ScalingPair::theta(double rho) const { return std::pow(rho, a); }
double ScalingPair::psi(double rho) const { return std::pow(rho, b); }

std::vector<std::string> ScalingPair::violations(double h0) const {
    std::vector<std::string> v;
    if (std::abs((b - a) - (1.0 - h0)) > 1e-12) {
        std::ostringstream os;
        os << "psi(rho)/theta(rho) = rho^{1-H0} requires b - a = " << 1.0 - h0 << ", got " << b - a;
        v.push_back(os.str());
    }
    if (!(a > h0)) {
        std::ostringstream os;
        os << "theta(rho)/rho^{H0} = o(1) requires a > H0 = " << h0 << ", got a = " << a;
        v.push_back(os.str());
    }
    return v;
}

void ScalingPair::validate(double h0) const {
    auto v = violations(h0);
    if (v.empty()) return;
    std::string msg = "invalid scaling pair: " + v.front();
    for (std::size_t i = 1; i < v.size(); ++i) msg += "; " + v[i];
    throw std::invalid_argument(msg);
}

struct RescaledGenerator::Impl {
    std::optional<synth::KernelSynthesizer> kernel;
    std::optional<synth::FbmSynthesizer> fbm;
    std::optional<synth::HarmonizableSynthesizer> harmonizable;
    TimeGrid unit;
    double scale = 1.0;
};

RescaledGenerator::RescaledGenerator(const hurst::HurstFunction& h, double t0, double rho, double horizon,
                                     WindowOptions opt)
    : h0_(h(t0)), rho_(rho), impl_(std::make_unique<Impl>()) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("rescaled horizon must be positive");
    if (opt.grid_n < 2) throw std::invalid_argument("grid_n must be at least 2");
    const std::size_t n = steps_for(horizon, opt.grid_n);
    const double dt = rho * horizon / static_cast<double>(n);
    if (dt < 1e-11 * std::max(1.0, t0)) throw std::invalid_argument("rho too small for the synthesis grid");
    impl_->unit = TimeGrid{0.0, horizon / static_cast<double>(n), n + 1};
    impl_->scale = std::pow(rho, -h0_);
    const TimeGrid window{t0, dt, n + 1};
    switch (opt.representation) {
        case Representation::moving_average:
        case Representation::riemann_liouville:
            impl_->kernel.emplace(h, window, opt.representation, opt.kernel);
            break;
        case Representation::harmonizable:
            impl_->harmonizable.emplace(h, window, opt.spectral);
            break;
        case Representation::fbm_exact:
            if (!h.is_constant()) throw std::invalid_argument("exact fBm windows need a constant Hurst function");
            impl_->fbm.emplace(h0_, impl_->unit);
            impl_->scale = 1.0;
            break;
    }
}

RescaledGenerator::~RescaledGenerator() = default;
RescaledGenerator::RescaledGenerator(RescaledGenerator&&) noexcept = default;
RescaledGenerator& RescaledGenerator::operator=(RescaledGenerator&&) noexcept = default;

SamplePath RescaledGenerator::generate(std::uint64_t seed) {
    SamplePath raw = impl_->kernel ? impl_->kernel->generate(seed)
                     : impl_->fbm  ? impl_->fbm->generate(seed)
                                   : impl_->harmonizable->generate(seed);
    SamplePath out;
    out.grid = impl_->unit;
    out.meta = raw.meta;
    out.meta.relative_to_start = true;
    out.values.resize(raw.values.size());
    const double b0 = raw.values.front();
    for (std::size_t k = 0; k < raw.values.size(); ++k) out.values[k] = (raw.values[k] - b0) * impl_->scale;
    return out;
}

double limit_scale(Representation rep, double h0) {
    switch (rep) {
        case Representation::moving_average:
        case Representation::riemann_liouville:
            return std::sqrt(synth::moving_average_unit_variance(h0));
        case Representation::harmonizable:
            return std::sqrt(synth::harmonizable_unit_variance(h0));
        case Representation::fbm_exact:
            return 1.0;
    }
    return 1.0;
}

SamplePath rescale_path(const hurst::HurstFunction& h, double t0, double rho, std::size_t grid_n, std::uint64_t seed,
                        Representation rep) {
    WindowOptions opt;
    opt.representation = rep;
    opt.grid_n = grid_n;
    return RescaledGenerator(h, t0, rho, 1.0, opt).generate(seed);
}

YCurve rescaled_local_time(const localtime::LocalTimeField& field, const SamplePath& path,
                           const hurst::HurstFunction& h, double t0, double rho, double x) {
    const double h0 = h(t0);
    const std::size_t k0 = field.grid.index_of(t0), k1 = field.grid.index_of(t0 + rho);
    const double level = std::pow(rho, h0) * x + path.values[path.grid.index_of(t0)];
    auto bin = field.x.bin_of(level);
    if (!bin) throw std::out_of_range("rescaled level outside the space grid");
    YCurve y;
    y.grid = TimeGrid{0.0, field.grid.dt / rho, k1 - k0 + 1};
    const double norm = std::pow(rho, 1.0 - h0);
    for (std::size_t k = k0; k <= k1; ++k) y.values.push_back((field.at(k, *bin) - field.at(k0, *bin)) / norm);
    return y;
}

stats::TwoSampleResult fdd_distance(const stats::Sample& a, const stats::Sample& b, std::size_t permutations,
                                    std::uint64_t seed) {
    if (a.cols != b.cols) throw std::invalid_argument("fdd samples must share coordinates");
    if (a.rows < 200 || b.rows < 200) throw std::invalid_argument("fdd comparison needs at least 200 replicas per sample");
    return stats::energy_test(a, b, permutations, seed);
}

ConvergenceReport verify_lass_localtime(const hurst::HurstFunction& h, double t0, double x, std::span<const double> rhos,
                                        std::span<const double> t_coords, std::size_t n_replicas, std::uint64_t seed,
                                        const LassOptions& opt) {
    if (rhos.empty()) throw std::invalid_argument("need at least one rho");
    for (std::size_t i = 1; i < rhos.size(); ++i)
        if (!(rhos[i] < rhos[i - 1])) throw std::invalid_argument("rhos must be decreasing");
    if (!h.holder()) throw std::invalid_argument("condition (H_beta) must be declared on the Hurst function");
    {
        std::vector<double> g;
        for (std::size_t i = 0; i <= 200; ++i) g.push_back(t0 + rhos.front() * static_cast<double>(i) / 200.0);
        if (!hurst::check_condition_beta(h, g).holds) throw std::invalid_argument("condition (H_beta) fails on the window");
    }
    const std::size_t grid_n = opt.window.grid_n;
    auto rows = rows_of(t_coords, grid_n);
    ConvergenceReport rep;
    rep.h0 = h(t0);
    rep.reference_hurst = rep.h0 + opt.reference_shift;

    stats::Sample ref(n_replicas, rows.size());
    synth::FbmSynthesizer ref_gen(rep.reference_hurst, TimeGrid{0.0, 1.0 / static_cast<double>(grid_n), grid_n + 1});
    const std::uint64_t ref_master = splitmix64(seed ^ kReferenceStream);
    const double scale = limit_scale(opt.window.representation, rep.reference_hurst);
    for (std::size_t r = 0; r < n_replicas; ++r) {
        auto p = ref_gen.generate(split_seed(ref_master, r));
        for (double& v : p.values) v *= scale;
        auto c = column_at(p, x, rep.h0, rows);
        std::copy(c.begin(), c.end(), &ref(r, 0));
    }
    for (double rho : rhos) {
        RescaledGenerator gen(h, t0, rho, 1.0, opt.window);
        stats::Sample y(n_replicas, rows.size());
        for (std::size_t r = 0; r < n_replicas; ++r) {
            auto c = column_at(gen.generate(split_seed(seed, r)), x, rep.h0, rows);
            std::copy(c.begin(), c.end(), &y(r, 0));
        }
        auto res = fdd_distance(y, ref, opt.permutations, seed);
        rep.per_rho.push_back({rho, res.distance, res.p_value, res.null_sd});
    }
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.per_rho.size(); ++i)
        if (rep.per_rho[i].distance > rep.per_rho[i - 1].distance + opt.monotone_slack * rep.per_rho[i].null_sd)
            rep.monotone = false;
    rep.final_pass = rep.per_rho.back().p_value > opt.p_threshold;
    rep.verdict = rep.monotone && rep.final_pass;
    return rep;
}

TightnessTable tightness_constants(const hurst::HurstFunction& h, double t0, double x, std::span<const double> rhos,
                                   std::span<const std::pair<double, double>> pairs, std::span<const int> orders,
                                   std::size_t n_replicas, std::uint64_t seed, const WindowOptions& opt) {
    if (pairs.empty() || orders.empty()) throw std::invalid_argument("need pairs and orders");
    std::vector<double> coords;
    for (auto [s, t] : pairs) {
        if (!(s >= 0.0 && s < t && t <= 1.0)) throw std::invalid_argument("pairs must satisfy 0 <= s < t <= 1");
        coords.push_back(s);
        coords.push_back(t);
    }
    std::vector<std::size_t> rows;
    for (double c : coords) rows.push_back(static_cast<std::size_t>(std::llround(c * static_cast<double>(opt.grid_n))));
    TightnessTable tab;
    tab.rhos.assign(rhos.begin(), rhos.end());
    tab.orders.assign(orders.begin(), orders.end());
    const double h0 = h(t0);
    for (double rho : rhos) {
        RescaledGenerator gen(h, t0, rho, 1.0, opt);
        std::vector<std::vector<double>> inc(pairs.size());
        for (std::size_t r = 0; r < n_replicas; ++r) {
            auto c = column_at(gen.generate(split_seed(seed, r)), x, h0, rows);
            for (std::size_t p = 0; p < pairs.size(); ++p) inc[p].push_back(c[2 * p + 1] - c[2 * p]);
        }
        for (int m : orders) {
            double cm = 0.0;
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                const double gap = pairs[p].second - pairs[p].first;
                cm = std::max(cm, localtime::moment_of(inc[p], m).value / std::pow(gap, (1.0 - h0) * m));
            }
            tab.constants.push_back(cm);
        }
    }
    return tab;
}

TestFunction::TestFunction(Shape s, double c, double w, double height, double cutoff)
    : shape_(s), center_(c), width_(w), height_(height), cutoff_(cutoff) {
    if (!(w > 0.0) || !std::isfinite(c) || !std::isfinite(height)) throw std::invalid_argument("test function needs a finite centre, height and positive width");
    if (s == Shape::truncated_gaussian && !(cutoff > 0.0)) throw std::invalid_argument("gaussian cutoff must be positive");
}

TestFunction TestFunction::indicator(double lo, double hi, double height) {
    if (!(lo < hi)) throw std::invalid_argument("indicator needs lo < hi");
    return {Shape::indicator, 0.5 * (lo + hi), 0.5 * (hi - lo), height, 0.0};
}

TestFunction TestFunction::triangle(double center, double half_width, double height) {
    return {Shape::triangle, center, half_width, height, 0.0};
}

TestFunction TestFunction::truncated_gaussian(double center, double sigma, double cutoff, double height) {
    return {Shape::truncated_gaussian, center, sigma, height, cutoff};
}

double TestFunction::operator()(double x) const {
    const double z = x - center_;
    switch (shape_) {
        case Shape::indicator:
            return std::abs(z) <= width_ ? height_ : 0.0;
        case Shape::triangle:
            return std::abs(z) < width_ ? height_ * (1.0 - std::abs(z) / width_) : 0.0;
        case Shape::truncated_gaussian:
            return std::abs(z) <= cutoff_ * width_ ? height_ * std::exp(-0.5 * z * z / (width_ * width_)) : 0.0;
    }
    return 0.0;
}

double TestFunction::antiderivative(double x) const {
    const double w = width_;
    switch (shape_) {
        case Shape::indicator:
            return height_ * (std::clamp(x - center_, -w, w) + w);
        case Shape::triangle: {
            const double z = std::clamp(x - center_, -w, w);
            if (z <= 0.0) return height_ * (z + w) * (z + w) / (2.0 * w);
            return height_ * (0.5 * w + z - z * z / (2.0 * w));
        }
        case Shape::truncated_gaussian: {
            const double k = cutoff_ * w;
            const double z = std::clamp(x - center_, -k, k);
            const double c = w * std::sqrt(0.5 * std::numbers::pi);
            return height_ * c * (std::erf(z / (w * std::numbers::sqrt2)) + std::erf(cutoff_ / std::numbers::sqrt2));
        }
    }
    return 0.0;
}

double TestFunction::integral() const {
    const double span = shape_ == Shape::truncated_gaussian ? cutoff_ * width_ : width_;
    return antiderivative(center_ + span) - antiderivative(center_ - span);
}

double TestFunction::abs_moment(double xi) const {
    const double span = shape_ == Shape::truncated_gaussian ? cutoff_ * width_ : width_;
    auto g = [&](double x) { return std::abs((*this)(x)) * std::pow(std::abs(x), xi); };
    double lo = center_ - span, hi = center_ + span;
    if (lo < 0.0 && hi > 0.0)
        return numerics::integrate(g, lo, 0.0, 1e-8).value + numerics::integrate(g, 0.0, hi, 1e-8).value;
    return numerics::integrate(g, lo, hi, 1e-8).value;
}

TestFunction TestFunction::scaled(double c) const {
    TestFunction f = *this;
    f.height_ *= c;
    return f;
}

std::string TestFunction::describe() const {
    std::ostringstream os;
    switch (shape_) {
        case Shape::indicator:
            os << "indicator[" << center_ - width_ << "," << center_ + width_ << "]";
            break;
        case Shape::triangle:
            os << "triangle(center=" << center_ << ",half_width=" << width_ << ")";
            break;
        case Shape::truncated_gaussian:
            os << "truncated_gaussian(center=" << center_ << ",sigma=" << width_ << ",cutoff=" << cutoff_ << ")";
            break;
    }
    if (height_ != 1.0) os << "*" << height_;
    return os.str();
}

double path_integral(const SamplePath& path, const TestFunction& f, double u, double kappa, double y) {
    if (!(u >= 0.0)) throw std::invalid_argument("integration length must be nonnegative");
    const double t_end = path.grid.t0 + u;
    if (t_end > path.grid.end() * (1.0 + 1e-12) + 1e-300) throw std::invalid_argument("integration beyond the path");
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.grid.n; ++k) {
        const double s0 = path.grid.at(k);
        if (s0 >= t_end) break;
        double len = path.grid.dt, z0 = kappa * (path.values[k] - y), z1 = kappa * (path.values[k + 1] - y);
        if (s0 + len > t_end) {
            const double frac = (t_end - s0) / len;
            z1 = z0 + frac * (z1 - z0);
            len = t_end - s0;
        }
        if (std::abs(z1 - z0) > 1e-12 * std::max(1.0, std::abs(z0)))
            total += len * (f.antiderivative(z1) - f.antiderivative(z0)) / (z1 - z0);
        else
            total += len * f(0.5 * (z0 + z1));
    }
    return total;
}

std::vector<double> occupation_functional(const TestFunction& f, const hurst::HurstFunction& h, double t0, double rho,
                                          double lambda, double t, std::uint64_t seed, const FunctionalOptions& opt) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("lambda must be at least 1");
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    if (f.integral() == 0.0) throw std::invalid_argument("test function must have nonzero integral");
    const double span = lambda * t;
    const double horizon = opt.horizon > 0.0 ? opt.horizon : span;
    if (span > horizon * (1.0 + 1e-12)) throw std::invalid_argument("lambda t exceeds the rescaled horizon");
    RescaledGenerator gen(h, t0, rho, horizon, opt.window);
    const double norm = std::pow(lambda, 1.0 - gen.h0());
    std::vector<double> out;
    for (std::size_t r = 0; r < opt.replicas; ++r) out.push_back(path_integral(gen.generate(split_seed(seed, r)), f, span) / norm);
    return out;
}

std::vector<double> weighted_occupation_functional(const TestFunction& f, const hurst::HurstFunction& h, double t0,
                                                   double rho, double y, const ScalingPair& scaling, double t,
                                                   std::uint64_t seed, const FunctionalOptions& opt, double xi) {
    const double h0 = h(t0);
    scaling.validate(h0);
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    const double horizon = opt.horizon > 0.0 ? opt.horizon : t;
    if (t > horizon * (1.0 + 1e-12)) throw std::invalid_argument("t exceeds the rescaled horizon");
    const double sup = h.sup_inf(0.0, t0 + rho * horizon).sup;
    const double bound = 1.0 / (2.0 * sup) - 0.5;
    if (xi == 0.0) xi = 0.5 * bound;
    if (!(xi > 0.0 && xi < bound)) throw std::invalid_argument("xi must lie in (0, 1/(2 sup H) - 1/2)");
    if (!std::isfinite(f.abs_moment(xi))) throw std::invalid_argument("test function fails the xi moment condition");
    RescaledGenerator gen(h, t0, rho, horizon, opt.window);
    const double kappa = std::pow(rho, h0) / scaling.theta(rho);
    const double factor = rho / scaling.psi(rho);
    std::vector<double> out;
    for (std::size_t r = 0; r < opt.replicas; ++r)
        out.push_back(factor * path_integral(gen.generate(split_seed(seed, r)), f, t, kappa, y));
    return out;
}

std::vector<double> limit_reference(const TestFunction& f, double h0, double t, double y, std::size_t replicas,
                                    std::uint64_t seed, std::size_t grid_n, double scale) {
    const std::size_t n = steps_for(t, grid_n);
    synth::FbmSynthesizer gen(h0, TimeGrid{0.0, t / static_cast<double>(n), n + 1});
    const double mass = f.integral();
    const std::uint64_t master = splitmix64(seed ^ kReferenceStream);
    std::vector<double> out;
    for (std::size_t r = 0; r < replicas; ++r) {
        auto p = gen.generate(split_seed(master, r));
        for (double& v : p.values) v *= scale;
        const std::size_t rows[] = {n};
        out.push_back(mass * column_at(p, y, h0, rows)[0]);
    }
    return out;
}

}  // namespace mbm::lass
