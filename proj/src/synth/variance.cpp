#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mbm/numerics.hpp"
#include "mbm/synth.hpp"

namespace mbm::synth {

namespace {

double power_diff(double x, double w, double beta) {
    if (x <= 0.0) return std::pow(w, beta);
    return std::pow(x, beta) * std::expm1(beta * std::log1p(w / x));
}

// integral over [a, b] split into q equal panels
numerics::QuadResult panels(const std::function<double(double)>& f, double a, double b, std::size_t q) {
    numerics::QuadResult total;
    for (std::size_t i = 0; i < q; ++i) {
        double lo = a + (b - a) * static_cast<double>(i) / static_cast<double>(q);
        double hi = i + 1 == q ? b : a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(q);
        auto r = numerics::integrate(f, lo, hi, 1e-11, 1e-300);
        total.value += r.value;
        total.abs_error += r.abs_error;
    }
    return total;
}

VarianceResult kernel_variance(const hurst::HurstFunction& h, double s, double t, const KernelQuadrature& kq,
                               bool moving_average) {
    const double Ht = h(t), Hs = h(s);
    const double at = Ht - 0.5, as = Hs - 0.5;
    const double gt = std::tgamma(Ht + 0.5), gs = std::tgamma(Hs + 0.5);
    VarianceResult res;
    res.value = std::pow(t - s, 2.0 * Ht) / (2.0 * Ht * gt * gt);
    const std::size_t q = kq.substeps;

    if (s > 0.0) {
        auto f = [&](double u) {
            double d = std::pow(t - u, at) / gt - std::pow(s - u, as) / gs;
            return d * d;
        };
        auto r = panels(f, 0.0, s, q);
        res.value += r.value;
        res.quadrature_error += r.abs_error;
    }
    if (moving_average) {
        // v = -u in [0, T]
        auto f = [&](double v) {
            double kt = power_diff(v, t, at) / gt;
            double ks = s > 0.0 ? power_diff(v, s, as) / gs : 0.0;
            double d = kt - ks;
            return d * d;
        };
        const double T = kq.t_past;
        double lo = 0.0, hi = std::min(T, t);
        while (lo < T) {
            auto r = panels(f, lo, hi, q);
            res.value += r.value;
            res.quadrature_error += r.abs_error;
            lo = hi;
            hi = std::min(T, hi * 10.0);
        }
        res.truncation_bound = moving_average_tail_bound(h, s, t, T);
    }
    return res;
}

VarianceResult spectral_variance(const hurst::HurstFunction& h, double s, double t) {
    const double Ht = h(t), Hs = h(s);
    VarianceResult res;
    if (s == 0.0) {
        res.value = harmonizable_unit_variance(Ht) * std::pow(t, 2.0 * Ht);
        return res;
    }
    if (Ht == Hs) {
        res.value = harmonizable_unit_variance(Ht) * std::pow(t - s, 2.0 * Ht);
        return res;
    }
    // |(e^{it x}-1) x^{-Ht-1/2} - (e^{is x}-1) x^{-Hs-1/2}|^2 integrated over the real line
    const double pt = -2.0 * Ht - 1.0, ps = -2.0 * Hs - 1.0, pc = -Ht - Hs - 1.0;
    auto f = [&](double x) {
        double ct = std::cos(t * x), cs = std::cos(s * x), cd = std::cos((t - s) * x);
        return 2.0 * std::pow(x, pt) * (1.0 - ct) + 2.0 * std::pow(x, ps) * (1.0 - cs) -
               2.0 * std::pow(x, pc) * (cd - ct - cs + 1.0);
    };
    const double X = 50.0 / (t - s);
    double head = 0.0, err = 0.0;
    double lo = 0.0;
    for (double hi = std::min(X, 1.0 / t); lo < X; hi = std::min(X, hi * 4.0)) {
        auto r = numerics::integrate(f, lo, hi, 1e-11, 1e-300);
        head += r.value;
        err += r.abs_error;
        lo = hi;
    }
    double tail = 2.0 * std::pow(X, pt + 1.0) / (-pt - 1.0) + 2.0 * std::pow(X, ps + 1.0) / (-ps - 1.0) -
                  2.0 * std::pow(X, pc + 1.0) / (-pc - 1.0);
    auto pw = [](double p) { return [p](double x) { return std::pow(x, p); }; };
    tail += -2.0 * numerics::integrate_cosine_tail(pw(pt), X, t).value;
    tail += -2.0 * numerics::integrate_cosine_tail(pw(ps), X, s).value;
    tail += -2.0 * numerics::integrate_cosine_tail(pw(pc), X, t - s).value;
    tail += 2.0 * numerics::integrate_cosine_tail(pw(pc), X, t).value;
    tail += 2.0 * numerics::integrate_cosine_tail(pw(pc), X, s).value;
    res.value = 2.0 * (head + tail);
    res.quadrature_error = 2.0 * err;
    return res;
}

}  // namespace

double moving_average_unit_variance(double H) {
    if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("hurst index must lie in (0,1)");
    const double a = H - 0.5;
    double integral = 0.0;
    if (a != 0.0) {
        auto f = [a](double v) {
            double d = power_diff(v, 1.0, a);
            return d * d;
        };
        integral = numerics::integrate(f, 0.0, 1.0, 1e-12, 1e-300).value +
                   numerics::integrate_upper(f, 1.0, 1e-12, 1e-300).value;
    }
    const double g = std::tgamma(H + 0.5);
    return (integral + 1.0 / (2.0 * H)) / (g * g);
}

double harmonizable_unit_variance(double H) {
    if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("hurst index must lie in (0,1)");
    return std::numbers::pi / (H * std::tgamma(2.0 * H) * std::sin(std::numbers::pi * H));
}

double moving_average_tail_bound(const hurst::HurstFunction& h, double s, double t, double t_past) {
    double total = 0.0;
    int terms = 0;
    for (double r : {s, t}) {
        if (r <= 0.0) continue;
        const double H = h(r);
        const double A = std::abs(H - 0.5) * r / std::tgamma(H + 0.5);
        total += A * A * std::pow(t_past, 2.0 * H - 2.0) / (2.0 - 2.0 * H);
        ++terms;
    }
    return terms == 2 ? 2.0 * total : total;
}

double gamma_sup(double mu, double nu) {
    return std::max(std::tgamma(0.5 + mu), std::tgamma(0.5 + nu));
}

VarianceResult increment_variance(const hurst::HurstFunction& h, double s, double t, const KernelQuadrature& kq,
                                  Representation rep) {
    if (!(s >= 0.0) || !(t > s)) throw std::invalid_argument("increment_variance needs 0 <= s < t");
    kq.validate();
    switch (rep) {
        case Representation::moving_average: return kernel_variance(h, s, t, kq, true);
        case Representation::riemann_liouville: return kernel_variance(h, s, t, kq, false);
        case Representation::harmonizable: return spectral_variance(h, s, t);
        case Representation::fbm_exact: {
            if (!h.is_constant()) throw std::invalid_argument("fbm-exact needs a constant hurst function");
            return VarianceResult{std::pow(t - s, 2.0 * h(t)), 0.0, 0.0};
        }
    }
    throw std::invalid_argument("unsupported representation");
}

double increment_variance_exact(const hurst::HurstFunction& h, double s, double t, const KernelQuadrature& kq,
                                Representation rep) {
    return increment_variance(h, s, t, kq, rep).value;
}

std::vector<double> increment_covariance(const hurst::HurstFunction& h, std::span<const double> points,
                                         const KernelQuadrature& kq, Representation rep) {
    if (points.size() < 2) throw std::invalid_argument("increment_covariance needs t and at least one s");
    const std::size_t m = points.size() - 1;
    auto V = [&](double x, double y) {
        if (x == y) return 0.0;
        if (x > y) std::swap(x, y);
        return increment_variance_exact(h, x, y, kq, rep);
    };
    std::vector<double> base(m);
    for (std::size_t i = 0; i < m; ++i) base[i] = V(points[0], points[i + 1]);
    std::vector<double> cov(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            double c = i == j ? base[i] : 0.5 * (base[i] + base[j] - V(points[i + 1], points[j + 1]));
            cov[i * m + j] = cov[j * m + i] = c;
        }
    return cov;
}

BoundReport verify_variance_bounds(const hurst::HurstFunction& h, double a, double b, std::size_t n_pairs,
                                   const KernelQuadrature& kq, std::uint64_t seed, Representation rep,
                                   std::size_t n_tuples) {
    if (!(a >= 0.0) || !(b > a)) throw std::invalid_argument("verify_variance_bounds needs 0 <= a < b");
    BoundReport rep_out;
    // both bounds are equalities for Brownian motion
    constexpr double rounding_guard = 1e-12;
    const double nu = h.nu();
    const double C = gamma_sup(h.mu(), h.nu());
    const double denom = 2.0 * nu * C * C;
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> U(a, b);

    rep_out.min_lower_margin = 1e300;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        double s = U(eng), t = U(eng);
        if (s > t) std::swap(s, t);
        if (t - s < 1e-9) {
            --i;
            continue;
        }
        PairRecord r;
        r.s = s;
        r.t = t;
        r.variance = increment_variance_exact(h, s, t, kq, rep);
        const double scale = std::pow(t - s, 2.0 * h(t));
        r.lower_bound = scale / denom;
        r.upper_ratio = r.variance / scale;
        if (r.variance < r.lower_bound * (1.0 - rounding_guard)) ++rep_out.lower_violations;
        rep_out.min_lower_margin = std::min(rep_out.min_lower_margin, r.variance / r.lower_bound);
        rep_out.pairs.push_back(r);
    }
    const std::size_t half = rep_out.pairs.size() / 2;
    for (std::size_t i = 0; i < rep_out.pairs.size(); ++i) {
        double u = rep_out.pairs[i].upper_ratio;
        rep_out.fitted_upper_constant = std::max(rep_out.fitted_upper_constant, u);
        (i < half ? rep_out.fitted_upper_first_half : rep_out.fitted_upper_second_half) =
            std::max(i < half ? rep_out.fitted_upper_first_half : rep_out.fitted_upper_second_half, u);
    }
    {
        double lo = std::min(rep_out.fitted_upper_first_half, rep_out.fitted_upper_second_half);
        double hi = std::max(rep_out.fitted_upper_first_half, rep_out.fitted_upper_second_half);
        rep_out.upper_stable = std::isfinite(hi) && lo > 0.0 && hi / lo <= 1.5;
    }

    rep_out.min_determinant_margin = 1e300;
    const double span = 0.5 * (b - a);
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    for (std::size_t m : {std::size_t{2}, std::size_t{3}}) {
        for (std::size_t k = 0; k < n_tuples; ++k) {
            DeterminantRecord d;
            const double t = a + span * U01(eng);
            std::vector<double> s(m);
            for (double& x : s) x = t + span * U01(eng);
            std::sort(s.begin(), s.end());
            bool degenerate = s.front() - t < 1e-6;
            for (std::size_t j = 1; j < m; ++j) degenerate = degenerate || s[j] - s[j - 1] < 1e-6;
            if (degenerate) {
                --k;
                continue;
            }
            d.points.push_back(t);
            d.points.insert(d.points.end(), s.begin(), s.end());
            const double Hsup = h.sup_inf(t, t + span).sup;
            auto cov = increment_covariance(h, d.points, kq, rep);
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> R(cov.data(), m, m);
            d.determinant = R.determinant();
            double bound = 1.0;
            for (std::size_t j = 0; j < m; ++j) bound *= std::pow(d.points[j + 1] - d.points[j], 2.0 * Hsup) / denom;
            d.bound = bound;
            if (!(d.determinant >= d.bound * (1.0 - rounding_guard))) ++rep_out.determinant_violations;
            rep_out.min_determinant_margin = std::min(rep_out.min_determinant_margin, d.determinant / d.bound);
            rep_out.tuples.push_back(std::move(d));
        }
    }
    return rep_out;
}

}  // namespace mbm::synth
