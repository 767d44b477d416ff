#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "../fft.hpp"
#include "mbm/numerics.hpp"
#include "mbm/random.hpp"
#include "mbm/synth.hpp"

namespace mbm::synth {

namespace {

// (x + w)^beta - x^beta without cancellation, x >= 0, w > 0
double power_step(double x, double w, double beta) {
    if (x <= 0.0) return std::pow(w, beta);
    return std::pow(x, beta) * std::expm1(beta * std::log1p(w / x));
}

constexpr double kFarGrowth = 0.1;
constexpr double kLeadFraction = 0.5;
constexpr std::size_t kChebyshevNodes = 20;
constexpr std::size_t kDirectFarPoints = 32;

std::size_t level_count(double lo, double hi) {
    if (hi - lo <= 1e-14) return 1;
    double half = 0.5 * (hi - lo);
    return std::clamp<std::size_t>(6 + static_cast<std::size_t>(std::ceil(55.0 * half)), 6, 24);
}

}  // namespace

void KernelQuadrature::validate() const {
    if (!(t_past > 0.0) || !std::isfinite(t_past)) throw std::invalid_argument("T_past must be positive");
    if (substeps < 1) throw std::invalid_argument("quadrature substeps q must be >= 1");
}

struct KernelSynthesizer::Impl {
    hurst::HurstFunction h;
    Representation rep;
    double eps = 0.0;
    std::size_t q = 1;
    std::size_t n_lead = 0, n_fwd = 0, n_near = 0;
    std::vector<NoiseCell> cells;  // draw order
    std::size_t n_far = 0;

    std::vector<double> level_h;
    std::vector<double> lagrange;  // n x P

    std::size_t fft_n = 0;
    std::vector<detail::FftwBuffer<fftw_complex>> g_hat;
    detail::FftwBuffer<double> z;
    detail::FftwBuffer<fftw_complex> z_hat, work;
    detail::FftwBuffer<double> conv;
    detail::FftwPlan forward, inverse;

    bool far_direct = true;
    std::size_t n_nodes = 0;
    std::vector<double> interp;                  // n x n_nodes
    std::vector<std::vector<double>> far_matrix;  // per level: n_nodes x n_far
    std::vector<std::size_t> close_cells;        // far indices treated point by point
    std::vector<std::vector<double>> close_coef;  // per level: close x n
    std::vector<std::size_t> neg_cells;           // cell indices (draw order) with u < 0
    std::vector<std::vector<double>> neg_coef;    // per level

    std::vector<double> xi, near_vals, far_vals;

    Impl(const hurst::HurstFunction& hf, Representation r) : h(hf), rep(r) {}

    double cell_positive(double t, const NoiseCell& c, double beta) const {
        if (c.a >= t) return 0.0;
        if (c.b <= t) return power_step(t - c.b, c.b - c.a, beta) / beta;
        return std::pow(t - c.a, beta) / beta;
    }
    double cell_negative(const NoiseCell& c, double beta) const {
        if (rep != Representation::moving_average || c.a >= 0.0) return 0.0;
        double top = std::min(c.b, 0.0);
        return power_step(-top, top - c.a, beta) / beta;
    }
    double coefficient(double t, const NoiseCell& c, double H) const {
        double beta = H + 0.5;
        double norm = std::tgamma(beta) * std::sqrt(c.b - c.a);
        return (cell_positive(t, c, beta) - cell_negative(c, beta)) / norm;
    }
};

KernelSynthesizer::KernelSynthesizer(const hurst::HurstFunction& h, TimeGrid grid, Representation rep,
                                     KernelQuadrature kq)
    : grid_(grid), impl_(std::make_unique<Impl>(h, rep)) {
    grid_.validate();
    kq.validate();
    if (rep != Representation::moving_average && rep != Representation::riemann_liouville)
        throw std::invalid_argument("kernel synthesizer supports moving-average and riemann-liouville only");
    if (grid_.t0 < 0.0) throw std::invalid_argument("grid must start at t >= 0");
    if (rep == Representation::moving_average && kq.t_past <= 0.0)
        throw std::invalid_argument("T_past must be positive");

    auto& I = *impl_;
    const std::size_t n = grid_.n;
    const double t0 = grid_.t0;
    const double W = grid_.length();
    I.q = kq.substeps;
    I.eps = grid_.dt / static_cast<double>(I.q);
    I.n_fwd = (n - 1) * I.q;
    I.n_lead = static_cast<std::size_t>(std::ceil(kLeadFraction * static_cast<double>(I.n_fwd) - 1e-9));
    const double lower = rep == Representation::moving_average ? -kq.t_past : 0.0;
    {
        double room = std::floor((t0 - lower) / I.eps + 1e-9);
        I.n_lead = std::min<std::size_t>(I.n_lead, static_cast<std::size_t>(std::max(room, 0.0)));
    }
    I.n_near = I.n_lead + I.n_fwd;
    const double a_near = t0 - static_cast<double>(I.n_lead) * I.eps;

    for (std::size_t f = 0; f < I.n_fwd; ++f)
        I.cells.push_back({t0 + static_cast<double>(f) * I.eps, t0 + static_cast<double>(f + 1) * I.eps});
    for (std::size_t l = 0; l < I.n_lead; ++l)
        I.cells.push_back({t0 - static_cast<double>(l + 1) * I.eps, t0 - static_cast<double>(l) * I.eps});
    {
        double b = a_near;
        const double tiny = 1e-12 * std::max(1.0, std::abs(lower));
        while (b - lower > tiny) {
            double w = std::max(I.eps, kFarGrowth * (t0 - b));
            if (b - w - lower < 0.5 * w) w = b - lower;
            I.cells.push_back({b - w, b});
            b -= w;
        }
    }
    I.n_far = I.cells.size() - I.n_near;

    // Hurst levels
    const hurst::Bracket br = I.h.sup_inf(t0, std::max(grid_.end(), t0 + 1e-300));
    const std::size_t P = level_count(br.inf, br.sup);
    I.level_h = P == 1 ? std::vector<double>{I.h(t0)} : numerics::chebyshev_nodes(P, br.inf, br.sup);
    I.lagrange.assign(n * P, 1.0);
    if (P > 1) {
        for (std::size_t k = 0; k < n; ++k)
            numerics::barycentric_weights(I.level_h, I.h(grid_.at(k)), std::span(I.lagrange).subspan(k * P, P));
    }

    // near field: Toeplitz coefficients in the lag, applied by FFT convolution
    I.fft_n = detail::fft_size(2 * std::max<std::size_t>(I.n_near, 1));
    const std::size_t nh = I.fft_n / 2 + 1;
    I.z = detail::FftwBuffer<double>(I.fft_n);
    I.conv = detail::FftwBuffer<double>(I.fft_n);
    I.z_hat = detail::FftwBuffer<fftw_complex>(nh);
    I.work = detail::FftwBuffer<fftw_complex>(nh);
    I.forward = detail::FftwPlan(
        fftw_plan_dft_r2c_1d(static_cast<int>(I.fft_n), I.z.data(), I.z_hat.data(), FFTW_ESTIMATE));
    I.inverse = detail::FftwPlan(
        fftw_plan_dft_c2r_1d(static_cast<int>(I.fft_n), I.work.data(), I.conv.data(), FFTW_ESTIMATE));
    for (std::size_t p = 0; p < P; ++p) {
        const double beta = I.level_h[p] + 0.5;
        const double scale = std::pow(I.eps, beta - 0.5) / (beta * std::tgamma(beta)) / static_cast<double>(I.fft_n);
        for (std::size_t m = 0; m < I.fft_n; ++m)
            I.z[m] = m < I.n_near ? scale * power_step(static_cast<double>(m), 1.0, beta) : 0.0;
        I.forward.execute();
        detail::FftwBuffer<fftw_complex> gh(nh);
        std::memcpy(gh.data(), I.z_hat.data(), sizeof(fftw_complex) * nh);
        I.g_hat.push_back(std::move(gh));
    }

    // far field: exact at Chebyshev nodes in t, interpolated to the grid
    I.far_direct = n <= kDirectFarPoints;
    std::vector<double> nodes;
    if (I.far_direct) {
        for (std::size_t k = 0; k < n; ++k) nodes.push_back(grid_.at(k));
    } else {
        nodes = numerics::chebyshev_nodes(kChebyshevNodes, t0, grid_.end());
        I.interp.resize(n * nodes.size());
        for (std::size_t k = 0; k < n; ++k)
            numerics::barycentric_weights(nodes, grid_.at(k),
                                          std::span(I.interp).subspan(k * nodes.size(), nodes.size()));
    }
    I.n_nodes = nodes.size();
    std::vector<std::size_t> smooth_far;
    for (std::size_t j = 0; j < I.n_far; ++j) {
        const NoiseCell& c = I.cells[I.n_near + j];
        if (!I.far_direct && t0 - c.b < 0.5 * kLeadFraction * W)
            I.close_cells.push_back(j);
        else
            smooth_far.push_back(j);
    }
    I.far_matrix.assign(P, std::vector<double>(I.n_nodes * I.n_far, 0.0));
    I.close_coef.assign(P, std::vector<double>(I.close_cells.size() * n, 0.0));
    for (std::size_t p = 0; p < P; ++p) {
        const double beta = I.level_h[p] + 0.5;
        const double g = std::tgamma(beta);
        for (std::size_t j : smooth_far) {
            const NoiseCell& c = I.cells[I.n_near + j];
            const double norm = g * std::sqrt(c.b - c.a);
            for (std::size_t i = 0; i < I.n_nodes; ++i)
                I.far_matrix[p][i * I.n_far + j] = I.cell_positive(nodes[i], c, beta) / norm;
        }
        for (std::size_t ci = 0; ci < I.close_cells.size(); ++ci) {
            const NoiseCell& c = I.cells[I.n_near + I.close_cells[ci]];
            const double norm = g * std::sqrt(c.b - c.a);
            for (std::size_t k = 0; k < n; ++k)
                I.close_coef[p][ci * n + k] = I.cell_positive(grid_.at(k), c, beta) / norm;
        }
    }

    // (-u)_+ part of the moving-average kernel, one constant per level
    if (rep == Representation::moving_average) {
        for (std::size_t c = 0; c < I.cells.size(); ++c)
            if (I.cells[c].a < 0.0) I.neg_cells.push_back(c);
        I.neg_coef.assign(P, std::vector<double>(I.neg_cells.size()));
        for (std::size_t p = 0; p < P; ++p) {
            const double beta = I.level_h[p] + 0.5;
            const double g = std::tgamma(beta);
            for (std::size_t i = 0; i < I.neg_cells.size(); ++i) {
                const NoiseCell& c = I.cells[I.neg_cells[i]];
                I.neg_coef[p][i] = I.cell_negative(c, beta) / (g * std::sqrt(c.b - c.a));
            }
        }
    }

    I.xi.resize(I.cells.size());
    I.near_vals.resize(n);
    I.far_vals.resize(I.n_nodes);

    meta_.representation = rep;
    meta_.hurst_at_start = I.h(t0);
    meta_.t_past = rep == Representation::moving_average ? kq.t_past : 0.0;
    meta_.substeps = I.q;
    if (rep == Representation::moving_average) {
        const double t_end = grid_.end();
        tail_bound_ = moving_average_tail_bound(I.h, 0.0, t_end, kq.t_past);
        const double H_end = I.h(t_end);
        const double var = moving_average_unit_variance(H_end) * std::pow(t_end, 2.0 * H_end);
        if (t_end > 0.0 && tail_bound_ > 1e-3 * var) {
            std::ostringstream os;
            os << "T_past=" << kq.t_past << " truncation bound " << tail_bound_ << " exceeds 1e-3 of Var(B("
               << t_end << "))=" << var;
            meta_.warnings.push_back(os.str());
        }
    }
}

KernelSynthesizer::~KernelSynthesizer() = default;
KernelSynthesizer::KernelSynthesizer(KernelSynthesizer&&) noexcept = default;
KernelSynthesizer& KernelSynthesizer::operator=(KernelSynthesizer&&) noexcept = default;

std::size_t KernelSynthesizer::levels() const { return impl_->level_h.size(); }
std::size_t KernelSynthesizer::cell_count() const { return impl_->cells.size(); }
const std::vector<NoiseCell>& KernelSynthesizer::cells() const { return impl_->cells; }

void KernelSynthesizer::generate_into(std::uint64_t seed, std::span<double> out) {
    auto& I = *impl_;
    const std::size_t n = grid_.n;
    if (out.size() != n) throw std::invalid_argument("output span does not match grid");
    Rng rng(seed);
    rng.fill_gaussian(I.xi);

    std::fill(I.z.data(), I.z.data() + I.fft_n, 0.0);
    for (std::size_t f = 0; f < I.n_fwd; ++f) I.z[I.n_lead + f] = I.xi[f];
    for (std::size_t l = 0; l < I.n_lead; ++l) I.z[I.n_lead - 1 - l] = I.xi[I.n_fwd + l];
    I.forward.execute();

    const std::size_t P = I.level_h.size();
    const std::size_t nh = I.fft_n / 2 + 1;
    const double* xi_far = I.xi.data() + I.n_near;
    std::fill(out.begin(), out.end(), 0.0);

    for (std::size_t p = 0; p < P; ++p) {
        const auto& gh = I.g_hat[p];
        for (std::size_t k = 0; k < nh; ++k) {
            const double ar = I.z_hat[k][0], ai = I.z_hat[k][1];
            const double br = gh[k][0], bi = gh[k][1];
            I.work[k][0] = ar * br - ai * bi;
            I.work[k][1] = ar * bi + ai * br;
        }
        I.inverse.execute();
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t idx = I.n_lead + k * I.q;
            I.near_vals[k] = idx >= 1 ? I.conv[idx - 1] : 0.0;
        }

        // far contributions at the nodes
        const auto& F = I.far_matrix[p];
        for (std::size_t i = 0; i < I.n_nodes; ++i) {
            double s = 0.0;
            const double* row = F.data() + i * I.n_far;
            for (std::size_t j = 0; j < I.n_far; ++j) s += row[j] * xi_far[j];
            I.far_vals[i] = s;
        }
        double neg = 0.0;
        if (!I.neg_cells.empty())
            for (std::size_t i = 0; i < I.neg_cells.size(); ++i) neg += I.neg_coef[p][i] * I.xi[I.neg_cells[i]];

        for (std::size_t k = 0; k < n; ++k) {
            double far = 0.0;
            if (I.far_direct) {
                far = I.far_vals[k];
            } else {
                const double* w = I.interp.data() + k * I.n_nodes;
                for (std::size_t i = 0; i < I.n_nodes; ++i) far += w[i] * I.far_vals[i];
            }
            for (std::size_t ci = 0; ci < I.close_cells.size(); ++ci)
                far += I.close_coef[p][ci * n + k] * xi_far[I.close_cells[ci]];
            out[k] += I.lagrange[k * P + p] * (I.near_vals[k] + far - neg);
        }
    }
}

SamplePath KernelSynthesizer::generate(std::uint64_t seed) {
    SamplePath p;
    p.grid = grid_;
    p.values.resize(grid_.n);
    generate_into(seed, p.values);
    p.meta = meta_;
    p.meta.seed = seed;
    return p;
}

SamplePath KernelSynthesizer::generate_reference(std::uint64_t seed) const {
    const auto& I = *impl_;
    const std::size_t n = grid_.n;
    if (static_cast<double>(n) * static_cast<double>(I.cells.size()) > 5e7)
        throw std::invalid_argument("reference synthesis is limited to small grids");
    Rng rng(seed);
    std::vector<double> xi(I.cells.size());
    rng.fill_gaussian(xi);
    SamplePath p;
    p.grid = grid_;
    p.values.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = grid_.at(k);
        const double H = I.h(t);
        double s = 0.0;
        for (std::size_t c = 0; c < I.cells.size(); ++c) s += I.coefficient(t, I.cells[c], H) * xi[c];
        p.values[k] = s;
    }
    p.meta = meta_;
    p.meta.seed = seed;
    return p;
}

double KernelSynthesizer::discrete_increment_variance(std::size_t i, std::size_t j) const {
    const auto& I = *impl_;
    if (i >= grid_.n || j >= grid_.n) throw std::out_of_range("grid index out of range");
    const double ti = grid_.at(i), tj = grid_.at(j);
    const double Hi = I.h(ti), Hj = I.h(tj);
    double v = 0.0;
    for (const NoiseCell& c : I.cells) {
        double d = I.coefficient(tj, c, Hj) - I.coefficient(ti, c, Hi);
        v += d * d;
    }
    return v;
}

SamplePath gen_mbm_moving_average(const hurst::HurstFunction& h, const TimeGrid& grid, std::uint64_t seed,
                                  const KernelQuadrature& kq) {
    KernelSynthesizer s(h, grid, Representation::moving_average, kq);
    return s.generate(seed);
}

SamplePath gen_mbm_riemann_liouville(const hurst::HurstFunction& h, const TimeGrid& grid, std::uint64_t seed,
                                     std::size_t substeps) {
    KernelQuadrature kq;
    kq.substeps = substeps;
    KernelSynthesizer s(h, grid, Representation::riemann_liouville, kq);
    return s.generate(seed);
}

}  // namespace mbm::synth
