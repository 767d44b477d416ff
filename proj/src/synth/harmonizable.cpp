#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mbm/random.hpp"
#include "mbm/synth.hpp"

namespace mbm::synth {

namespace {

constexpr double kMatrixBudget = double(1 << 24);
constexpr std::size_t kBatch = 64;

}  // namespace

void SpectralQuadrature::validate() const {
    if (!(omega_max > 0.0) || !std::isfinite(omega_max)) throw std::invalid_argument("omega_max must be positive");
    if (n_freq < 2) throw std::invalid_argument("n_freq must be >= 2");
}

struct HarmonizableSynthesizer::Impl {
    hurst::HurstFunction h;
    std::vector<double> freq;   // cell representative frequencies
    std::vector<double> width;  // cell widths
    std::vector<double> point_h;
    bool stored = false;
    Eigen::MatrixXd coef;  // n x 2F

    explicit Impl(const hurst::HurstFunction& hf) : h(hf) {}

    void fill_row(double t, double H, double* row) const {
        const std::size_t F = freq.size();
        for (std::size_t j = 0; j < F; ++j) {
            const double amp = std::sqrt(2.0 * width[j]) * std::pow(freq[j], -H - 0.5);
            const double x = t * freq[j];
            row[j] = amp * (std::cos(x) - 1.0);
            row[F + j] = -amp * std::sin(x);
        }
    }
};

HarmonizableSynthesizer::HarmonizableSynthesizer(const hurst::HurstFunction& h, TimeGrid grid,
                                                 SpectralQuadrature sq)
    : grid_(grid), impl_(std::make_unique<Impl>(h)) {
    grid_.validate();
    sq.validate();
    if (grid_.t0 < 0.0) throw std::invalid_argument("grid must start at t >= 0");
    auto& I = *impl_;
    const std::size_t F = sq.n_freq;
    const double omega = sq.omega_max;
    const double knee = std::min(1.0, omega / 4.0);
    const double low = 1e-4 * knee / std::max(1.0, grid_.end());
    const std::size_t n_log = std::max<std::size_t>(1, F / 4);
    const std::size_t n_lin = F - n_log;
    const double r = std::log(knee / low) / static_cast<double>(n_log);
    for (std::size_t j = 0; j < n_log; ++j) {
        double a = low * std::exp(r * static_cast<double>(j));
        double b = low * std::exp(r * static_cast<double>(j + 1));
        I.freq.push_back(std::sqrt(a * b));
        I.width.push_back(b - a);
    }
    if (n_lin > 0) {
        const double step = (omega - knee) / static_cast<double>(n_lin);
        for (std::size_t j = 0; j < n_lin; ++j) {
            I.freq.push_back(knee + (static_cast<double>(j) + 0.5) * step);
            I.width.push_back(step);
        }
    }
    const std::size_t n = grid_.n;
    for (std::size_t k = 0; k < n; ++k) I.point_h.push_back(h(grid_.at(k)));

    if (static_cast<double>(n) * 2.0 * static_cast<double>(F) <= kMatrixBudget) {
        I.stored = true;
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(n, 2 * F);
        for (std::size_t k = 0; k < n; ++k) I.fill_row(grid_.at(k), I.point_h[k], m.row(k).data());
        I.coef = m;
    }

    const double h_lo = h.sup_inf(grid_.t0, std::max(grid_.end(), grid_.t0 + 1e-300)).inf;
    tail_bound_ = 2.0 * std::pow(omega, -2.0 * h_lo) / h_lo;
    const double t_end = grid_.end();
    const double var = harmonizable_unit_variance(h(t_end)) * std::pow(t_end, 2.0 * h(t_end));
    meta_.representation = Representation::harmonizable;
    meta_.hurst_at_start = h(grid_.t0);
    meta_.omega_max = omega;
    meta_.n_freq = F;
    if (t_end > 0.0 && tail_bound_ > 1e-3 * var) {
        std::ostringstream os;
        os << "spectral tail beyond omega_max=" << omega << " estimated at " << tail_bound_
           << ", above 1e-3 of Var(B(" << t_end << "))=" << var;
        meta_.warnings.push_back(os.str());
    }
}

HarmonizableSynthesizer::~HarmonizableSynthesizer() = default;
HarmonizableSynthesizer::HarmonizableSynthesizer(HarmonizableSynthesizer&&) noexcept = default;
HarmonizableSynthesizer& HarmonizableSynthesizer::operator=(HarmonizableSynthesizer&&) noexcept = default;

const std::vector<double>& HarmonizableSynthesizer::frequencies() const { return impl_->freq; }

std::vector<double> HarmonizableSynthesizer::discrete_variance() const {
    const auto& I = *impl_;
    std::vector<double> out(grid_.n);
    std::vector<double> row(2 * I.freq.size());
    for (std::size_t k = 0; k < grid_.n; ++k) {
        I.fill_row(grid_.at(k), I.point_h[k], row.data());
        double s = 0.0;
        for (double v : row) s += v * v;
        out[k] = s;
    }
    return out;
}

std::vector<SamplePath> HarmonizableSynthesizer::generate_batch(std::span<const std::uint64_t> seeds) {
    auto& I = *impl_;
    const std::size_t n = grid_.n;
    const std::size_t F2 = 2 * I.freq.size();
    std::vector<SamplePath> out;
    out.reserve(seeds.size());
    std::vector<double> row(I.stored ? 0 : F2);
    for (std::size_t start = 0; start < seeds.size(); start += kBatch) {
        const std::size_t R = std::min(kBatch, seeds.size() - start);
        Eigen::MatrixXd Z(F2, R);
        for (std::size_t r = 0; r < R; ++r) {
            Rng rng(seeds[start + r]);
            for (std::size_t j = 0; j < F2; ++j) Z(j, r) = rng.gaussian();
        }
        Eigen::MatrixXd X(n, R);
        if (I.stored) {
            X.noalias() = I.coef * Z;
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                I.fill_row(grid_.at(k), I.point_h[k], row.data());
                Eigen::Map<const Eigen::RowVectorXd> rv(row.data(), F2);
                X.row(k) = rv * Z;
            }
        }
        for (std::size_t r = 0; r < R; ++r) {
            SamplePath p;
            p.grid = grid_;
            p.values.resize(n);
            for (std::size_t k = 0; k < n; ++k) p.values[k] = X(k, r);
            p.meta = meta_;
            p.meta.seed = seeds[start + r];
            out.push_back(std::move(p));
        }
    }
    return out;
}

SamplePath HarmonizableSynthesizer::generate(std::uint64_t seed) {
    std::uint64_t s[1] = {seed};
    return std::move(generate_batch(s).front());
}

SamplePath gen_mbm_harmonizable(const hurst::HurstFunction& h, const TimeGrid& grid, std::uint64_t seed,
                                double omega_max, std::size_t n_freq) {
    HarmonizableSynthesizer s(h, grid, SpectralQuadrature{omega_max, n_freq});
    return s.generate(seed);
}

}  // namespace mbm::synth
