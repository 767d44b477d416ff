#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "../fft.hpp"
#include "mbm/random.hpp"
#include "mbm/synth.hpp"

namespace mbm::synth {

namespace {

constexpr std::size_t kCholeskyCap = std::size_t{1} << 12;

double fgn_autocov(double H, double k) {
    double e = 2.0 * H;
    return 0.5 * (std::pow(std::abs(k + 1.0), e) - 2.0 * std::pow(std::abs(k), e) + std::pow(std::abs(k - 1.0), e));
}

}  // namespace

struct FbmSynthesizer::Impl {
    // circulant state
    std::size_t size = 0;
    std::vector<double> sqrt_eig;
    detail::FftwBuffer<fftw_complex> buf;
    detail::FftwPlan plan;
    // cholesky state
    Eigen::MatrixXd lower;
};

FbmSynthesizer::FbmSynthesizer(double hurst, TimeGrid grid, FbmMethod method)
    : hurst_(hurst), grid_(grid), method_(method), impl_(std::make_unique<Impl>()) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("fbm hurst index must lie in (0,1)");
    grid_.validate();
    const std::size_t m = grid_.n - 1;

    if (method_ == FbmMethod::circulant) {
        bool ok = false;
        for (std::size_t half = std::max<std::size_t>(detail::fft_size(m), 1), attempt = 0; attempt < 4;
             ++attempt, half *= 2) {
            const std::size_t N = 2 * half;
            detail::FftwBuffer<double> c(N);
            detail::FftwBuffer<fftw_complex> spec(N / 2 + 1);
            for (std::size_t j = 0; j <= half; ++j) c[j] = fgn_autocov(hurst_, static_cast<double>(j));
            for (std::size_t j = half + 1; j < N; ++j) c[j] = c[N - j];
            detail::FftwPlan p(fftw_plan_dft_r2c_1d(static_cast<int>(N), c.data(), spec.data(), FFTW_ESTIMATE));
            p.execute();
            double lmax = 0.0, lmin = 0.0;
            for (std::size_t k = 0; k <= N / 2; ++k) {
                lmax = std::max(lmax, spec[k][0]);
                lmin = std::min(lmin, spec[k][0]);
            }
            if (lmin < -1e-10 * lmax) continue;
            impl_->size = N;
            impl_->sqrt_eig.resize(N);
            for (std::size_t k = 0; k < N; ++k) {
                double lam = spec[k <= N / 2 ? k : N - k][0];
                impl_->sqrt_eig[k] = std::sqrt(std::max(lam, 0.0) / static_cast<double>(N));
            }
            impl_->buf = detail::FftwBuffer<fftw_complex>(N);
            impl_->plan = detail::FftwPlan(fftw_plan_dft_1d(static_cast<int>(N), impl_->buf.data(),
                                                            impl_->buf.data(), FFTW_FORWARD, FFTW_ESTIMATE));
            ok = true;
            break;
        }
        if (!ok) {
            if (grid_.n > kCholeskyCap)
                throw SynthesisError("circulant embedding not nonnegative definite and grid too large for Cholesky");
            method_ = FbmMethod::cholesky;
        }
    }

    if (method_ == FbmMethod::cholesky) {
        if (grid_.n > kCholeskyCap + 1) throw SynthesisError("Cholesky fBm synthesis is capped at 4096 points");
        Eigen::MatrixXd cov(m, m);
        const double e = 2.0 * hurst_;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double ti = static_cast<double>(i + 1), tj = static_cast<double>(j + 1);
                cov(i, j) = cov(j, i) =
                    0.5 * (std::pow(ti, e) + std::pow(tj, e) - std::pow(std::abs(ti - tj), e));
            }
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            std::ostringstream os;
            os << "Cholesky failed for fBm covariance: n=" << m << " H=" << hurst_
               << " min diagonal=" << cov.diagonal().minCoeff();
            throw SynthesisError(os.str());
        }
        impl_->lower = llt.matrixL();
    }
}

FbmSynthesizer::~FbmSynthesizer() = default;
FbmSynthesizer::FbmSynthesizer(FbmSynthesizer&&) noexcept = default;
FbmSynthesizer& FbmSynthesizer::operator=(FbmSynthesizer&&) noexcept = default;

void FbmSynthesizer::generate_into(std::uint64_t seed, std::span<double> out) {
    if (out.size() != grid_.n) throw std::invalid_argument("output span does not match grid");
    Rng rng(seed);
    const std::size_t m = grid_.n - 1;
    const double scale = std::pow(grid_.dt, hurst_);
    out[0] = 0.0;
    if (method_ == FbmMethod::circulant) {
        auto& buf = impl_->buf;
        for (std::size_t k = 0; k < impl_->size; ++k) {
            buf[k][0] = impl_->sqrt_eig[k] * rng.gaussian();
            buf[k][1] = impl_->sqrt_eig[k] * rng.gaussian();
        }
        impl_->plan.execute();
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            acc += buf[k][0];
            out[k + 1] = acc * scale;
        }
    } else {
        Eigen::VectorXd z(m);
        for (std::size_t k = 0; k < m; ++k) z[k] = rng.gaussian();
        Eigen::VectorXd x = impl_->lower.triangularView<Eigen::Lower>() * z;
        for (std::size_t k = 0; k < m; ++k) out[k + 1] = x[k] * scale;
    }
}

SamplePath FbmSynthesizer::generate(std::uint64_t seed) {
    SamplePath p;
    p.grid = grid_;
    p.values.resize(grid_.n);
    generate_into(seed, p.values);
    p.meta.representation = Representation::fbm_exact;
    p.meta.seed = seed;
    p.meta.hurst_at_start = hurst_;
    p.meta.relative_to_start = grid_.t0 != 0.0;
    return p;
}

SamplePath gen_fbm(double hurst, const TimeGrid& grid, std::uint64_t seed, FbmMethod method) {
    FbmSynthesizer s(hurst, grid, method);
    return s.generate(seed);
}

}  // namespace mbm::synth
