#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mbm/common.hpp"
#include "mbm/hurst.hpp"

namespace mbm::synth {

enum class FbmMethod { circulant, cholesky };

struct KernelQuadrature {
    double t_past = 100.0;
    std::size_t substeps = 2;

    void validate() const;
};

struct SpectralQuadrature {
    double omega_max = 1e3;
    std::size_t n_freq = std::size_t{1} << 14;

    void validate() const;
};

// Var of the moving-average field at t = 1 for constant H
double moving_average_unit_variance(double hurst);
// Var of the harmonizable field at t = 1 for constant H: pi / (H Gamma(2H) sin(pi H))
double harmonizable_unit_variance(double hurst);
// upper bound on the variance discarded by cutting the moving-average integral at -t_past
double moving_average_tail_bound(const hurst::HurstFunction& h, double s, double t, double t_past);
// sup of Gamma(1/2 + u) over [mu, nu]
double gamma_sup(double mu, double nu);

class FbmSynthesizer {
public:
    FbmSynthesizer(double hurst, TimeGrid grid, FbmMethod method = FbmMethod::circulant);
    ~FbmSynthesizer();
    FbmSynthesizer(FbmSynthesizer&&) noexcept;
    FbmSynthesizer& operator=(FbmSynthesizer&&) noexcept;

    SamplePath generate(std::uint64_t seed);
    void generate_into(std::uint64_t seed, std::span<double> out);
    FbmMethod method() const { return method_; }
    const TimeGrid& grid() const { return grid_; }

private:
    struct Impl;
    double hurst_;
    TimeGrid grid_;
    FbmMethod method_;
    std::unique_ptr<Impl> impl_;
};

SamplePath gen_fbm(double hurst, const TimeGrid& grid, std::uint64_t seed,
                   FbmMethod method = FbmMethod::circulant);

// Noise cells of the kernel synthesizer. Cells are ordered by draw order.
struct NoiseCell {
    double a = 0.0;
    double b = 0.0;
};

// Moving-average and Riemann-Liouville fields driven by one shared white noise.
class KernelSynthesizer {
public:
    KernelSynthesizer(const hurst::HurstFunction& h, TimeGrid grid, Representation rep,
                      KernelQuadrature kq = {});
    ~KernelSynthesizer();
    KernelSynthesizer(KernelSynthesizer&&) noexcept;
    KernelSynthesizer& operator=(KernelSynthesizer&&) noexcept;

    SamplePath generate(std::uint64_t seed);
    void generate_into(std::uint64_t seed, std::span<double> out);
    // direct evaluation of every coefficient (no interpolation); small grids only
    SamplePath generate_reference(std::uint64_t seed) const;

    // variance of X(t_j) - X(t_i) for the discretised field, computed from the coefficients
    double discrete_increment_variance(std::size_t i, std::size_t j) const;

    const TimeGrid& grid() const { return grid_; }
    std::size_t levels() const;
    std::size_t cell_count() const;
    const std::vector<NoiseCell>& cells() const;
    double tail_bound() const { return tail_bound_; }
    const PathMeta& meta() const { return meta_; }

private:
    struct Impl;
    TimeGrid grid_;
    PathMeta meta_;
    double tail_bound_ = 0.0;
    std::unique_ptr<Impl> impl_;
};

SamplePath gen_mbm_moving_average(const hurst::HurstFunction& h, const TimeGrid& grid,
                                  std::uint64_t seed, const KernelQuadrature& kq = {});
SamplePath gen_mbm_riemann_liouville(const hurst::HurstFunction& h, const TimeGrid& grid,
                                     std::uint64_t seed, std::size_t substeps = 2);

class HarmonizableSynthesizer {
public:
    HarmonizableSynthesizer(const hurst::HurstFunction& h, TimeGrid grid, SpectralQuadrature sq = {});
    ~HarmonizableSynthesizer();
    HarmonizableSynthesizer(HarmonizableSynthesizer&&) noexcept;
    HarmonizableSynthesizer& operator=(HarmonizableSynthesizer&&) noexcept;

    SamplePath generate(std::uint64_t seed);
    std::vector<SamplePath> generate_batch(std::span<const std::uint64_t> seeds);

    const std::vector<double>& frequencies() const;
    // variance of the discretised field at each grid time
    std::vector<double> discrete_variance() const;
    double spectral_tail_bound() const { return tail_bound_; }

private:
    struct Impl;
    TimeGrid grid_;
    PathMeta meta_;
    double tail_bound_ = 0.0;
    std::unique_ptr<Impl> impl_;
};

SamplePath gen_mbm_harmonizable(const hurst::HurstFunction& h, const TimeGrid& grid, std::uint64_t seed,
                                double omega_max = 1e3, std::size_t n_freq = std::size_t{1} << 14);

struct VarianceResult {
    double value = 0.0;
    double truncation_bound = 0.0;
    double quadrature_error = 0.0;
};

// Var(B(t) - B(s)) of the continuous field by quadrature, 0 <= s < t
VarianceResult increment_variance(const hurst::HurstFunction& h, double s, double t,
                                  const KernelQuadrature& kq, Representation rep);
double increment_variance_exact(const hurst::HurstFunction& h, double s, double t,
                                const KernelQuadrature& kq, Representation rep);

struct PairRecord {
    double s = 0.0;
    double t = 0.0;
    double variance = 0.0;
    double lower_bound = 0.0;
    double upper_ratio = 0.0;  // variance / (t - s)^{2H(t)}
};

struct DeterminantRecord {
    std::vector<double> points;  // t, s_1, ..., s_m
    double determinant = 0.0;
    double bound = 0.0;
};

struct BoundReport {
    std::vector<PairRecord> pairs;
    std::size_t lower_violations = 0;
    double min_lower_margin = 0.0;  // min variance / lower bound
    double fitted_upper_constant = 0.0;
    double fitted_upper_first_half = 0.0;
    double fitted_upper_second_half = 0.0;
    bool upper_stable = false;
    std::vector<DeterminantRecord> tuples;
    std::size_t determinant_violations = 0;
    double min_determinant_margin = 0.0;

    bool ok() const { return lower_violations == 0 && determinant_violations == 0; }
};

// covariance matrix of (B(s_i) - B(t))_i, the points vector being t, s_1, ..., s_m
std::vector<double> increment_covariance(const hurst::HurstFunction& h, std::span<const double> points,
                                         const KernelQuadrature& kq, Representation rep);

BoundReport verify_variance_bounds(const hurst::HurstFunction& h, double a, double b, std::size_t n_pairs,
                                   const KernelQuadrature& kq, std::uint64_t seed = 1,
                                   Representation rep = Representation::moving_average,
                                   std::size_t n_tuples = 50);

}  // namespace mbm::synth
