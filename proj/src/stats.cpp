#include "mbm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mbm/numerics.hpp"
#include "mbm/random.hpp"

namespace mbm::stats {

namespace {

constexpr std::size_t kMaxPooled = 6000;

void check_shapes(const Sample& a, const Sample& b) {
    if (a.cols == 0 || a.cols != b.cols) throw std::invalid_argument("samples must share a non-empty coordinate set");
    if (a.rows < 2 || b.rows < 2) throw std::invalid_argument("samples need at least two replicas each");
    if (a.data.size() != a.rows * a.cols || b.data.size() != b.rows * b.cols)
        throw std::invalid_argument("sample storage does not match its shape");
}

// pairwise sums within group 0, within group 1 and across, for pooled 1-d data sorted once
struct SortedPool {
    std::vector<double> x;
    std::vector<std::size_t> order;  // pooled index of the i-th smallest value
};

void group_sums_1d(const SortedPool& p, std::span<const char> label, double total, double& s0, double& s1, double& s01) {
    double run[2] = {0.0, 0.0};
    double count[2] = {0.0, 0.0};
    double within[2] = {0.0, 0.0};
    for (std::size_t r = 0; r < p.order.size(); ++r) {
        const int g = label[p.order[r]];
        const double v = p.x[p.order[r]];
        within[g] += count[g] * v - run[g];
        run[g] += v;
        count[g] += 1.0;
    }
    s0 = within[0];
    s1 = within[1];
    s01 = total - s0 - s1;
}

double statistic(double s0, double s1, double s01, double n0, double n1) {
    return 2.0 * s01 / (n0 * n1) - 2.0 * s0 / (n0 * n0) - 2.0 * s1 / (n1 * n1);
}

void summarize(TwoSampleResult& out, const std::vector<double>& null) {
    std::size_t above = 0;
    for (double v : null)
        if (v >= out.distance) ++above;
    out.p_value = (1.0 + static_cast<double>(above)) / (1.0 + static_cast<double>(null.size()));
    if (!null.empty()) out.null_mean = numerics::mean(null);
    if (null.size() > 1) out.null_sd = std::sqrt(numerics::variance(null));
}

}  // namespace

Sample Sample::column(std::span<const double> v) {
    Sample s(v.size(), 1);
    std::copy(v.begin(), v.end(), s.data.begin());
    return s;
}

double energy_distance(const Sample& a, const Sample& b) {
    return energy_test(a, b, 0).distance;
}

TwoSampleResult energy_test(const Sample& a, const Sample& b, std::size_t permutations, std::uint64_t seed) {
    check_shapes(a, b);
    const std::size_t n0 = a.rows, n1 = b.rows, n = n0 + n1, d = a.cols;
    std::vector<char> label(n, 0);
    std::fill(label.begin() + static_cast<std::ptrdiff_t>(n0), label.end(), 1);
    TwoSampleResult out;
    out.permutations = permutations;
    Rng rng(seed);

    if (d == 1) {
        SortedPool p;
        p.x.insert(p.x.end(), a.data.begin(), a.data.end());
        p.x.insert(p.x.end(), b.data.begin(), b.data.end());
        p.order.resize(n);
        std::iota(p.order.begin(), p.order.end(), 0);
        std::sort(p.order.begin(), p.order.end(), [&](std::size_t i, std::size_t j) { return p.x[i] < p.x[j]; });
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) total += (2.0 * static_cast<double>(r) - static_cast<double>(n) + 1.0) * p.x[p.order[r]];
        double s0, s1, s01;
        group_sums_1d(p, label, total, s0, s1, s01);
        out.distance = statistic(s0, s1, s01, double(n0), double(n1));
        std::vector<double> null;
        for (std::size_t k = 0; k < permutations; ++k) {
            std::shuffle(label.begin(), label.end(), rng.engine());
            group_sums_1d(p, label, total, s0, s1, s01);
            null.push_back(statistic(s0, s1, s01, double(n0), double(n1)));
        }
        summarize(out, null);
        return out;
    }

    if (n > kMaxPooled) throw std::invalid_argument("multivariate energy test supports at most 6000 pooled replicas");
    auto row = [&](std::size_t i) { return i < n0 ? &a.data[i * d] : &b.data[(i - n0) * d]; };
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* u = row(i);
            const double* v = row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += (u[c] - v[c]) * (u[c] - v[c]);
            dist[i * n + j] = dist[j * n + i] = std::sqrt(s);
        }
    auto evaluate = [&] {
        double within[2] = {0.0, 0.0}, across = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* di = &dist[i * n];
            for (std::size_t j = i + 1; j < n; ++j) {
                if (label[i] != label[j]) across += di[j];
                else within[static_cast<int>(label[i])] += di[j];
            }
        }
        return statistic(within[0], within[1], across, double(n0), double(n1));
    };
    out.distance = evaluate();
    std::vector<double> null;
    for (std::size_t k = 0; k < permutations; ++k) {
        std::shuffle(label.begin(), label.end(), rng.engine());
        null.push_back(evaluate());
    }
    summarize(out, null);
    return out;
}

MedianCI bootstrap_median(std::span<const double> v, std::size_t resamples, double level, std::uint64_t seed) {
    if (v.empty()) throw std::invalid_argument("bootstrap needs data");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
    MedianCI out;
    out.median = numerics::median({v.begin(), v.end()});
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    std::vector<double> meds, draw(v.size());
    meds.reserve(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        for (auto& x : draw) x = v[pick(rng.engine())];
        meds.push_back(numerics::median(draw));
    }
    if (meds.empty()) {
        out.lo = out.hi = out.median;
        return out;
    }
    out.lo = numerics::quantile(meds, 0.5 * (1.0 - level));
    out.hi = numerics::quantile(meds, 0.5 * (1.0 + level));
    return out;
}

}  // namespace mbm::stats
