#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mbm::stats {

// replicas x coordinates, row-major
struct Sample {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Sample() = default;
    Sample(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    static Sample column(std::span<const double> v);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct TwoSampleResult {
    double distance = 0.0;
    double p_value = 1.0;
    std::size_t permutations = 0;
    double null_mean = 0.0;  // of the permutation distances
    double null_sd = 0.0;
};

// V-statistic 2E|X-Y| - E|X-X'| - E|Y-Y'|
double energy_distance(const Sample& a, const Sample& b);
TwoSampleResult energy_test(const Sample& a, const Sample& b, std::size_t permutations = 500,
                            std::uint64_t seed = 1);

struct MedianCI {
    double median = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};
MedianCI bootstrap_median(std::span<const double> v, std::size_t resamples = 500, double level = 0.95,
                          std::uint64_t seed = 1);

}  // namespace mbm::stats
