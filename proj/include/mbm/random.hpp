#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mbm {

std::uint64_t splitmix64(std::uint64_t x);

// replica seed = hash(master, index); injective in index for a fixed master
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double gaussian() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    void fill_gaussian(std::span<double> out);
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace mbm
