#include "mbm/random.hpp"

namespace mbm {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
    // both steps are bijections of 64-bit words, so distinct indices give distinct seeds
    return splitmix64(master ^ splitmix64(index));
}

void Rng::fill_gaussian(std::span<double> out) {
    for (double& v : out) v = normal_(engine_);
}

}  // namespace mbm
