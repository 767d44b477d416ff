#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbm {

struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    std::size_t n = 2;

    static TimeGrid over(double t_start, double t_end, std::size_t points);

    double at(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    double end() const { return at(n - 1); }
    double length() const { return dt * static_cast<double>(n - 1); }
    // index of the grid point closest to t; throws when t is not on the grid
    std::size_t index_of(double t, double rel_tol = 1e-6) const;
    void validate() const;
};

enum class Representation { moving_average, harmonizable, riemann_liouville, fbm_exact };

std::string to_string(Representation r);
Representation representation_from_string(const std::string& name);

struct PathMeta {
    Representation representation = Representation::fbm_exact;
    std::uint64_t seed = 0;
    double hurst_at_start = 0.5;
    double t_past = 0.0;
    double omega_max = 0.0;
    std::size_t n_freq = 0;
    std::size_t substeps = 0;
    // values hold B(t) - B(t0) instead of B(t)
    bool relative_to_start = false;
    std::vector<std::string> warnings;
};

struct SamplePath {
    TimeGrid grid;
    std::vector<double> values;
    PathMeta meta;

    void validate() const;
};

class SynthesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mbm
