#include "mbm/common.hpp"

#include <cmath>
#include <sstream>

namespace mbm {

TimeGrid TimeGrid::over(double t_start, double t_end, std::size_t points) {
    if (points < 2) throw std::invalid_argument("time grid needs at least 2 points");
    if (!(t_end > t_start)) throw std::invalid_argument("time grid needs t_end > t_start");
    TimeGrid g{t_start, (t_end - t_start) / static_cast<double>(points - 1), points};
    g.validate();
    return g;
}

std::size_t TimeGrid::index_of(double t, double rel_tol) const {
    double k = std::round((t - t0) / dt);
    if (k < 0 || k > static_cast<double>(n - 1) || std::abs(t - at(static_cast<std::size_t>(k))) > rel_tol * dt) {
        std::ostringstream os;
        os << "time " << t << " is not a point of the grid [" << t0 << ", " << end() << "] step " << dt;
        throw std::invalid_argument(os.str());
    }
    return static_cast<std::size_t>(k);
}

void TimeGrid::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time grid step must be positive");
    if (n < 2) throw std::invalid_argument("time grid needs at least 2 points");
    if (!std::isfinite(t0)) throw std::invalid_argument("time grid start must be finite");
}

std::string to_string(Representation r) {
    switch (r) {
        case Representation::moving_average: return "moving-average";
        case Representation::harmonizable: return "harmonizable";
        case Representation::riemann_liouville: return "riemann-liouville";
        case Representation::fbm_exact: return "fbm-exact";
    }
    return "unknown";
}

Representation representation_from_string(const std::string& name) {
    if (name == "moving-average") return Representation::moving_average;
    if (name == "harmonizable") return Representation::harmonizable;
    if (name == "riemann-liouville") return Representation::riemann_liouville;
    if (name == "fbm-exact") return Representation::fbm_exact;
    throw std::invalid_argument("unknown representation '" + name + "'");
}

void SamplePath::validate() const {
    grid.validate();
    if (values.size() != grid.n) throw std::invalid_argument("path length does not match its grid");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("path contains non-finite values");
}

}  // namespace mbm
