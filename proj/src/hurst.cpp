#include "mbm/hurst.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mbm::hurst {

std::string to_string(Kind k) {
    switch (k) {
        case Kind::constant: return "constant";
        case Kind::linear: return "linear";
        case Kind::sinusoidal: return "sinusoidal";
        case Kind::piecewise_linear: return "piecewise-linear";
        case Kind::table: return "table";
    }
    return "unknown";
}

Kind kind_from_string(const std::string& name) {
    if (name == "constant") return Kind::constant;
    if (name == "linear") return Kind::linear;
    if (name == "sinusoidal") return Kind::sinusoidal;
    if (name == "piecewise-linear") return Kind::piecewise_linear;
    if (name == "table") return Kind::table;
    throw std::invalid_argument("unknown hurst kind '" + name + "'");
}

HurstFunction HurstFunction::constant(double value, double horizon) {
    HurstFunction h;
    h.kind_ = Kind::constant;
    h.params_ = {value};
    h.horizon_ = horizon;
    h.finish();
    return h;
}

HurstFunction HurstFunction::linear(double intercept, double slope, double horizon) {
    HurstFunction h;
    h.kind_ = Kind::linear;
    h.params_ = {intercept, slope};
    h.horizon_ = horizon;
    h.finish();
    return h;
}

HurstFunction HurstFunction::sinusoidal(double mean, double amplitude, double omega, double phase,
                                        double horizon) {
    HurstFunction h;
    h.kind_ = Kind::sinusoidal;
    h.params_ = {mean, amplitude, omega, phase};
    h.horizon_ = horizon;
    h.finish();
    return h;
}

namespace {

void check_knots(const std::vector<double>& knots, const std::vector<double>& values) {
    if (knots.size() < 2 || knots.size() != values.size())
        throw std::invalid_argument("hurst table needs >= 2 knots and matching values");
    if (knots.front() != 0.0) throw std::invalid_argument("hurst table must start at t = 0");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1]))
            throw std::invalid_argument("hurst table knots must be strictly increasing");
}

}  // namespace

HurstFunction HurstFunction::piecewise_linear(std::vector<double> knots, std::vector<double> values,
                                              double horizon) {
    check_knots(knots, values);
    HurstFunction h;
    h.kind_ = Kind::piecewise_linear;
    h.knots_ = std::move(knots);
    h.values_ = std::move(values);
    h.horizon_ = horizon;
    h.params_.reserve(2 * h.knots_.size());
    for (std::size_t i = 0; i < h.knots_.size(); ++i) {
        h.params_.push_back(h.knots_[i]);
        h.params_.push_back(h.values_[i]);
    }
    h.finish();
    return h;
}

HurstFunction HurstFunction::table(std::vector<double> knots, std::vector<double> values,
                                   double horizon) {
    HurstFunction h = piecewise_linear(std::move(knots), std::move(values), horizon);
    h.kind_ = Kind::table;
    return h;
}

HurstFunction HurstFunction::make(Kind kind, std::span<const double> p, double horizon) {
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi)
            throw std::invalid_argument("wrong number of parameters for hurst kind " + to_string(kind));
    };
    switch (kind) {
        case Kind::constant: need(1, 1); return constant(p[0], horizon);
        case Kind::linear: need(2, 2); return linear(p[0], p[1], horizon);
        case Kind::sinusoidal: need(3, 4); return sinusoidal(p[0], p[1], p[2], p.size() == 4 ? p[3] : 0.0, horizon);
        case Kind::piecewise_linear:
        case Kind::table: {
            if (p.size() < 4 || p.size() % 2 != 0)
                throw std::invalid_argument("table parameters are (t, H) pairs");
            std::vector<double> knots, values;
            for (std::size_t i = 0; i < p.size(); i += 2) {
                knots.push_back(p[i]);
                values.push_back(p[i + 1]);
            }
            return kind == Kind::table ? table(knots, values, horizon)
                                       : piecewise_linear(knots, values, horizon);
        }
    }
    throw std::invalid_argument("unknown hurst kind");
}

void HurstFunction::finish() {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
        throw std::invalid_argument("hurst horizon must be positive");
    for (double v : params_)
        if (!std::isfinite(v)) throw std::invalid_argument("hurst parameters must be finite");
    bounds_ = sup_inf(0.0, horizon_);
    if (!(bounds_.inf > 0.0) || !(bounds_.sup < 1.0)) {
        std::ostringstream os;
        os << "hurst function leaves (0,1) on [0," << horizon_ << "]: range [" << bounds_.inf << ", "
           << bounds_.sup << "]";
        throw std::invalid_argument(os.str());
    }
}

HurstFunction HurstFunction::with_holder(double beta, double constant) const {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("holder exponent must lie in (0,1]");
    if (!(constant >= 0.0)) throw std::invalid_argument("holder constant must be nonnegative");
    HurstFunction h = *this;
    h.holder_ = HolderData{beta, constant};
    return h;
}

bool HurstFunction::is_constant() const {
    return bounds_.sup - bounds_.inf == 0.0;
}

double HurstFunction::operator()(double t) const {
    if (!(t >= 0.0)) throw std::domain_error("hurst function evaluated at negative time");
    switch (kind_) {
        case Kind::constant: return params_[0];
        case Kind::linear: return params_[0] + params_[1] * t;
        case Kind::sinusoidal: return params_[0] + params_[1] * std::sin(params_[2] * t + params_[3]);
        case Kind::piecewise_linear:
        case Kind::table: {
            if (t >= knots_.back()) return values_.back();
            auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
            std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
            double w = (t - knots_[i]) / (knots_[i + 1] - knots_[i]);
            return values_[i] + w * (values_[i + 1] - values_[i]);
        }
    }
    return params_[0];
}

Bracket HurstFunction::sup_inf(double a, double b) const {
    if (!(a >= 0.0)) throw std::domain_error("sup_inf needs a >= 0");
    if (!(b > a)) throw std::domain_error("sup_inf needs a non-empty interval");
    std::vector<double> cand{a, b};
    if (kind_ == Kind::sinusoidal) {
        double omega = params_[2], phase = params_[3];
        if (omega != 0.0) {
            // critical points omega t + phase = pi/2 + k pi
            double lo = (omega * (omega > 0 ? a : b) + phase - std::numbers::pi / 2) / std::numbers::pi;
            double hi = (omega * (omega > 0 ? b : a) + phase - std::numbers::pi / 2) / std::numbers::pi;
            for (double k = std::ceil(lo); k <= std::floor(hi); k += 1.0)
                cand.push_back((std::numbers::pi / 2 + k * std::numbers::pi - phase) / omega);
        }
    } else if (kind_ == Kind::piecewise_linear || kind_ == Kind::table) {
        for (double k : knots_)
            if (k > a && k < b) cand.push_back(k);
    }
    Bracket out{1e300, -1e300};
    for (double t : cand) {
        t = std::clamp(t, a, b);
        double v = (*this)(t);
        out.inf = std::min(out.inf, v);
        out.sup = std::max(out.sup, v);
    }
    return out;
}

std::string HurstFunction::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind_) << "(";
    for (std::size_t i = 0; i < params_.size(); ++i) os << (i ? "," : "") << params_[i];
    os << ")";
    return os.str();
}

ConditionReport check_condition_beta(const HurstFunction& h, std::span<const double> grid) {
    if (grid.size() < 2) throw std::invalid_argument("check_condition_beta needs >= 2 grid points");
    ConditionReport rep;
    if (!h.holder()) return rep;
    const double beta = h.holder()->beta;
    const double c = h.holder()->constant;
    rep.exponent_ok = h.nu() < beta;

    auto ratio = [&](std::size_t i, std::size_t j) {
        double d = std::abs(grid[i] - grid[j]);
        if (d == 0.0) return 0.0;
        return std::abs(h(grid[i]) - h(grid[j])) / std::pow(d, beta);
    };
    const std::size_t n = grid.size();
    const std::size_t max_pairs = 10000;
    const std::size_t all_pairs = n * (n - 1) / 2;
    if (all_pairs <= max_pairs) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) rep.worst_ratio = std::max(rep.worst_ratio, ratio(i, j));
        rep.pairs_checked = all_pairs;
    } else {
        std::mt19937_64 eng(0x5eedULL);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::size_t count = 0;
        // neighbouring pairs first, they carry the largest ratios for smooth functions
        for (std::size_t i = 0; i + 1 < n && count < max_pairs / 2; ++i, ++count)
            rep.worst_ratio = std::max(rep.worst_ratio, ratio(i, i + 1));
        while (count < max_pairs) {
            std::size_t i = pick(eng), j = pick(eng);
            if (i == j) continue;
            rep.worst_ratio = std::max(rep.worst_ratio, ratio(i, j));
            ++count;
        }
        rep.pairs_checked = count;
    }
    rep.holds = rep.exponent_ok && rep.worst_ratio <= c * (1.0 + 1e-9);
    return rep;
}

}  // namespace mbm::hurst
