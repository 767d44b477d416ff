#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mbm::hurst {

enum class Kind { constant, linear, sinusoidal, piecewise_linear, table };

std::string to_string(Kind k);
Kind kind_from_string(const std::string& name);

struct Bracket {
    double inf = 0.0;
    double sup = 0.0;
};

struct HolderData {
    double beta = 1.0;
    double constant = 0.0;
};

class HurstFunction {
public:
    static HurstFunction constant(double value, double horizon = 1.0);
    // H(t) = intercept + slope * t
    static HurstFunction linear(double intercept, double slope, double horizon = 1.0);
    // H(t) = mean + amplitude * sin(omega * t + phase)
    static HurstFunction sinusoidal(double mean, double amplitude, double omega, double phase = 0.0,
                                    double horizon = 1.0);
    // knots must be strictly increasing, first knot 0; constant beyond the last knot
    static HurstFunction piecewise_linear(std::vector<double> knots, std::vector<double> values,
                                          double horizon = 1.0);
    static HurstFunction table(std::vector<double> knots, std::vector<double> values,
                               double horizon = 1.0);
    // generic constructor used by config parsing
    static HurstFunction make(Kind kind, std::span<const double> params, double horizon = 1.0);

    HurstFunction with_holder(double beta, double constant) const;

    double operator()(double t) const;
    double eval(double t) const { return (*this)(t); }
    Bracket sup_inf(double a, double b) const;

    double mu() const { return bounds_.inf; }
    double nu() const { return bounds_.sup; }
    double horizon() const { return horizon_; }
    Kind kind() const { return kind_; }
    const std::vector<double>& parameters() const { return params_; }
    const std::optional<HolderData>& holder() const { return holder_; }
    bool is_constant() const;
    std::string describe() const;

private:
    HurstFunction() = default;
    void finish();

    Kind kind_ = Kind::constant;
    std::vector<double> params_;
    std::vector<double> knots_;
    std::vector<double> values_;
    double horizon_ = 1.0;
    Bracket bounds_;
    std::optional<HolderData> holder_;
};

struct ConditionReport {
    bool holds = false;
    double worst_ratio = 0.0;
    bool exponent_ok = false;  // nu < beta
    std::size_t pairs_checked = 0;
};

// checks the declared Holder data over pairs of grid points
ConditionReport check_condition_beta(const HurstFunction& h, std::span<const double> grid);

}  // namespace mbm::hurst
