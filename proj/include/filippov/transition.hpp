#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "filippov/expr.hpp"

namespace filippov {

/// Cubic (3t - t^3)/2 on [-1, 1].
struct Smoothstep {};

/// Cubic plus c (1 - t^2)^2 with c calibrated so the interior maximum is M > 1.
struct Overshoot {
    double max_value;
};

/// Smoothstep composed with the Moebius map (t - t0)/(1 - t0 t); strictly
/// increasing with its unique zero at t0 in (-1, 1).
struct Biased {
    double zero;
};

/// User expression in the locus coordinates and `t`, used on [-1, 1] and
/// extended by -1 / +1 outside.
struct Custom {
    expr::Expr body;
    std::vector<std::string> coordinates;
};

using TransitionSpec = std::variant<Smoothstep, Overshoot, Biased, Custom>;

class ValidationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// psi(x, t): -1 for t <= -1, +1 for t >= 1, with analytic dpsi/dt.
class TransitionFunction {
public:
    double value(std::span<const double> x, double t) const;
    double derivative(std::span<const double> x, double t) const;

    double value(double t) const { return value({}, t); }
    double derivative(double t) const { return derivative({}, t); }

    const TransitionSpec& spec() const noexcept { return spec_; }
    std::string describe() const;

    /// True for the strictly increasing kinds (Smoothstep, Biased).
    bool is_monotone() const noexcept;

    /// The zero of psi when it is known in closed form and independent of x.
    std::optional<double> known_zero() const;

    /// Overshoot bump coefficient (0 for other kinds).
    double bump() const noexcept { return bump_; }

private:
    friend TransitionFunction make_transition(const TransitionSpec& spec);
    explicit TransitionFunction(TransitionSpec spec) : spec_(std::move(spec)) {}

    double interior_value(std::span<const double> x, double t) const;
    double interior_derivative(std::span<const double> x, double t) const;

    TransitionSpec spec_;
    double bump_ = 0.0;
    expr::Program body_;
    expr::Program body_dt_;
    std::vector<std::string> variables_;  // coordinates then "t"
};

/// Builds and validates a transition function. Throws ValidationFailure
/// naming the violated property and the sample where it failed.
TransitionFunction make_transition(const TransitionSpec& spec);

/// Interior maximum of psi over (-1, 1) at x, by grid search refined with a
/// golden-section step.
double interior_max(const TransitionFunction& psi, std::span<const double> x = {});

}  // namespace filippov
