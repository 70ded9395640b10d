#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "filippov/expr.hpp"

namespace filippov {

using expr::Expr;

/// Default margin for the strict inequalities of the Filippov classification.
inline constexpr double kDefaultClassifyTol = 1e-9;

/// A smooth vector field in the adapted chart (x1..x_{n-1}, y). The last
/// coordinate is the one whose zero set is the discontinuity locus.
class VectorFieldDef {
public:
    VectorFieldDef(std::vector<std::string> coordinates, std::vector<Expr> components);

    std::size_t dimension() const noexcept { return coordinates_.size(); }
    const std::vector<std::string>& coordinates() const noexcept { return coordinates_; }
    const std::vector<Expr>& components() const noexcept { return components_; }
    const Expr& component(std::size_t i) const { return components_.at(i); }

    /// Normal component (coefficient of d/dy).
    const Expr& normal() const { return components_.back(); }

    void eval(std::span<const double> point, std::span<double> out) const;
    std::vector<double> eval(std::span<const double> point) const;
    double eval_component(std::size_t i, std::span<const double> point) const;

    /// The field multiplied by a scalar expression.
    VectorFieldDef scaled(const Expr& factor) const;

private:
    std::vector<std::string> coordinates_;
    std::vector<Expr> components_;
    std::vector<expr::Program> programs_;
};

enum class SigmaClass { Sewing, Sliding, SigmaSingular };

const char* to_string(SigmaClass c);

/// Piecewise-smooth system with discontinuity locus {y = 0}: X_plus acts on
/// y > 0, X_minus on y < 0.
class PiecewiseSystem {
public:
    PiecewiseSystem(VectorFieldDef plus, VectorFieldDef minus);

    std::size_t dimension() const noexcept { return plus_.dimension(); }
    std::size_t sigma_dimension() const noexcept { return plus_.dimension() - 1; }
    const std::vector<std::string>& coordinates() const noexcept { return plus_.coordinates(); }
    const std::string& normal_coordinate() const { return plus_.coordinates().back(); }

    const VectorFieldDef& plus() const noexcept { return plus_; }
    const VectorFieldDef& minus() const noexcept { return minus_; }

    /// Lift a point of the locus (x) to the ambient point (x, 0).
    std::vector<double> lift(std::span<const double> x) const;

    /// a_+(x,0) and a_-(x,0).
    struct NormalTraces {
        double plus;
        double minus;
    };
    NormalTraces normal_traces(std::span<const double> x) const;

private:
    VectorFieldDef plus_;
    VectorFieldDef minus_;
};

/// sum_i X_i * dg/dx_i, symbolically.
Expr lie_derivative(const VectorFieldDef& field, const Expr& g);

SigmaClass classify_point(const PiecewiseSystem& sys, std::span<const double> x,
                          double tol = kDefaultClassifyTol);

class NotSliding : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SlidingField {
    double lambda;                // weight of X_plus
    std::vector<double> field;    // lambda X_plus + (1 - lambda) X_minus at (x, 0)
};

/// Filippov convex combination tangent to the locus. Throws NotSliding
/// unless classify_point(sys, x, tol) is Sliding.
SlidingField filippov_sliding_field(const PiecewiseSystem& sys, std::span<const double> x,
                                    double tol = kDefaultClassifyTol);

}  // namespace filippov
