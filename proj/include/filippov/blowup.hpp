#pragma once

#include <span>
#include <vector>

#include "filippov/regular.hpp"

namespace filippov {

/// Point of the extended space (x, y, eps).
struct AmbientPoint {
    std::vector<double> x;
    double y;
    double eps;
};

/// Directional chart E: y = epsbar * ybar, eps = epsbar.
struct EChartPoint {
    std::vector<double> x;
    double ybar;
    double epsbar;

    AmbientPoint to_ambient() const { return {x, epsbar * ybar, epsbar}; }
};

enum class Side { Plus, Minus };

inline double sign_of(Side s) { return s == Side::Plus ? 1.0 : -1.0; }

/// Directional charts F+ and F-: y = +/- ytilde, eps = ytilde * epstilde.
struct FChartPoint {
    Side side;
    std::vector<double> x;
    double ytilde;
    double epstilde;

    AmbientPoint to_ambient() const { return {x, sign_of(side) * ytilde, ytilde * epstilde}; }
};

/// Y = epsbar * pullback(X_eps), extended to the divisor {epsbar = 0}.
struct EChartField {
    double d_ybar;
    double d_epsbar;  // identically 0: the family is tangent to the eps fibres
    std::vector<double> d_x;
};

/// Z = ytilde * pullback(X_eps), extended to the divisor {ytilde = 0}.
struct FChartField {
    double d_ytilde;
    double d_epstilde;
    std::vector<double> d_x;
};

/// Velocity in (x, y, eps) coordinates.
struct AmbientVelocity {
    std::vector<double> d_x;
    double d_y;
    double d_eps;
};

EChartField e_chart_field(const PiecewiseSystem& sys, const TransitionFunction& psi,
                          const EChartPoint& p);

/// Throws std::invalid_argument unless 0 <= epstilde <= 1 and ytilde >= 0.
FChartField f_chart_field(const PiecewiseSystem& sys, const TransitionFunction& psi,
                          const FChartPoint& p);

/// Chart Jacobian applied to (1/epsbar) Y; requires epsbar > 0.
AmbientVelocity push_forward(const EChartPoint& p, const EChartField& y_field);
/// Chart Jacobian applied to (1/ytilde) Z; requires ytilde > 0.
AmbientVelocity push_forward(const FChartPoint& p, const FChartField& z_field);

/// The blown-up family in the E chart as a slow-fast system:
///   ybar' = alpha(x, ybar, epsbar),  x' = epsbar * beta(x, ybar, epsbar)
/// with a_pm, b_pm evaluated at (x, epsbar * ybar).
class SlowFastSystem {
public:
    SlowFastSystem(const PiecewiseSystem& sys, TransitionFunction psi, CertifyOptions opts = {});

    double alpha(std::span<const double> x, double ybar, double epsbar = 0.0) const;
    std::vector<double> beta(std::span<const double> x, double ybar, double epsbar = 0.0) const;

    /// h(x, ybar); its zero set on the divisor is the critical manifold.
    double slow_manifold_residual(std::span<const double> x, double ybar) const;

    /// Zeros of the residual at x (the critical-manifold slice).
    HeightRoots slow_manifold(std::span<const double> x) const;

    struct SlowFlowSample {
        double ybar;
        double dh_dt;
        std::vector<double> velocity;  // beta on the divisor
    };
    /// beta on every transversal point of the slice over x.
    std::vector<SlowFlowSample> slow_flow(std::span<const double> x) const;

    /// ybar' = alpha at epsbar = 0, x frozen.
    double fast_flow(std::span<const double> x, double ybar) const { return alpha(x, ybar, 0.0); }

    const PiecewiseSystem& system() const noexcept { return sys_; }
    const HeightFunction& height_function() const noexcept { return height_; }

private:
    PiecewiseSystem sys_;
    HeightFunction height_;
    CertifyOptions opts_;
};

SlowFastSystem slow_fast(const PiecewiseSystem& sys, const TransitionFunction& psi,
                         const CertifyOptions& opts = {});

}  // namespace filippov
