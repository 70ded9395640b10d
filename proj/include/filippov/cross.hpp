#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "filippov/system.hpp"
#include "filippov/transition.hpp"

namespace filippov {

/// Four smooth fields on (x, y, z), one per quadrant of the cross {xy = 0}.
/// phi switches in x/eps, psi in y/eta; neither may depend on coordinates.
class CrossSystem {
public:
    CrossSystem(VectorFieldDef pp, VectorFieldDef pm, VectorFieldDef mp, VectorFieldDef mm,
                TransitionFunction phi, TransitionFunction psi);

    /// alpha, beta in {+1, -1}.
    const VectorFieldDef& field(int alpha, int beta) const;
    const TransitionFunction& phi() const noexcept { return phi_; }
    const TransitionFunction& psi() const noexcept { return psi_; }
    const std::vector<std::string>& coordinates() const noexcept { return fields_[0].coordinates(); }

private:
    std::array<VectorFieldDef, 4> fields_;  // ++, +-, -+, --
    TransitionFunction phi_;
    TransitionFunction psi_;
};

/// 1/4 sum (1 + alpha phi(x/eps)) (1 + beta psi(y/eta)) X_{alpha beta}(p).
std::vector<double> double_regularized_field(const CrossSystem& cs, double eps, double eta,
                                             std::span<const double> p);

/// The four weights in the order ++, +-, -+, --.
std::array<double, 4> cross_weights(const CrossSystem& cs, double eps, double eta, double x, double y);

class NonMonotoneTransition : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StratifiedCurve {
    double eps;
    double eta;
    double t0;  // zero of phi
    double u0;  // zero of psi
    double x;   // eps * t0
    double y;   // eta * u0
    std::vector<double> z_samples;
    double residual_x;   // max |x-component| of the field on the curve
    double residual_y;   // max |y-component|
    double hausdorff;    // to the z-axis over the same z samples
    double bound;        // sqrt((eps t0)^2 + (eta u0)^2)
};

/// The curve {x = eps t0, y = eta u0} and its invariance residuals over
/// `samples` points of z in [z_lo, z_hi].
StratifiedCurve stratified_slide_curve(const CrossSystem& cs, double eps, double eta,
                                       double z_lo = -1.0, double z_hi = 1.0, int samples = 21);

/// The unique zero of psi on (-1, 1); throws NonMonotoneTransition otherwise.
double unique_zero(const TransitionFunction& psi);

}  // namespace filippov
