#include "filippov/cross.hpp"

#include <algorithm>
#include <cmath>

#include "filippov/dynamics.hpp"
#include "filippov/scan.hpp"

namespace filippov {

namespace {

void require_autonomous(const TransitionFunction& f, const char* which) {
    if (const auto* c = std::get_if<Custom>(&f.spec()); c && !c->coordinates.empty())
        throw ValidationFailure(std::string(which) + ": cross transitions depend on t only");
}

}  // namespace

CrossSystem::CrossSystem(VectorFieldDef pp, VectorFieldDef pm, VectorFieldDef mp,
                         VectorFieldDef mm, TransitionFunction phi, TransitionFunction psi)
    : fields_{std::move(pp), std::move(pm), std::move(mp), std::move(mm)},
      phi_(std::move(phi)),
      psi_(std::move(psi)) {
    if (fields_[0].dimension() != 3) throw std::invalid_argument("cross system lives in R^3");
    for (const auto& f : fields_)
        if (f.coordinates() != fields_[0].coordinates())
            throw std::invalid_argument("cross fields must share coordinates");
    require_autonomous(phi_, "phi");
    require_autonomous(psi_, "psi");
}

const VectorFieldDef& CrossSystem::field(int alpha, int beta) const {
    if ((alpha != 1 && alpha != -1) || (beta != 1 && beta != -1))
        throw std::invalid_argument("quadrant signs must be +1 or -1");
    return fields_[(alpha > 0 ? 0 : 2) + (beta > 0 ? 0 : 1)];
}

std::array<double, 4> cross_weights(const CrossSystem& cs, double eps, double eta, double x, double y) {
    if (!(eps > 0.0) || !(eta > 0.0))
        throw std::invalid_argument("double regularization needs eps > 0 and eta > 0");
    const double f = cs.phi().value(x / eps);
    const double g = cs.psi().value(y / eta);
    return {0.25 * (1 + f) * (1 + g), 0.25 * (1 + f) * (1 - g), 0.25 * (1 - f) * (1 + g),
            0.25 * (1 - f) * (1 - g)};
}

std::vector<double> double_regularized_field(const CrossSystem& cs, double eps, double eta,
                                             std::span<const double> p) {
    if (p.size() != 3) throw std::invalid_argument("cross point must have three coordinates");
    const auto w = cross_weights(cs, eps, eta, p[0], p[1]);
    std::vector<double> out(3, 0.0);
    std::array<double, 3> v{};
    const int signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (int k = 0; k < 4; ++k) {
        if (w[k] == 0.0) continue;
        cs.field(signs[k][0], signs[k][1]).eval(p, v);
        for (int i = 0; i < 3; ++i) out[i] += w[k] * v[i];
    }
    return out;
}

double unique_zero(const TransitionFunction& psi) {
    if (auto z = psi.known_zero()) return *z;
    const auto found = scan::find_zeros([&](double t) { return psi.value(t); }, -1.0, 1.0,
                                        {2000, 1e-14, 1e-13});
    if (found.roots.size() != 1 || !found.flat.empty())
        throw NonMonotoneTransition("transition " + psi.describe() + " has " +
                                    std::to_string(found.roots.size()) + " isolated zeros");
    return found.roots.front();
}

StratifiedCurve stratified_slide_curve(const CrossSystem& cs, double eps, double eta, double z_lo,
                                       double z_hi, int samples) {
    if (!(eps > 0.0) || !(eta > 0.0))
        throw std::invalid_argument("double regularization needs eps > 0 and eta > 0");
    if (samples < 2 || !(z_hi > z_lo)) throw std::invalid_argument("bad z sampling");
    StratifiedCurve c{};
    c.eps = eps;
    c.eta = eta;
    c.t0 = unique_zero(cs.phi());
    c.u0 = unique_zero(cs.psi());
    c.x = eps * c.t0;
    c.y = eta * c.u0;
    std::vector<std::vector<double>> curve;
    std::vector<std::vector<double>> axis;
    for (int i = 0; i < samples; ++i) {
        const double z = z_lo + (z_hi - z_lo) * i / (samples - 1);
        c.z_samples.push_back(z);
        const std::array<double, 3> p{c.x, c.y, z};
        const auto v = double_regularized_field(cs, eps, eta, p);
        c.residual_x = std::max(c.residual_x, std::fabs(v[0]));
        c.residual_y = std::max(c.residual_y, std::fabs(v[1]));
        curve.push_back({c.x, c.y, z});
        axis.push_back({0.0, 0.0, z});
    }
    c.hausdorff = hausdorff(curve, axis);
    c.bound = std::hypot(c.x, c.y);
    return c;
}

}  // namespace filippov
