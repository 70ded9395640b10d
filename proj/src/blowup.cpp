#include "filippov/blowup.hpp"

#include <cmath>
#include <stdexcept>

namespace filippov {

namespace {

// Mix of X_plus and X_minus with transition value s at ambient point q.
std::vector<double> blend(const PiecewiseSystem& sys, double s, std::span<const double> q) {
    const auto fp = sys.plus().eval(q);
    const auto fm = sys.minus().eval(q);
    std::vector<double> out(fp.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = 0.5 * (s * (fp[i] - fm[i]) + (fp[i] + fm[i]));
    return out;
}

std::vector<double> ambient(std::span<const double> x, double y) {
    std::vector<double> q(x.begin(), x.end());
    q.push_back(y);
    return q;
}

void check_locus_dim(const PiecewiseSystem& sys, std::size_t n) {
    if (n != sys.sigma_dimension()) throw std::invalid_argument("chart point has wrong dimension");
}

}  // namespace

EChartField e_chart_field(const PiecewiseSystem& sys, const TransitionFunction& psi,
                          const EChartPoint& p) {
    check_locus_dim(sys, p.x.size());
    if (!(p.epsbar >= 0.0)) throw std::invalid_argument("E chart requires epsbar >= 0");
    const double s = psi.value(p.x, p.ybar);
    const auto mixed = blend(sys, s, ambient(p.x, p.epsbar * p.ybar));
    EChartField out{mixed.back(), 0.0, std::vector<double>(mixed.begin(), mixed.end() - 1)};
    for (auto& v : out.d_x) v *= p.epsbar;
    return out;
}

FChartField f_chart_field(const PiecewiseSystem& sys, const TransitionFunction& psi,
                          const FChartPoint& p) {
    check_locus_dim(sys, p.x.size());
    if (!(p.epstilde >= 0.0 && p.epstilde <= 1.0))
        throw std::invalid_argument("F chart requires 0 <= epstilde <= 1");
    if (!(p.ytilde >= 0.0)) throw std::invalid_argument("F chart requires ytilde >= 0");
    const double sigma = sign_of(p.side);
    // psi(x, +/-1/epstilde) is +/-1 on the whole chart domain, including the
    // extension to epstilde = 0
    const double s = p.epstilde > 0.0 ? psi.value(p.x, sigma / p.epstilde) : sigma;
    const auto mixed = blend(sys, s, ambient(p.x, sigma * p.ytilde));
    const double a = mixed.back();
    FChartField out{sigma * p.ytilde * a, -sigma * p.epstilde * a,
                    std::vector<double>(mixed.begin(), mixed.end() - 1)};
    for (auto& v : out.d_x) v *= p.ytilde;
    return out;
}

AmbientVelocity push_forward(const EChartPoint& p, const EChartField& y_field) {
    if (!(p.epsbar > 0.0)) throw std::invalid_argument("push-forward needs epsbar > 0");
    const double inv = 1.0 / p.epsbar;
    AmbientVelocity v{y_field.d_x, 0.0, 0.0};
    for (auto& c : v.d_x) c *= inv;
    const double d_ybar = y_field.d_ybar * inv;
    const double d_epsbar = y_field.d_epsbar * inv;
    v.d_y = p.ybar * d_epsbar + p.epsbar * d_ybar;
    v.d_eps = d_epsbar;
    return v;
}

AmbientVelocity push_forward(const FChartPoint& p, const FChartField& z_field) {
    if (!(p.ytilde > 0.0)) throw std::invalid_argument("push-forward needs ytilde > 0");
    const double inv = 1.0 / p.ytilde;
    AmbientVelocity v{z_field.d_x, 0.0, 0.0};
    for (auto& c : v.d_x) c *= inv;
    const double d_ytilde = z_field.d_ytilde * inv;
    const double d_epstilde = z_field.d_epstilde * inv;
    v.d_y = sign_of(p.side) * d_ytilde;
    v.d_eps = p.epstilde * d_ytilde + p.ytilde * d_epstilde;
    return v;
}

SlowFastSystem::SlowFastSystem(const PiecewiseSystem& sys, TransitionFunction psi,
                               CertifyOptions opts)
    : sys_(sys), height_(sys, std::move(psi)), opts_(opts) {}

double SlowFastSystem::alpha(std::span<const double> x, double ybar, double epsbar) const {
    check_locus_dim(sys_, x.size());
    const double s = height_.transition().value(x, ybar);
    return blend(sys_, s, ambient(x, epsbar * ybar)).back();
}

std::vector<double> SlowFastSystem::beta(std::span<const double> x, double ybar,
                                         double epsbar) const {
    check_locus_dim(sys_, x.size());
    const double s = height_.transition().value(x, ybar);
    auto mixed = blend(sys_, s, ambient(x, epsbar * ybar));
    mixed.pop_back();
    return mixed;
}

double SlowFastSystem::slow_manifold_residual(std::span<const double> x, double ybar) const {
    return height_(x, ybar).h;
}

HeightRoots SlowFastSystem::slow_manifold(std::span<const double> x) const {
    return height_roots(height_, x, opts_);
}

std::vector<SlowFastSystem::SlowFlowSample> SlowFastSystem::slow_flow(std::span<const double> x) const {
    std::vector<SlowFlowSample> out;
    for (const auto& r : slow_manifold(x).roots) {
        if (!(std::fabs(r.dh_dt) > opts_.transversality_tol)) continue;
        out.push_back({r.t, r.dh_dt, beta(x, r.t, 0.0)});
    }
    return out;
}

SlowFastSystem slow_fast(const PiecewiseSystem& sys, const TransitionFunction& psi,
                         const CertifyOptions& opts) {
    return SlowFastSystem(sys, psi, opts);
}

}  // namespace filippov
