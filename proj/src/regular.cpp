#include "filippov/regular.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "filippov/scan.hpp"

namespace filippov {

std::vector<double> regularized_field(const PiecewiseSystem& sys, const TransitionFunction& psi,
                                      double eps, std::span<const double> p) {
    if (!(eps > 0.0)) throw std::invalid_argument("regularization parameter must be positive");
    if (p.size() != sys.dimension()) throw std::invalid_argument("point has wrong dimension");
    const auto x = p.first(sys.sigma_dimension());
    const double s = psi.value(x, p.back() / eps);
    const auto fp = sys.plus().eval(p);
    const auto fm = sys.minus().eval(p);
    std::vector<double> out(fp.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = 0.5 * (1.0 + s) * fp[i] + 0.5 * (1.0 - s) * fm[i];
    return out;
}

HeightFunction::HeightFunction(const PiecewiseSystem& sys, TransitionFunction psi)
    : coords_(sys.coordinates().begin(), sys.coordinates().end() - 1),
      trace_plus_(expr::substitute(sys.plus().normal(), sys.normal_coordinate(), Expr::constant(0.0))),
      trace_minus_(expr::substitute(sys.minus().normal(), sys.normal_coordinate(), Expr::constant(0.0))),
      plus_(trace_plus_, coords_),
      minus_(trace_minus_, coords_),
      psi_(std::move(psi)) {}

PiecewiseSystem::NormalTraces HeightFunction::traces(std::span<const double> x) const {
    if (x.size() != coords_.size()) throw std::invalid_argument("point on the locus has wrong dimension");
    return {plus_(x), minus_(x)};
}

HeightValue HeightFunction::operator()(std::span<const double> x, double t) const {
    const auto [ap, am] = traces(x);
    return {psi_.value(x, t) * (ap - am) + (ap + am), psi_.derivative(x, t) * (ap - am)};
}

HeightValue height(const PiecewiseSystem& sys, const TransitionFunction& psi,
                   std::span<const double> x, double t) {
    return HeightFunction(sys, psi)(x, t);
}

HeightRoots height_roots(const HeightFunction& hf, std::span<const double> x,
                         const CertifyOptions& opts) {
    const auto [ap, am] = hf.traces(x);
    HeightRoots out;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Outside [-1, 1] psi is constant, so h equals 2 a_- (t <= -1) or 2 a_+ (t >= 1).
    const bool lower_flat = std::fabs(2.0 * am) <= opts.zero_tol;
    const bool upper_flat = std::fabs(2.0 * ap) <= opts.zero_tol;

    const auto& psi = hf.transition();
    const auto h = [&](double t) { return psi.value(x, t) * (ap - am) + (ap + am); };
    const auto scanned =
        scan::find_zeros(h, -1.0, 1.0, {opts.grid_cells, opts.t_tol, opts.zero_tol});
    out.min_abs_h = scanned.min_abs;

    for (double t : scanned.roots) out.roots.push_back({t, psi.derivative(x, t) * (ap - am)});
    for (const auto& iv : scanned.flat) {
        out.degenerate.push_back({iv.lo <= -1.0 && lower_flat ? -kInf : iv.lo,
                                  iv.hi >= 1.0 && upper_flat ? kInf : iv.hi});
    }
    auto covered = [&](double t) {
        for (const auto& d : out.degenerate)
            if (t >= d.t_lo && t <= d.t_hi) return true;
        return false;
    };
    if (lower_flat && !covered(-1.0)) out.degenerate.insert(out.degenerate.begin(), {-kInf, -1.0});
    if (upper_flat && !covered(1.0)) out.degenerate.push_back({1.0, kInf});
    return out;
}

HeightRoots height_roots(const PiecewiseSystem& sys, const TransitionFunction& psi,
                         std::span<const double> x, const CertifyOptions& opts) {
    return height_roots(HeightFunction(sys, psi), x, opts);
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::SlidingCertified: return "SlidingCertified";
        case Verdict::SewingCertified: return "SewingCertified";
        case Verdict::Indeterminate: return "Indeterminate";
    }
    return "?";
}

std::optional<HeightRoot> preferred_root(const HeightRoots& roots, double transversality_tol) {
    std::optional<HeightRoot> first;
    for (const auto& r : roots.roots) {
        if (!(std::fabs(r.dh_dt) > transversality_tol)) continue;
        if (r.dh_dt < 0.0) return r;
        if (!first) first = r;
    }
    return first;
}

SlidingCertificate certify(const HeightFunction& hf, std::span<const double> x,
                           const CertifyOptions& opts) {
    auto roots = height_roots(hf, x, opts);
    SlidingCertificate cert;
    cert.min_abs_h = roots.min_abs_h;
    if (auto w = preferred_root(roots, opts.transversality_tol)) {
        cert.verdict = Verdict::SlidingCertified;
        cert.witness = *w;
    } else if (roots.roots.empty() && roots.degenerate.empty() && roots.min_abs_h > opts.zero_tol) {
        cert.verdict = Verdict::SewingCertified;
    } else {
        cert.verdict = Verdict::Indeterminate;
    }
    cert.roots = std::move(roots.roots);
    cert.degenerate = std::move(roots.degenerate);
    return cert;
}

SlidingCertificate certify(const PiecewiseSystem& sys, const TransitionFunction& psi,
                           std::span<const double> x, const CertifyOptions& opts) {
    return certify(HeightFunction(sys, psi), x, opts);
}

}  // namespace filippov
