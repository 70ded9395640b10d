#pragma once

#include <optional>
#include <span>
#include <vector>

#include "filippov/system.hpp"
#include "filippov/transition.hpp"

namespace filippov {

/// X_eps(p) = 1/2 (1 + psi(x, y/eps)) X_plus(p) + 1/2 (1 - psi(x, y/eps)) X_minus(p).
/// Throws std::invalid_argument for eps <= 0.
std::vector<double> regularized_field(const PiecewiseSystem& sys, const TransitionFunction& psi,
                                      double eps, std::span<const double> p);

struct HeightValue {
    double h;
    double dh_dt;
};

/// h(x, t) = psi(x, t) (a_+(x,0) - a_-(x,0)) + (a_+(x,0) + a_-(x,0)).
///
/// The traces a_+(x,0), a_-(x,0) are kept as expressions in the locus
/// coordinates so callers can inspect them.
class HeightFunction {
public:
    HeightFunction(const PiecewiseSystem& sys, TransitionFunction psi);

    const Expr& trace_plus() const noexcept { return trace_plus_; }
    const Expr& trace_minus() const noexcept { return trace_minus_; }
    const TransitionFunction& transition() const noexcept { return psi_; }
    std::size_t sigma_dimension() const noexcept { return coords_.size(); }

    PiecewiseSystem::NormalTraces traces(std::span<const double> x) const;
    HeightValue operator()(std::span<const double> x, double t) const;

private:
    std::vector<std::string> coords_;
    Expr trace_plus_;
    Expr trace_minus_;
    expr::Program plus_;
    expr::Program minus_;
    TransitionFunction psi_;
};

HeightValue height(const PiecewiseSystem& sys, const TransitionFunction& psi,
                   std::span<const double> x, double t);

struct CertifyOptions {
    double transversality_tol = 1e-8;  // on |dh/dt|
    double zero_tol = 1e-10;           // on |h|
    int grid_cells = 512;
    double t_tol = 1e-12;
};

struct HeightRoot {
    double t;
    double dh_dt;
};

/// Interval of t on which h(x, .) vanishes identically. Rays outside
/// [-1, 1] use infinite endpoints.
struct DegenerateInterval {
    double t_lo;
    double t_hi;
};

struct HeightRoots {
    std::vector<HeightRoot> roots;            // isolated zeros in [-1, 1], ascending
    std::vector<DegenerateInterval> degenerate;
    double min_abs_h = 0.0;                   // over [-1, 1]
};

HeightRoots height_roots(const HeightFunction& hf, std::span<const double> x,
                         const CertifyOptions& opts = {});
HeightRoots height_roots(const PiecewiseSystem& sys, const TransitionFunction& psi,
                         std::span<const double> x, const CertifyOptions& opts = {});

enum class Verdict { SlidingCertified, SewingCertified, Indeterminate };

const char* to_string(Verdict v);

/// Sliding is certified by a transversal zero of h (the point projects from
/// NH), sewing by h having no zero at all; everything in between is
/// Indeterminate.
struct SlidingCertificate {
    Verdict verdict = Verdict::Indeterminate;
    std::optional<HeightRoot> witness;  // set for SlidingCertified
    std::vector<HeightRoot> roots;
    std::vector<DegenerateInterval> degenerate;
    double min_abs_h = 0.0;
};

SlidingCertificate certify(const HeightFunction& hf, std::span<const double> x,
                           const CertifyOptions& opts = {});
SlidingCertificate certify(const PiecewiseSystem& sys, const TransitionFunction& psi,
                           std::span<const double> x, const CertifyOptions& opts = {});

/// Transversal root preferred for tracking: the first attracting one
/// (dh/dt < 0), else the first transversal one.
std::optional<HeightRoot> preferred_root(const HeightRoots& roots, double transversality_tol);

}  // namespace filippov
