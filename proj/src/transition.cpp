#include "filippov/transition.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "filippov/scan.hpp"

namespace filippov {

namespace {

double smoothstep(double s) { return 0.5 * (3.0 * s - s * s * s); }
double smoothstep_dt(double s) { return 1.5 * (1.0 - s * s); }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_point(std::span<const double> x, double t) {
    std::ostringstream os;
    os << "(x=[";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << "], t=" << t << ")";
    return os.str();
}

// deterministic sample of locus points used by validation
std::vector<std::vector<double>> validation_points(std::size_t dim) {
    std::vector<std::vector<double>> pts;
    pts.emplace_back(dim, 0.0);
    if (dim == 0) return pts;
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int k = 0; k < 8; ++k) {
        std::vector<double> p(dim);
        for (auto& v : p) v = dist(rng);
        pts.push_back(std::move(p));
    }
    return pts;
}

}  // namespace

double TransitionFunction::interior_value(std::span<const double> x, double t) const {
    return std::visit(
        overloaded{
            [&](const Smoothstep&) { return smoothstep(t); },
            [&](const Overshoot&) {
                const double w = 1.0 - t * t;
                return smoothstep(t) + bump_ * w * w;
            },
            [&](const Biased& b) { return smoothstep((t - b.zero) / (1.0 - b.zero * t)); },
            [&](const Custom&) {
                if (x.size() + 1 != variables_.size())
                    throw std::invalid_argument("custom transition expects " +
                                                std::to_string(variables_.size() - 1) +
                                                " locus coordinates");
                std::vector<double> vals(x.begin(), x.end());
                vals.push_back(t);
                return body_(vals);
            },
        },
        spec_);
}

double TransitionFunction::interior_derivative(std::span<const double> x, double t) const {
    return std::visit(
        overloaded{
            [&](const Smoothstep&) { return smoothstep_dt(t); },
            [&](const Overshoot&) { return (1.0 - t * t) * (1.5 - 4.0 * bump_ * t); },
            [&](const Biased& b) {
                const double den = 1.0 - b.zero * t;
                const double g = (t - b.zero) / den;
                return smoothstep_dt(g) * (1.0 - b.zero * b.zero) / (den * den);
            },
            [&](const Custom&) {
                if (x.size() + 1 != variables_.size())
                    throw std::invalid_argument("custom transition expects " +
                                                std::to_string(variables_.size() - 1) +
                                                " locus coordinates");
                std::vector<double> vals(x.begin(), x.end());
                vals.push_back(t);
                return body_dt_(vals);
            },
        },
        spec_);
}

double TransitionFunction::value(std::span<const double> x, double t) const {
    if (t < -1.0) return -1.0;
    if (t > 1.0) return 1.0;
    if (!std::holds_alternative<Custom>(spec_) && (t == -1.0 || t == 1.0)) return t;
    return interior_value(x, t);
}

double TransitionFunction::derivative(std::span<const double> x, double t) const {
    if (t <= -1.0 || t >= 1.0) return 0.0;
    return interior_derivative(x, t);
}

bool TransitionFunction::is_monotone() const noexcept {
    return std::holds_alternative<Smoothstep>(spec_) || std::holds_alternative<Biased>(spec_);
}

std::optional<double> TransitionFunction::known_zero() const {
    if (std::holds_alternative<Smoothstep>(spec_)) return 0.0;
    if (const auto* b = std::get_if<Biased>(&spec_)) return b->zero;
    return std::nullopt;
}

std::string TransitionFunction::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const Smoothstep&) { os << "smoothstep"; },
                   [&](const Overshoot& o) { os << "overshoot(M=" << o.max_value << ")"; },
                   [&](const Biased& b) { os << "biased(t0=" << b.zero << ")"; },
                   [&](const Custom& c) { os << "custom(" << expr::to_string(c.body) << ")"; },
               },
               spec_);
    return os.str();
}

double interior_max(const TransitionFunction& psi, std::span<const double> x) {
    constexpr int kCells = 2000;
    int best = 1;
    double fbest = -std::numeric_limits<double>::infinity();
    auto t_at = [](int i) { return -1.0 + 2.0 * static_cast<double>(i) / kCells; };
    for (int i = 1; i < kCells; ++i) {
        const double v = psi.value(x, t_at(i));
        if (v > fbest) {
            fbest = v;
            best = i;
        }
    }
    const double t = scan::golden_min([&](double s) { return -psi.value(x, s); }, t_at(best - 1),
                                      t_at(best + 1), 1e-13);
    return std::max(fbest, psi.value(x, t));
}

TransitionFunction make_transition(const TransitionSpec& spec) {
    TransitionFunction psi(spec);
    std::size_t dim = 0;

    if (const auto* o = std::get_if<Overshoot>(&spec)) {
        if (!(o->max_value > 1.0) || !std::isfinite(o->max_value))
            throw ValidationFailure("overshoot: interior maximum M must exceed 1 (got " +
                                    std::to_string(o->max_value) + ")");
        // the interior max is increasing in c and equals 1 at c = 3/8
        auto max_for = [&](double c) {
            psi.bump_ = c;
            return interior_max(psi);
        };
        double lo = 0.375;
        double hi = 1.0;
        while (max_for(hi) < o->max_value) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (max_for(mid) < o->max_value)
                lo = mid;
            else
                hi = mid;
        }
        psi.bump_ = 0.5 * (lo + hi);
    } else if (const auto* b = std::get_if<Biased>(&spec)) {
        if (!(std::fabs(b->zero) < 1.0))
            throw ValidationFailure("biased: zero t0 must lie in (-1, 1) (got " +
                                    std::to_string(b->zero) + ")");
    } else if (const auto* c = std::get_if<Custom>(&spec)) {
        dim = c->coordinates.size();
        psi.variables_ = c->coordinates;
        psi.variables_.push_back("t");
        for (const auto& v : c->body.free_variables()) {
            if (std::find(psi.variables_.begin(), psi.variables_.end(), v) == psi.variables_.end())
                throw ValidationFailure("custom transition uses unknown variable '" + v + "'");
        }
        psi.body_ = expr::Program(c->body, psi.variables_);
        psi.body_dt_ = expr::Program(expr::differentiate(c->body, "t"), psi.variables_);
    }

    constexpr double kTol = 1e-9;
    for (const auto& x : validation_points(dim)) {
        for (double t : {-1.0, -1.5, -10.0, 1.0, 1.5, 10.0}) {
            double v = 0.0;
            try {
                v = psi.value(x, t);
            } catch (const expr::EvaluationError& e) {
                throw ValidationFailure(std::string("transition not evaluable at ") + format_point(x, t) +
                                        ": " + e.what());
            }
            const double want = t < 0.0 ? -1.0 : 1.0;
            if (!(std::fabs(v - want) <= kTol))
                throw ValidationFailure("boundary condition psi = " + std::to_string(want) +
                                        " violated at " + format_point(x, t) + ": psi = " +
                                        std::to_string(v));
        }
        if (psi.is_monotone()) {
            for (int k = 1; k < 200; ++k) {
                const double t = -1.0 + 2.0 * k / 200.0;
                if (!(psi.derivative(x, t) > 0.0))
                    throw ValidationFailure("monotone transition has dpsi/dt <= 0 at " +
                                            format_point(x, t));
            }
        }
    }
    if (const auto* o = std::get_if<Overshoot>(&spec)) {
        const double m = interior_max(psi);
        if (!(std::fabs(m - o->max_value) <= 1e-8))
            throw ValidationFailure("overshoot: calibrated maximum " + std::to_string(m) +
                                    " differs from M = " + std::to_string(o->max_value));
    }
    return psi;
}

}  // namespace filippov
