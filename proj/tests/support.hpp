#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "filippov/system.hpp"
#include "filippov/transition.hpp"

namespace testing {

using filippov::PiecewiseSystem;
using filippov::VectorFieldDef;
using filippov::expr::Expr;
using filippov::expr::parse;

inline VectorFieldDef field(std::vector<std::string> coords, const std::vector<std::string>& comps) {
    std::vector<Expr> e;
    for (const auto& c : comps) e.push_back(parse(c));
    return VectorFieldDef(std::move(coords), std::move(e));
}

inline PiecewiseSystem planar(const std::string& bp, const std::string& ap, const std::string& bm,
                              const std::string& am) {
    return PiecewiseSystem(field({"x", "y"}, {bp, ap}), field({"x", "y"}, {bm, am}));
}

// descends onto y = 0 from both sides and moves right at unit speed
inline PiecewiseSystem sink() { return planar("1", "-1", "1", "1"); }

// a_plus = 2x, a_minus = 2
inline PiecewiseSystem fold() { return planar("1", "(x+1)+(x-1)", "1", "(x+1)-(x-1)"); }

inline PiecewiseSystem quadratic_drift() { return planar("x^2 + y", "-1", "x^2 + y", "1"); }

inline double smoothstep(double t) {
    if (t <= -1) return -1;
    if (t >= 1) return 1;
    return 1.5 * t - 0.5 * t * t * t;
}

inline double smoothstep_slope(double t) { return std::fabs(t) >= 1 ? 0.0 : 1.5 * (1 - t * t); }

/// Quadratic in (x, y): c0 + c1 x + c2 y + c3 x^2 + c4 x y + c5 y^2.
struct Quadratic {
    std::array<double, 6> c{};

    double operator()(double x, double y) const {
        return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
    }

    std::string text() const {
        auto num = [](double v) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "(%.17g)", v);
            return std::string(buf);
        };
        return num(c[0]) + " + " + num(c[1]) + "*x + " + num(c[2]) + "*y + " + num(c[3]) + "*x^2 + " +
               num(c[4]) + "*x*y + " + num(c[5]) + "*y^2";
    }

    static Quadratic random(std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Quadratic q;
        for (auto& v : q.c) v = u(rng);
        return q;
    }
};

/// Random planar system with quadratic components; the raw coefficients are
/// kept so tests can evaluate without the expression engine.
struct RandomSystem {
    Quadratic bp, ap, bm, am;

    PiecewiseSystem build() const { return planar(bp.text(), ap.text(), bm.text(), am.text()); }

    static RandomSystem draw(std::mt19937_64& rng) {
        RandomSystem s;
        s.bp = Quadratic::random(rng);
        s.ap = Quadratic::random(rng);
        s.bm = Quadratic::random(rng);
        s.am = Quadratic::random(rng);
        return s;
    }
};

}  // namespace testing
