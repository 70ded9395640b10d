#include <doctest.h>

#include <random>

#include "../support.hpp"
#include "filippov/regular.hpp"

using namespace filippov;
using testing::fold;
using testing::sink;

namespace {

const TransitionFunction& smoothstep() {
    static const auto psi = make_transition(Smoothstep{});
    return psi;
}

SlidingCertificate cert(const PiecewiseSystem& sys, const TransitionFunction& psi, double x) {
    const std::array<double, 1> p{x};
    return certify(sys, psi, p);
}

}  // namespace

TEST_CASE("regularized field") {
    const auto sys = sink();
    const auto at = [&](double y) {
        const std::array<double, 2> p{0.7, y};
        return regularized_field(sys, smoothstep(), 0.1, p);
    };
    CHECK(at(0.2) == std::vector<double>{1.0, -1.0});
    CHECK(at(-0.2) == std::vector<double>{1.0, 1.0});
    CHECK(at(0.0) == std::vector<double>{1.0, 0.0});
    CHECK(at(0.05)[1] == doctest::Approx(-0.6875).epsilon(1e-15));
    const std::array<double, 2> p{0.0, 0.0};
    CHECK_THROWS_AS(regularized_field(sys, smoothstep(), 0.0, p), std::invalid_argument);
    CHECK_THROWS_AS(regularized_field(sys, smoothstep(), -1.0, p), std::invalid_argument);
}

TEST_CASE("property: regularization equals the one-sided fields outside the band") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1, 1);
    const auto rs = testing::RandomSystem::draw(rng);
    const auto sys = rs.build();
    const auto psi = make_transition(Overshoot{2.5});
    for (int i = 0; i < 100; ++i) {
        const double eps = 0.01 + 0.2 * std::fabs(u(rng));
        const double x = u(rng);
        const double y = (u(rng) > 0 ? 1 : -1) * (eps + std::fabs(u(rng)));
        const std::array<double, 2> p{x, y};
        const auto v = regularized_field(sys, psi, eps, p);
        const auto& b = y > 0 ? rs.bp : rs.bm;
        const auto& a = y > 0 ? rs.ap : rs.am;
        CHECK(v[0] == doctest::Approx(b(x, y)).epsilon(1e-12));
        CHECK(v[1] == doctest::Approx(a(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("height function") {
    const std::array<double, 1> x{0.3};
    const auto h0 = height(sink(), smoothstep(), x, 0.0);
    CHECK(h0.h == 0.0);
    CHECK(h0.dh_dt == -3.0);
    const std::array<double, 1> one{1.0};
    for (double t : {-2.0, -0.3, 0.0, 0.8, 3.0}) CHECK(height(fold(), smoothstep(), one, t).h == 4.0);

    const auto doubled = PiecewiseSystem(fold().plus().scaled(Expr::constant(2)), fold().minus().scaled(Expr::constant(2)));
    const std::array<double, 1> xm{-0.4};
    for (double t : {-0.5, 0.1, 0.9})
        CHECK(height(doubled, smoothstep(), xm, t).h == 2.0 * height(fold(), smoothstep(), xm, t).h);

    const HeightFunction hf(fold(), smoothstep());
    CHECK(expr::evaluate(hf.trace_plus(), {{"x", 0.25}}) == 0.5);
    CHECK(expr::evaluate(hf.trace_minus(), {{"x", 0.25}}) == 2.0);
}

TEST_CASE("height roots") {
    const std::array<double, 1> x{0.3};
    const auto r = height_roots(sink(), smoothstep(), x);
    REQUIRE(r.roots.size() == 1);
    CHECK(std::fabs(r.roots[0].t) < 1e-12);
    CHECK(r.roots[0].dh_dt == doctest::Approx(-3.0));
    CHECK(r.degenerate.empty());

    const std::array<double, 1> one{1.0};
    const auto none = height_roots(fold(), smoothstep(), one);
    CHECK(none.roots.empty());
    CHECK(none.min_abs_h == 4.0);

    const std::array<double, 1> zero{0.0};
    const auto edge = height_roots(fold(), smoothstep(), zero);
    REQUIRE(edge.roots.size() == 1);
    CHECK(edge.roots[0].t == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::fabs(edge.roots[0].dh_dt) < 1e-8);
    // a_plus vanishes, so h = 2 a_plus = 0 on the whole ray t >= 1
    REQUIRE(edge.degenerate.size() == 1);
    CHECK(std::isinf(edge.degenerate[0].t_hi));
}

TEST_CASE("degenerate intervals when both traces vanish") {
    const auto sys = testing::planar("1", "y", "1", "-y");
    const std::array<double, 1> x{0.5};
    const auto r = height_roots(sys, smoothstep(), x);
    CHECK(r.roots.empty());
    REQUIRE(r.degenerate.size() == 1);
    CHECK(std::isinf(r.degenerate[0].t_lo));
    CHECK(std::isinf(r.degenerate[0].t_hi));
    CHECK(certify(sys, smoothstep(), x).verdict == Verdict::Indeterminate);
}

TEST_CASE("certificates on the fold") {
    CHECK(cert(fold(), smoothstep(), -0.5).verdict == Verdict::SlidingCertified);
    CHECK(cert(fold(), smoothstep(), 0.5).verdict == Verdict::SewingCertified);
    CHECK(cert(fold(), smoothstep(), 0.0).verdict == Verdict::Indeterminate);
    const auto over = make_transition(Overshoot{2.0});
    const auto at0 = cert(fold(), over, 0.0);
    CHECK(at0.verdict == Verdict::SlidingCertified);
    REQUIRE(at0.witness);
    CHECK(std::fabs(at0.witness->dh_dt) > 1e-8);
    CHECK(cert(fold(), over, 0.5).verdict == Verdict::SewingCertified);
    // inside (0, 1/3) the overshoot produces two transversal roots
    CHECK(cert(fold(), over, 0.2).roots.size() == 2);
}

TEST_CASE("certified boundary of the fold under overshoot") {
    for (double M : {1.5, 2.0, 4.0}) {
        const auto psi = make_transition(Overshoot{M});
        const double expected = (M - 1) / (M + 1);
        double lo = 0.0, hi = 0.9;
        REQUIRE(cert(fold(), psi, lo).verdict == Verdict::SlidingCertified);
        REQUIRE(cert(fold(), psi, hi).verdict == Verdict::SewingCertified);
        while (hi - lo > 1e-10) {
            const double mid = 0.5 * (lo + hi);
            (cert(fold(), psi, mid).verdict == Verdict::SlidingCertified ? lo : hi) = mid;
        }
        CHECK(std::fabs(lo - expected) < 1e-6);
    }
}

TEST_CASE("property: monotone certificates reproduce the sign test") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-1, 1);
    const auto biased = make_transition(Biased{0.4});
    int decided = 0;
    for (int k = 0; k < 50; ++k) {
        const auto rs = testing::RandomSystem::draw(rng);
        const auto sys = rs.build();
        const HeightFunction hs(sys, smoothstep());
        const HeightFunction hb(sys, biased);
        for (int j = 0; j < 100; ++j) {
            const std::array<double, 1> x{-1.0 + 2.0 * j / 99.0};
            const double ap = rs.ap(x[0], 0), am = rs.am(x[0], 0);
            // margins: the product must be clear of zero and the root clear of t = +-1
            if (std::fabs(ap * am) < 1e-6) continue;
            ++decided;
            const Verdict expected = ap * am < 0 ? Verdict::SlidingCertified : Verdict::SewingCertified;
            CHECK(certify(hs, x).verdict == expected);
            CHECK(certify(hb, x).verdict == expected);
        }
    }
    CHECK(decided > 4900);
}

TEST_CASE("property: height is affine in the transition value") {
    std::mt19937_64 rng(33);
    const auto psi = make_transition(Overshoot{3.0});
    for (int k = 0; k < 20; ++k) {
        const auto rs = testing::RandomSystem::draw(rng);
        const HeightFunction hf(rs.build(), psi);
        const std::array<double, 1> x{0.37};
        const double ap = rs.ap(x[0], 0), am = rs.am(x[0], 0);
        for (double t = -1.0; t <= 1.0; t += 0.125) {
            const double c = psi.value(t);
            CHECK(hf(x, t).h == doctest::Approx(c * (ap - am) + (ap + am)).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: certificates survive positive rescaling") {
    std::mt19937_64 rng(34);
    const Expr phi = expr::parse("2 + sin(x)");
    const auto over = make_transition(Overshoot{2.0});
    for (int k = 0; k < 10; ++k) {
        const auto sys = testing::RandomSystem::draw(rng).build();
        const PiecewiseSystem scaled(sys.plus().scaled(phi), sys.minus().scaled(phi));
        for (const auto* psi : {&smoothstep(), &over}) {
            for (int j = 0; j <= 20; ++j) {
                const std::array<double, 1> x{-1.0 + 0.1 * j};
                const auto a = certify(sys, *psi, x);
                const auto b = certify(scaled, *psi, x);
                CHECK(a.verdict == b.verdict);
                REQUIRE(a.roots.size() == b.roots.size());
                for (std::size_t i = 0; i < a.roots.size(); ++i) CHECK(std::fabs(a.roots[i].t - b.roots[i].t) < 1e-10);
            }
        }
    }
}

TEST_CASE("property: sewing certificates never have a zero of h") {
    std::mt19937_64 rng(35);
    const auto over = make_transition(Overshoot{2.0});
    for (int k = 0; k < 20; ++k) {
        const auto sys = testing::RandomSystem::draw(rng).build();
        const HeightFunction hf(sys, over);
        for (int j = 0; j <= 20; ++j) {
            const std::array<double, 1> x{-1.0 + 0.1 * j};
            const auto c = certify(hf, x);
            if (c.verdict != Verdict::SewingCertified) continue;
            const double s = hf(x, -1.0).h;
            for (int i = 0; i <= 2000; ++i) CHECK(hf(x, -1.0 + i * 0.001).h * s > 0.0);
        }
    }
}
