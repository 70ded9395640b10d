#include <doctest.h>

#include <random>

#include "../support.hpp"
#include "filippov/cross.hpp"

using namespace filippov;

namespace {

const std::vector<std::string> kXYZ{"x", "y", "z"};

// X_{ab} = (-a, -b, 1)
CrossSystem funnel(const TransitionSpec& phi, const TransitionSpec& psi) {
    return CrossSystem(testing::field(kXYZ, {"-1", "-1", "1"}), testing::field(kXYZ, {"-1", "1", "1"}),
                       testing::field(kXYZ, {"1", "-1", "1"}), testing::field(kXYZ, {"1", "1", "1"}),
                       make_transition(phi), make_transition(psi));
}

CrossSystem generic(std::mt19937_64& rng) {
    auto q = [&] { return testing::Quadratic::random(rng).text(); };
    const auto f = [&] {
        // quadratics in x and y plus a z term
        return testing::field(kXYZ, {q(), q(), q() + " + z"});
    };
    return CrossSystem(f(), f(), f(), f(), make_transition(Overshoot{2.0}), make_transition(Biased{0.2}));
}

}  // namespace

TEST_CASE("double regularization of the funnel") {
    const auto cs = funnel(Biased{0.3}, Smoothstep{});
    const double eps = 0.2, eta = 0.05;
    const auto psi = make_transition(Biased{0.3});
    for (double x : {-0.3, -0.1, 0.0, 0.06, 0.15, 0.4}) {
        for (double y : {-0.1, -0.02, 0.0, 0.03, 0.2}) {
            const std::array<double, 3> p{x, y, 0.7};
            const auto v = double_regularized_field(cs, eps, eta, p);
            CHECK(v[0] == doctest::Approx(-psi.value(x / eps)).epsilon(1e-14));
            CHECK(v[1] == doctest::Approx(-testing::smoothstep(y / eta)).epsilon(1e-14));
            CHECK(v[2] == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    const auto smooth = funnel(Smoothstep{}, Smoothstep{});
    const std::array<double, 3> origin{0.0, 0.0, 0.3};
    CHECK(double_regularized_field(smooth, 0.1, 0.1, origin) == std::vector<double>{0.0, 0.0, 1.0});
    CHECK_THROWS_AS(double_regularized_field(smooth, 0.0, 0.1, origin), std::invalid_argument);
    CHECK_THROWS_AS(double_regularized_field(smooth, 0.1, -1.0, origin), std::invalid_argument);
}

TEST_CASE("cross systems are validated") {
    const auto psi = make_transition(Smoothstep{});
    const auto f = testing::field(kXYZ, {"1", "1", "1"});
    const auto g = testing::field({"x", "y", "w"}, {"1", "1", "1"});
    CHECK_THROWS_AS(CrossSystem(f, f, f, g, psi, psi), std::invalid_argument);
    const auto two = testing::field({"x", "y"}, {"1", "1"});
    CHECK_THROWS_AS(CrossSystem(two, two, two, two, psi, psi), std::invalid_argument);
    const auto dep = make_transition(Custom{expr::parse("t"), {"x"}});
    CHECK_THROWS_AS(CrossSystem(f, f, f, f, dep, psi), ValidationFailure);
    CHECK_THROWS_AS(funnel(Smoothstep{}, Smoothstep{}).field(0, 1), std::invalid_argument);
}

TEST_CASE("property: weights are a partition of unity") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-1, 1);
    const auto mono = funnel(Biased{-0.4}, Smoothstep{});
    const auto over = funnel(Overshoot{2.0}, Smoothstep{});
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng), y = u(rng);
        const auto w = cross_weights(mono, 0.5, 0.3, x, y);
        CHECK(w[0] + w[1] + w[2] + w[3] == doctest::Approx(1.0).epsilon(1e-15));
        for (double v : w) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        const auto o = cross_weights(over, 0.5, 0.3, x, y);
        CHECK(o[0] + o[1] + o[2] + o[3] == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("property: quadrant fields are recovered outside the band") {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> u(-1, 1);
    const auto cs = generic(rng);
    const double eps = 0.1, eta = 0.2;
    for (int i = 0; i < 100; ++i) {
        const double x = (u(rng) > 0 ? 1 : -1) * (eps + std::fabs(u(rng)));
        const double y = (u(rng) > 0 ? 1 : -1) * (eta + std::fabs(u(rng)));
        const std::array<double, 3> p{x, y, u(rng)};
        const auto v = double_regularized_field(cs, eps, eta, p);
        const auto expected = cs.field(x > 0 ? 1 : -1, y > 0 ? 1 : -1).eval(p);
        for (int k = 0; k < 3; ++k) CHECK(v[k] == expected[k]);
    }
}

TEST_CASE("stratified curve") {
    const auto smooth = stratified_slide_curve(funnel(Smoothstep{}, Smoothstep{}), 0.1, 0.1);
    CHECK(smooth.x == 0.0);
    CHECK(smooth.y == 0.0);
    CHECK(smooth.hausdorff == 0.0);

    const auto c = stratified_slide_curve(funnel(Biased{0.3}, Biased{-0.2}), 0.1, 0.01);
    CHECK(c.t0 == 0.3);
    CHECK(c.u0 == -0.2);
    CHECK(c.x == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(c.y == doctest::Approx(-0.002).epsilon(1e-15));
    CHECK(c.residual_x < 1e-12);
    CHECK(c.residual_y < 1e-12);
    CHECK(c.hausdorff <= c.bound + 1e-15);
    CHECK(c.z_samples.size() == 21);
}

TEST_CASE("property: the curve approaches the axis as both parameters shrink") {
    const auto cs = funnel(Biased{0.3}, Biased{-0.2});
    double prev = 1e300;
    for (double s : {0.1, 0.05, 0.025}) {
        const auto c = stratified_slide_curve(cs, s, s);
        CHECK(c.hausdorff < prev);
        CHECK(c.hausdorff <= c.bound + 1e-15);
        prev = c.hausdorff;
    }
}

TEST_CASE("zeros of transitions") {
    CHECK(unique_zero(make_transition(Biased{0.45})) == 0.45);
    CHECK(unique_zero(make_transition(Custom{expr::parse("t^3"), {}})) == 0.0);
    const auto lifted = make_transition(Custom{expr::parse("t^3 + 0.2*(1 - t^2)"), {}});
    const double z = unique_zero(lifted);
    CHECK(std::fabs(z * z * z + 0.2 * (1 - z * z)) < 1e-12);
    CHECK(z < 0.0);
    const auto wiggle = make_transition(Custom{expr::parse("t^3 - 0.5*t*(1 - t^2)"), {}});
    CHECK_THROWS_AS(unique_zero(wiggle), NonMonotoneTransition);
}
