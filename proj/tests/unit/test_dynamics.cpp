#include <doctest.h>

#include <numbers>
#include <random>

#include "../support.hpp"
#include "filippov/dynamics.hpp"

using namespace filippov;
using testing::fold;
using testing::sink;

namespace {

const TransitionFunction& smoothstep() {
    static const auto psi = make_transition(Smoothstep{});
    return psi;
}

VectorField regularized(const PiecewiseSystem& sys, const TransitionFunction& psi, double eps) {
    return [&sys, &psi, eps](double, std::span<const double> p, std::span<double> dp) {
        const auto v = regularized_field(sys, psi, eps, p);
        std::copy(v.begin(), v.end(), dp.begin());
    };
}

int count(const Trajectory& t, EventKind k) {
    return static_cast<int>(std::count_if(t.events.begin(), t.events.end(), [&](const Event& e) { return e.kind == k; }));
}

void check_monotone_times(const Trajectory& t) {
    for (std::size_t i = 1; i < t.times.size(); ++i) CHECK(t.times[i] > t.times[i - 1]);
}

}  // namespace

TEST_CASE("linear flow") {
    const VectorField f = [](double, std::span<const double>, std::span<double> d) { d[0] = -1.0; };
    const std::array<double, 1> y0{1.0};
    const auto tr = integrate(f, y0, 0.0, 2.0);
    CHECK(tr.stop == StopReason::Completed);
    CHECK(tr.final_time() == 2.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) worst = std::max(worst, std::fabs(tr.states[i][0] - (1 - tr.times[i])));
    for (double t = 0.0; t <= 2.0; t += 0.01) worst = std::max(worst, std::fabs(tr.state_at(t)[0] - (1 - t)));
    CHECK(worst < 1e-12);
    check_monotone_times(tr);
}

TEST_CASE("harmonic oscillator keeps its energy") {
    const VectorField f = [](double, std::span<const double> x, std::span<double> d) {
        d[0] = x[1];
        d[1] = -x[0];
    };
    const std::array<double, 2> x0{1.0, 0.0};
    const auto tr = integrate(f, x0, 0.0, 2 * std::numbers::pi);
    double drift = 0.0;
    for (const auto& s : tr.states) drift = std::max(drift, std::fabs(s[0] * s[0] + s[1] * s[1] - 1.0));
    CHECK(drift < 1e-7);
    CHECK(std::fabs(tr.final_state()[0] - 1.0) < 1e-6);
}

TEST_CASE("adaptive and fine fixed-step runs agree") {
    const auto sys = sink();
    const auto f = regularized(sys, smoothstep(), 0.1);
    const std::array<double, 2> x0{0.0, 1.0};
    const auto a = integrate(f, x0, 0.0, 2.0);
    IntegrateOptions rk4;
    rk4.method = Method::RK4;
    rk4.fixed_step = 1e-4;
    const auto b = integrate(f, x0, 0.0, 2.0, rk4);
    CHECK(b.final_time() == 2.0);
    for (int i = 0; i < 2; ++i) CHECK(std::fabs(a.final_state()[i] - b.final_state()[i]) < 1e-7);
}

TEST_CASE("time reversal of smooth arcs") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 10; ++k) {
        const auto rs = testing::RandomSystem::draw(rng);
        const auto sys = rs.build();
        const VectorField fwd = [&](double, std::span<const double> p, std::span<double> d) { sys.plus().eval(p, d); };
        const VectorField bwd = [&](double, std::span<const double> p, std::span<double> d) {
            sys.plus().eval(p, d);
            for (auto& v : d) v = -v;
        };
        const std::array<double, 2> x0{0.5 * u(rng), 0.5 * u(rng)};
        const auto there = integrate(fwd, x0, 0.0, 0.5);
        const auto back = integrate(bwd, there.final_state(), 0.0, 0.5);
        for (int i = 0; i < 2; ++i) CHECK(std::fabs(back.final_state()[i] - x0[i]) < 1e-6);
    }
}

TEST_CASE("raw sign field ends in a step failure") {
    const VectorField f = [](double, std::span<const double> y, std::span<double> d) {
        d[0] = y[0] > 0 ? -1.0 : (y[0] < 0 ? 1.0 : 0.0);
    };
    const std::array<double, 1> y0{1.0};
    IntegrateOptions opts;
    opts.max_steps = 100000;
    const auto tr = integrate(f, y0, 0.0, 2.0, opts);
    CHECK(tr.stop == StopReason::StepFailure);
    REQUIRE_FALSE(tr.events.empty());
    CHECK(tr.events.back().kind == EventKind::StepFailure);
    CHECK(std::fabs(tr.final_state()[0]) < 1e-6);
}

TEST_CASE("hybrid orbit of the sink") {
    const std::array<double, 2> x0{0.0, 1.0};
    const auto tr = integrate_filippov(sink(), x0, 0.0, 2.0);
    CHECK(tr.stop == StopReason::Completed);
    REQUIRE(tr.events.size() == 2);
    CHECK(tr.events[0].kind == EventKind::SigmaHit);
    CHECK(tr.events[1].kind == EventKind::SlideEntry);
    CHECK(std::fabs(tr.events[0].time - 1.0) < 1e-9);
    CHECK(std::fabs(tr.events[0].state[0] - 1.0) < 1e-9);
    CHECK(tr.events[0].state[1] == 0.0);
    CHECK(tr.final_time() == 2.0);
    CHECK(std::fabs(tr.final_state()[0] - 2.0) < 1e-9);
    CHECK(std::fabs(tr.final_state()[1]) < 1e-9);
    check_monotone_times(tr);
}

TEST_CASE("sliding on the fold exits where lambda reaches one") {
    const std::array<double, 2> x0{-1.0, 0.0};
    const auto tr = integrate_filippov(fold(), x0, 0.0, 1.5);
    CHECK(tr.stop == StopReason::Completed);
    REQUIRE(count(tr, EventKind::SlideEntry) == 1);
    REQUIRE(count(tr, EventKind::SlideExit) == 1);
    const auto& exit = tr.events.back();
    CHECK(exit.kind == EventKind::SlideExit);
    CHECK(std::fabs(exit.time - 1.0) < 1e-9);
    CHECK(std::fabs(exit.state[0]) < 1e-9);
    // leaves along X_plus with x' = 1, y' = 2x, so y = x^2 afterwards
    CHECK(tr.final_state()[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(tr.final_state()[1] == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("sewing crossing") {
    const auto sys = testing::planar("1", "-1", "1", "-1");
    const std::array<double, 2> x0{0.0, 1.0};
    const auto tr = integrate_filippov(sys, x0, 0.0, 2.0);
    CHECK(tr.stop == StopReason::Completed);
    CHECK(count(tr, EventKind::SigmaHit) == 1);
    CHECK(count(tr, EventKind::SlideEntry) == 0);
    CHECK(count(tr, EventKind::SlideExit) == 0);
    CHECK(tr.final_state()[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(tr.final_state()[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("arrival at a singular point stops the run") {
    // the orbit from (0, -1) reaches the locus at x = 1, where a_plus = x - 1 vanishes
    const auto sys = testing::planar("1", "x - 1", "1", "1");
    const std::array<double, 2> x0{0.0, -1.0};
    const auto tr = integrate_filippov(sys, x0, 0.0, 5.0);
    CHECK(tr.stop == StopReason::UnresolvedSingularity);
    CHECK(std::fabs(tr.final_time() - 1.0) < 1e-9);
    CHECK(tr.events.back().kind == EventKind::SigmaHit);
}

TEST_CASE("property: events are consistent with the classification") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(-1, 1);
    int entries = 0, crossings = 0;
    for (int k = 0; k < 40; ++k) {
        const auto sys = testing::RandomSystem::draw(rng).build();
        const std::array<double, 2> x0{0.5 * u(rng), 0.5 * u(rng)};
        const auto tr = integrate_filippov(sys, x0, 0.0, 2.0);
        check_monotone_times(tr);
        for (std::size_t i = 0; i < tr.events.size(); ++i) {
            const auto& e = tr.events[i];
            const std::array<double, 1> x{e.state[0]};
            if (e.kind == EventKind::SlideEntry) {
                ++entries;
                CHECK(classify_point(sys, x) == SigmaClass::Sliding);
            }
            const bool crossing = e.kind == EventKind::SigmaHit &&
                                  (i + 1 == tr.events.size() || tr.events[i + 1].kind != EventKind::SlideEntry) &&
                                  !(i + 1 == tr.events.size() && tr.stop == StopReason::UnresolvedSingularity);
            if (crossing) {
                ++crossings;
                CHECK(classify_point(sys, x) == SigmaClass::Sewing);
            }
            const auto s = tr.state_at(e.time);
            for (std::size_t j = 0; j < s.size(); ++j) CHECK(std::fabs(s[j] - e.state[j]) < 1e-9);
        }
    }
    CHECK(entries > 0);
    CHECK(crossings > 0);
}

TEST_CASE("manifold of the sink is the locus itself") {
    std::vector<std::vector<double>> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back({-1.0 + 0.2 * i});
    const auto m = track_manifold(sink(), smoothstep(), 0.1, grid);
    REQUIRE(m.samples.size() == grid.size());
    for (const auto& p : m.points()) CHECK(std::fabs(p[1]) < 1e-12);
}

TEST_CASE("manifold of the fold") {
    std::vector<std::vector<double>> grid;
    for (int i = 0; i <= 90; ++i) grid.push_back({-1.0 + 0.01 * i});
    const auto m = track_manifold(fold(), smoothstep(), 0.1, grid);
    REQUIRE(m.samples.size() == grid.size());
    for (const auto& s : m.samples) {
        CHECK(testing::smoothstep(s.t) == doctest::Approx((s.x[0] + 1) / (1 - s.x[0])).epsilon(1e-10));
        CHECK(std::fabs(s.dh_dt) > 1e-8);
    }
    const std::vector<std::vector<double>> bad{{-0.5}, {0.5}};
    try {
        track_manifold(fold(), smoothstep(), 0.1, bad);
        FAIL("expected NoSlidingAt");
    } catch (const NoSlidingAt& e) {
        CHECK(e.point() == std::vector<double>{0.5});
    }
    const auto rec = track_manifold(fold(), smoothstep(), 0.1, bad, ExclusionPolicy::Record);
    CHECK(rec.samples.size() == 1);
    REQUIRE(rec.excluded.size() == 1);
    CHECK(rec.excluded[0].x == std::vector<double>{0.5});
    CHECK_THROWS_AS(track_manifold(fold(), smoothstep(), 0.0, grid), std::invalid_argument);
}

TEST_CASE("hausdorff distance") {
    const std::vector<std::vector<double>> a{{0.0}, {1.0}};
    CHECK(hausdorff(a, a) == 0.0);
    CHECK(hausdorff({{0.0}}, {{3.0}}) == 3.0);
    CHECK(hausdorff({{0.0}, {10.0}}, {{0.0}}) == 10.0);
    CHECK_THROWS_AS(hausdorff({}, a), std::invalid_argument);
    CHECK_THROWS_AS(hausdorff(a, {{0.0, 1.0}}), std::invalid_argument);

    std::vector<std::vector<double>> grid;
    for (int i = 0; i <= 90; ++i) grid.push_back({-1.0 + 0.01 * i});
    const auto m = track_manifold(fold(), smoothstep(), 0.05, grid);
    std::vector<std::vector<double>> sigma;
    for (const auto& g : grid) sigma.push_back({g[0], 0.0});
    CHECK(hausdorff(m.points(), sigma) <= 0.05);
}

TEST_CASE("property: linear convergence of the manifold to the locus") {
    std::vector<std::vector<double>> grid, sigma;
    for (int i = 0; i <= 80; ++i) {
        grid.push_back({-0.9 + 0.01 * i});
        sigma.push_back({-0.9 + 0.01 * i, 0.0});
    }
    double prev = 0.0;
    for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
        const auto m = track_manifold(fold(), smoothstep(), eps, grid);
        double tmax = 0.0;
        for (const auto& s : m.samples) tmax = std::max(tmax, std::fabs(s.t));
        const double d = hausdorff(m.points(), sigma);
        CHECK(d <= eps * tmax * (1 + 1e-12));
        if (prev > 0.0) CHECK(std::fabs(d / prev - 0.5) <= 0.025);
        prev = d;
    }
}

TEST_CASE("property: the sink manifold is invariant under the regularized flow") {
    for (double t0 : {-0.6, 0.0, 0.3}) {
        const auto psi = make_transition(Biased{t0});
        const auto sys = sink();
        const double eps = 0.1;
        const std::array<double, 2> p{0.4, eps * t0};
        CHECK(regularized_field(sys, psi, eps, p)[1] == 0.0);
        const auto tr = integrate(regularized(sys, psi, eps), p, 0.0, 10.0);
        for (const auto& s : tr.states) CHECK(std::fabs(s[1] - eps * t0) < 1e-9);
    }
}

TEST_CASE("equilibria on the manifold") {
    const auto sys = testing::quadratic_drift();
    const auto below = equilibria_on_manifold(sys, make_transition(Biased{-0.5}), 0.02, -1.0, 1.0);
    REQUIRE(below.size() == 2);
    CHECK(std::fabs(below[0].x + 0.1) < 1e-9);
    CHECK(std::fabs(below[1].x - 0.1) < 1e-9);
    CHECK(below[0].stability == -1);
    CHECK(below[1].stability == 1);
    const auto middle = equilibria_on_manifold(sys, smoothstep(), 0.02, -1.0, 1.0);
    REQUIRE(middle.size() == 1);
    CHECK(std::fabs(middle[0].x) < 1e-6);
    CHECK(middle[0].stability == 0);
    CHECK(equilibria_on_manifold(sys, make_transition(Biased{0.5}), 0.02, -1.0, 1.0).empty());
    CHECK_THROWS_AS(equilibria_on_manifold(sys, smoothstep(), 0.0, -1.0, 1.0), std::invalid_argument);
}
