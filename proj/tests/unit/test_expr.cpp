#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "filippov/expr.hpp"

using namespace filippov::expr;

namespace {

double eval(const std::string& text, const Bindings& b = {}) { return evaluate(parse(text), b); }

// Random sentence of the grammar. Smooth-only sentences avoid abs, sgn,
// sqrt and division so derivatives can be checked anywhere.
std::string sentence(std::mt19937_64& rng, int depth, bool smooth_only) {
    std::uniform_int_distribution<int> pick(0, smooth_only ? 7 : 11);
    std::uniform_int_distribution<int> small(0, 9);
    const char* vars[] = {"x", "y", "t"};
    if (depth == 0) {
        const int k = small(rng);
        if (k < 5) return vars[k % 3];
        if (k < 8) return std::to_string(small(rng) + 1);
        return "0.25";
    }
    const auto sub = [&] { return sentence(rng, depth - 1, smooth_only); };
    switch (pick(rng)) {
        case 0: return sub() + " + " + sub();
        case 1: return sub() + " - " + sub();
        case 2: return sub() + "*" + sub();
        case 3: return "(" + sub() + ")^" + std::to_string(small(rng) % 4);
        case 4: return "sin(" + sub() + ")";
        case 5: return "cos(" + sub() + ")";
        case 6: return "tanh(" + sub() + ")";
        case 7: return "-(" + sub() + ")";
        case 8: return "abs(" + sub() + ")";
        case 9: return "sgn(" + sub() + ")";
        case 10: return "sqrt(" + sub() + ")";
        default: return sub() + "/(" + sub() + ")";
    }
}

}  // namespace

TEST_CASE("parse builds the expected tree") {
    const Expr e = parse("x^2 + y");
    CHECK(e == Expr::binary(BinaryOp::Add, Expr::power(Expr::variable("x"), 2), Expr::variable("y")));
    CHECK(parse("-x^2") == Expr::unary(UnaryOp::Negate, Expr::power(Expr::variable("x"), 2)));
    CHECK(parse(" 2 *  x") == parse("2*x"));
}

TEST_CASE("evaluate") {
    CHECK(eval("(3*t - t^3)/2", {{"t", 1.0}}) == 1.0);
    CHECK(eval("(3*t - t^3)/2", {{"t", 0.5}}) == 0.6875);
    CHECK(eval("x^2+y", {{"x", 2.0}, {"y", 1.0}}) == 5.0);
    CHECK(eval("sgn(t)", {{"t", -0.5}}) == -1.0);
    CHECK(eval("sgn(0)") == 0.0);
    CHECK(eval("abs(-3) + sqrt(4) + exp(0) + tanh(0)") == 6.0);
    CHECK(eval("2^-1") == 0.5);
    CHECK(eval("1.5e1") == 15.0);
}

TEST_CASE("evaluation errors") {
    CHECK_THROWS_AS(eval("1/x", {{"x", 0.0}}), DomainError);
    CHECK_THROWS_AS(eval("sqrt(x)", {{"x", -1.0}}), DomainError);
    try {
        eval("x + z", {{"x", 1.0}});
        FAIL("expected UnboundVariable");
    } catch (const UnboundVariable& e) {
        CHECK(e.name() == "z");
    }
}

TEST_CASE("syntax errors carry offset and expectation") {
    try {
        parse("sin(x");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 6);
        CHECK(e.expected() == "\")\"");
    }
    CHECK_THROWS_AS(parse(""), SyntaxError);
    CHECK_THROWS_AS(parse("x +"), SyntaxError);
    CHECK_THROWS_AS(parse("x ^ y"), SyntaxError);
    CHECK_THROWS_AS(parse("foo(x)"), SyntaxError);
    CHECK_THROWS_AS(parse("x y"), SyntaxError);
}

TEST_CASE("differentiate") {
    CHECK(evaluate(differentiate(parse("(3*t - t^3)/2"), "t"), {{"t", 0.0}}) == 1.5);
    CHECK(differentiate(parse("x^2 + y"), "x") == parse("2*x"));
    CHECK(differentiate(parse("sin(x)"), "y").is_constant(0.0));
    CHECK(evaluate(differentiate(parse("abs(x)"), "x"), {{"x", -2.0}}) == -1.0);
    CHECK(evaluate(differentiate(parse("abs(x)"), "x"), {{"x", 0.0}}) == 0.0);
    CHECK(differentiate(parse("sgn(x)"), "x").is_constant(0.0));
}

TEST_CASE("substitute and free variables") {
    const Expr e = substitute(parse("x*y + y"), "y", parse("x + 1"));
    CHECK(e.free_variables() == std::set<std::string>{"x"});
    CHECK(evaluate(e, {{"x", 2.0}}) == 9.0);
}

TEST_CASE("program matches evaluate") {
    const Expr e = parse("sin(x)*y^3 - exp(t)/(1 + x^2)");
    const std::vector<std::string> vars{"t", "x", "y"};
    const Program p(e, vars);
    const std::array<double, 3> v{0.3, -1.2, 0.7};
    CHECK(p(v) == evaluate(e, {{"t", 0.3}, {"x", -1.2}, {"y", 0.7}}));
    CHECK_THROWS_AS(Program(parse("z"), vars), UnboundVariable);
}

TEST_CASE("property: print then parse is the identity on parsed trees") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const std::string s = sentence(rng, 4, false);
        const Expr e = parse(s);
        const std::string printed = to_string(e);
        INFO(s << "  ->  " << printed);
        CHECK(parse(printed) == e);
    }
}

TEST_CASE("property: symbolic derivative matches central differences") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    int compared = 0;
    for (int i = 0; i < 200; ++i) {
        const Expr e = parse(sentence(rng, 3, true));
        const Expr d = differentiate(e, "x");
        Bindings b{{"x", u(rng)}, {"y", u(rng)}, {"t", u(rng)}};
        const double h = 1e-6;
        Bindings lo = b;
        Bindings hi = b;
        lo["x"] -= h;
        hi["x"] += h;
        const double fd = (evaluate(e, hi) - evaluate(e, lo)) / (2 * h);
        const double exact = evaluate(d, b);
        if (!std::isfinite(fd) || !std::isfinite(exact) || std::fabs(exact) > 1e6) continue;
        ++compared;
        CHECK(std::fabs(fd - exact) <= 1e-5 * std::max(1.0, std::fabs(exact)));
    }
    CHECK(compared > 150);
}

TEST_CASE("property: derivative is linear and obeys the product rule") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 100; ++i) {
        const Expr e1 = parse(sentence(rng, 3, true));
        const Expr e2 = parse(sentence(rng, 3, true));
        const double a = u(rng);
        const Bindings b{{"x", u(rng)}, {"y", u(rng)}, {"t", u(rng)}};
        const double d1 = evaluate(differentiate(e1, "x"), b);
        const double d2 = evaluate(differentiate(e2, "x"), b);
        const double lin = evaluate(differentiate(Expr::constant(a) * e1 + e2, "x"), b);
        CHECK(lin == doctest::Approx(a * d1 + d2).epsilon(1e-12).scale(1.0));
        const double prod = evaluate(differentiate(e1 * e2, "x"), b);
        const double rule = evaluate(e1, b) * d2 + evaluate(e2, b) * d1;
        CHECK(std::fabs(prod - rule) <= 1e-10 * std::max(1.0, std::fabs(rule)));
    }
}
