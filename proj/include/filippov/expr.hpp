#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace filippov::expr {

enum class UnaryOp { Negate, Sin, Cos, Exp, Tanh, Sqrt, Abs, Sgn };
enum class BinaryOp { Add, Sub, Mul, Div };

/// Raised by parse(). `offset` is the byte offset into the input where the
/// parser gave up, `expected` a short description of what it wanted there.
class SyntaxError : public std::runtime_error {
public:
    SyntaxError(std::size_t offset, std::string expected);

    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnboundVariable : public EvaluationError {
public:
    explicit UnboundVariable(std::string name);
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Division by zero or square root of a negative number.
class DomainError : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};

/// Immutable expression tree over named real variables. Copies share
/// structure, so passing by value is cheap.
class Expr {
public:
    enum class Kind { Constant, Variable, Unary, Binary, Power };

    Expr();  // the constant 0

    static Expr constant(double value);
    static Expr variable(std::string name);
    static Expr unary(UnaryOp op, Expr arg);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
    static Expr power(Expr base, int exponent);

    Kind kind() const noexcept;
    double value() const;              // Constant
    const std::string& name() const;   // Variable
    UnaryOp unary_op() const;          // Unary
    BinaryOp binary_op() const;        // Binary
    int exponent() const;              // Power
    const Expr& arg() const;           // Unary, Power (base)
    const Expr& lhs() const;           // Binary
    const Expr& rhs() const;           // Binary

    bool is_constant(double v) const noexcept;
    std::set<std::string> free_variables() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

using Bindings = std::map<std::string, double, std::less<>>;

Expr parse(std::string_view text);
double evaluate(const Expr& e, const Bindings& b);

/// Symbolic derivative. d|u| = sgn(u) du and d sgn(u) = 0, so both are
/// taken as 0 at u = 0.
Expr differentiate(const Expr& e, std::string_view var);

/// Replace every occurrence of `var` by `replacement`.
Expr substitute(const Expr& e, std::string_view var, const Expr& replacement);

/// Text that parse() accepts and that evaluates identically. For trees
/// produced by parse() the reparsed tree is structurally equal.
std::string to_string(const Expr& e);

// Builders with constant folding and the identities x+0, x*1, x*0, x^1, x^0.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr apply(UnaryOp op, const Expr& arg);

/// Postfix program compiled against a fixed variable ordering, for hot
/// evaluation loops. Semantics match evaluate().
class Program {
public:
    Program() = default;
    Program(const Expr& e, std::span<const std::string> variables);

    double operator()(std::span<const double> values) const;

private:
    enum class Code : unsigned char {
        Const, Load, Neg, Sin, Cos, Exp, Tanh, Sqrt, Abs, Sgn, Add, Sub, Mul, Div, Pow
    };
    struct Instr {
        Code code;
        int index;
        double value;
    };

    void emit(const Expr& e, std::span<const std::string> variables, int depth);

    std::vector<Instr> code_;
    int max_depth_ = 0;
};

}  // namespace filippov::expr
