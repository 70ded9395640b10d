#include "filippov/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>
#include <utility>

namespace filippov::expr {

SyntaxError::SyntaxError(std::size_t offset, std::string expected)
    : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": expected " +
                         expected),
      offset_(offset),
      expected_(std::move(expected)) {}

UnboundVariable::UnboundVariable(std::string name)
    : EvaluationError("unbound variable '" + name + "'"), name_(std::move(name)) {}

struct Expr::Node {
    Kind kind;
    double value = 0.0;
    std::string name;
    UnaryOp uop = UnaryOp::Negate;
    BinaryOp bop = BinaryOp::Add;
    int exponent = 0;
    Expr a{std::shared_ptr<const Node>{}};
    Expr b{std::shared_ptr<const Node>{}};
};

namespace {

const char* function_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Tanh: return "tanh";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Abs: return "abs";
        case UnaryOp::Sgn: return "sgn";
        case UnaryOp::Negate: break;
    }
    return "-";
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double apply_unary(UnaryOp op, double v) {
    switch (op) {
        case UnaryOp::Negate: return -v;
        case UnaryOp::Sin: return std::sin(v);
        case UnaryOp::Cos: return std::cos(v);
        case UnaryOp::Exp: return std::exp(v);
        case UnaryOp::Tanh: return std::tanh(v);
        case UnaryOp::Sqrt:
            if (v < 0.0) throw DomainError("sqrt of negative value " + std::to_string(v));
            return std::sqrt(v);
        case UnaryOp::Abs: return std::fabs(v);
        case UnaryOp::Sgn: return sgn(v);
    }
    return v;
}

double apply_binary(BinaryOp op, double l, double r) {
    switch (op) {
        case BinaryOp::Add: return l + r;
        case BinaryOp::Sub: return l - r;
        case BinaryOp::Mul: return l * r;
        case BinaryOp::Div:
            if (r == 0.0) throw DomainError("division by zero");
            return l / r;
    }
    return 0.0;
}

double apply_power(double base, int n) {
    if (n < 0 && base == 0.0) throw DomainError("division by zero (zero to negative power)");
    return std::pow(base, n);
}

}  // namespace

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Variable;
    n->name = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, Expr arg) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Unary;
    n->uop = op;
    n->a = std::move(arg);
    return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Binary;
    n->bop = op;
    n->a = std::move(lhs);
    n->b = std::move(rhs);
    return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Power;
    n->exponent = exponent;
    n->a = std::move(base);
    return Expr(std::move(n));
}

Expr::Kind Expr::kind() const noexcept { return node_->kind; }

double Expr::value() const {
    if (node_->kind != Kind::Constant) throw std::logic_error("Expr::value on non-constant");
    return node_->value;
}

const std::string& Expr::name() const {
    if (node_->kind != Kind::Variable) throw std::logic_error("Expr::name on non-variable");
    return node_->name;
}

UnaryOp Expr::unary_op() const {
    if (node_->kind != Kind::Unary) throw std::logic_error("Expr::unary_op on non-unary");
    return node_->uop;
}

BinaryOp Expr::binary_op() const {
    if (node_->kind != Kind::Binary) throw std::logic_error("Expr::binary_op on non-binary");
    return node_->bop;
}

int Expr::exponent() const {
    if (node_->kind != Kind::Power) throw std::logic_error("Expr::exponent on non-power");
    return node_->exponent;
}

const Expr& Expr::arg() const {
    if (node_->kind != Kind::Unary && node_->kind != Kind::Power)
        throw std::logic_error("Expr::arg on node without argument");
    return node_->a;
}

const Expr& Expr::lhs() const {
    if (node_->kind != Kind::Binary) throw std::logic_error("Expr::lhs on non-binary");
    return node_->a;
}

const Expr& Expr::rhs() const {
    if (node_->kind != Kind::Binary) throw std::logic_error("Expr::rhs on non-binary");
    return node_->b;
}

bool Expr::is_constant(double v) const noexcept {
    return node_->kind == Kind::Constant && node_->value == v;
}

std::set<std::string> Expr::free_variables() const {
    std::set<std::string> out;
    std::vector<const Node*> stack{node_.get()};
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        switch (n->kind) {
            case Kind::Constant: break;
            case Kind::Variable: out.insert(n->name); break;
            case Kind::Unary:
            case Kind::Power: stack.push_back(n->a.node_.get()); break;
            case Kind::Binary:
                stack.push_back(n->a.node_.get());
                stack.push_back(n->b.node_.get());
                break;
        }
    }
    return out;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case Expr::Kind::Constant:
            return x.value == y.value || (std::isnan(x.value) && std::isnan(y.value));
        case Expr::Kind::Variable: return x.name == y.name;
        case Expr::Kind::Unary: return x.uop == y.uop && x.a == y.a;
        case Expr::Kind::Power: return x.exponent == y.exponent && x.a == y.a;
        case Expr::Kind::Binary: return x.bop == y.bop && x.a == y.a && x.b == y.b;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse_all() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("operator or end of input");
        return e;
    }

private:
    // Reported offsets are 1-based byte positions.
    [[noreturn]] void fail(std::string expected) const { throw SyntaxError(pos_ + 1, std::move(expected)); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("\"") + c + "\"");
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = Expr::binary(BinaryOp::Add, lhs, parse_term());
            } else if (accept('-')) {
                lhs = Expr::binary(BinaryOp::Sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_term() {
        Expr lhs = parse_factor();
        for (;;) {
            if (accept('*')) {
                lhs = Expr::binary(BinaryOp::Mul, lhs, parse_factor());
            } else if (accept('/')) {
                lhs = Expr::binary(BinaryOp::Div, lhs, parse_factor());
            } else {
                return lhs;
            }
        }
    }

    // factor := ('-')? atom ('^' integer)? ; the sign binds looser than '^'.
    Expr parse_factor() {
        const bool negate = accept('-');
        Expr e = parse_atom();
        if (accept('^')) e = Expr::power(e, parse_integer());
        return negate ? Expr::unary(UnaryOp::Negate, e) : e;
    }

    int parse_integer() {
        skip_ws();
        const std::size_t start = pos_;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
        const std::size_t digits = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == digits) {
            pos_ = start;
            fail("integer exponent");
        }
        int value = 0;
        const char* first = text_.data() + start + (text_[start] == '+' ? 1 : 0);
        auto [ptr, ec] = std::from_chars(first, text_.data() + pos_, value);
        if (ec != std::errc{} || ptr != text_.data() + pos_) {
            pos_ = start;
            fail("integer exponent in range");
        }
        return value;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("number, identifier or \"(\"");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string ident(text_.substr(start, pos_ - start));
            if (peek('(')) {
                static constexpr std::array<std::pair<std::string_view, UnaryOp>, 7> functions{{
                    {"sin", UnaryOp::Sin},
                    {"cos", UnaryOp::Cos},
                    {"exp", UnaryOp::Exp},
                    {"tanh", UnaryOp::Tanh},
                    {"sqrt", UnaryOp::Sqrt},
                    {"abs", UnaryOp::Abs},
                    {"sgn", UnaryOp::Sgn},
                }};
                auto it = std::find_if(functions.begin(), functions.end(),
                                       [&](const auto& f) { return f.first == ident; });
                if (it == functions.end()) {
                    pos_ = start;
                    fail("function name (sin, cos, exp, tanh, sqrt, abs, sgn)");
                }
                ++pos_;  // '('
                Expr arg = parse_expr();
                expect(')');
                return Expr::unary(it->second, arg);
            }
            return Expr::variable(std::move(ident));
        }
        fail("number, identifier or \"(\"");
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            const std::size_t from = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            return pos_ - from;
        };
        std::size_t count = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            count += digits();
        }
        if (count == 0) {
            pos_ = start;
            fail("number");
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = mark;  // not an exponent; leave 'e' for the caller
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc{} || ptr != text_.data() + pos_) {
            pos_ = start;
            fail("number");
        }
        return Expr::constant(value);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Evaluation

double evaluate(const Expr& e, const Bindings& b) {
    switch (e.kind()) {
        case Expr::Kind::Constant: return e.value();
        case Expr::Kind::Variable: {
            auto it = b.find(e.name());
            if (it == b.end()) throw UnboundVariable(e.name());
            return it->second;
        }
        case Expr::Kind::Unary: return apply_unary(e.unary_op(), evaluate(e.arg(), b));
        case Expr::Kind::Power: return apply_power(evaluate(e.arg(), b), e.exponent());
        case Expr::Kind::Binary:
            return apply_binary(e.binary_op(), evaluate(e.lhs(), b), evaluate(e.rhs(), b));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Folding builders

Expr operator+(const Expr& a, const Expr& b) {
    if (a.kind() == Expr::Kind::Constant && b.kind() == Expr::Kind::Constant)
        return Expr::constant(a.value() + b.value());
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    return Expr::binary(BinaryOp::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.kind() == Expr::Kind::Constant && b.kind() == Expr::Kind::Constant)
        return Expr::constant(a.value() - b.value());
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return -b;
    return Expr::binary(BinaryOp::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.kind() == Expr::Kind::Constant && b.kind() == Expr::Kind::Constant)
        return Expr::constant(a.value() * b.value());
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    return Expr::binary(BinaryOp::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.kind() == Expr::Kind::Constant && b.kind() == Expr::Kind::Constant && b.value() != 0.0)
        return Expr::constant(a.value() / b.value());
    if (a.is_constant(0.0)) return Expr::constant(0.0);
    if (b.is_constant(1.0)) return a;
    return Expr::binary(BinaryOp::Div, a, b);
}

Expr operator-(const Expr& a) {
    if (a.kind() == Expr::Kind::Constant) return Expr::constant(-a.value());
    return Expr::unary(UnaryOp::Negate, a);
}

Expr pow(const Expr& base, int exponent) {
    if (exponent == 0) return Expr::constant(1.0);
    if (exponent == 1) return base;
    if (base.kind() == Expr::Kind::Constant && !(base.value() == 0.0 && exponent < 0))
        return Expr::constant(std::pow(base.value(), exponent));
    return Expr::power(base, exponent);
}

Expr apply(UnaryOp op, const Expr& arg) {
    if (arg.kind() == Expr::Kind::Constant) {
        try {
            return Expr::constant(apply_unary(op, arg.value()));
        } catch (const DomainError&) {
            // keep the node; evaluation reports the error
        }
    }
    return Expr::unary(op, arg);
}

// ---------------------------------------------------------------------------
// Differentiation and substitution

Expr differentiate(const Expr& e, std::string_view var) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Constant: return Expr::constant(0.0);
        case K::Variable: return Expr::constant(e.name() == var ? 1.0 : 0.0);
        case K::Power: {
            const Expr& u = e.arg();
            const int n = e.exponent();
            return (Expr::constant(n) * pow(u, n - 1)) * differentiate(u, var);
        }
        case K::Binary: {
            const Expr& u = e.lhs();
            const Expr& v = e.rhs();
            const Expr du = differentiate(u, var);
            const Expr dv = differentiate(v, var);
            switch (e.binary_op()) {
                case BinaryOp::Add: return du + dv;
                case BinaryOp::Sub: return du - dv;
                case BinaryOp::Mul: return du * v + u * dv;
                case BinaryOp::Div: return (du * v - u * dv) / pow(v, 2);
            }
            break;
        }
        case K::Unary: {
            const Expr& u = e.arg();
            const Expr du = differentiate(u, var);
            switch (e.unary_op()) {
                case UnaryOp::Negate: return -du;
                case UnaryOp::Sin: return apply(UnaryOp::Cos, u) * du;
                case UnaryOp::Cos: return (-apply(UnaryOp::Sin, u)) * du;
                case UnaryOp::Exp: return apply(UnaryOp::Exp, u) * du;
                case UnaryOp::Tanh:
                    return (Expr::constant(1.0) - pow(apply(UnaryOp::Tanh, u), 2)) * du;
                case UnaryOp::Sqrt:
                    return du / (Expr::constant(2.0) * apply(UnaryOp::Sqrt, u));
                case UnaryOp::Abs: return apply(UnaryOp::Sgn, u) * du;
                case UnaryOp::Sgn: return Expr::constant(0.0);
            }
            break;
        }
    }
    return Expr::constant(0.0);
}

Expr substitute(const Expr& e, std::string_view var, const Expr& replacement) {
    using K = Expr::Kind;
    switch (e.kind()) {
        case K::Constant: return e;
        case K::Variable: return e.name() == var ? replacement : e;
        case K::Unary: return Expr::unary(e.unary_op(), substitute(e.arg(), var, replacement));
        case K::Power: return Expr::power(substitute(e.arg(), var, replacement), e.exponent());
        case K::Binary:
            return Expr::binary(e.binary_op(), substitute(e.lhs(), var, replacement),
                                substitute(e.rhs(), var, replacement));
    }
    return e;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// 0: sum, 1: product, 2: signed factor / power, 3: atom
int natural_level(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Binary:
            return (e.binary_op() == BinaryOp::Add || e.binary_op() == BinaryOp::Sub) ? 0 : 1;
        case Expr::Kind::Power: return 2;
        case Expr::Kind::Unary: return e.unary_op() == UnaryOp::Negate ? 2 : 3;
        case Expr::Kind::Constant: return e.value() < 0.0 || std::signbit(e.value()) ? 2 : 3;
        case Expr::Kind::Variable: return 3;
    }
    return 3;
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void print(const Expr& e, int required, std::string& out);

void print_body(const Expr& e, std::string& out) {
    switch (e.kind()) {
        case Expr::Kind::Constant:
            if (std::signbit(e.value())) {
                out += '-';
                out += format_number(-e.value());
            } else {
                out += format_number(e.value());
            }
            break;
        case Expr::Kind::Variable: out += e.name(); break;
        case Expr::Kind::Unary:
            if (e.unary_op() == UnaryOp::Negate) {
                out += '-';
                // '-' may only prefix an atom or atom^n
                const Expr& a = e.arg();
                if (a.kind() == Expr::Kind::Power)
                    print(a, 2, out);
                else
                    print(a, 3, out);
            } else {
                out += function_name(e.unary_op());
                out += '(';
                print(e.arg(), 0, out);
                out += ')';
            }
            break;
        case Expr::Kind::Power:
            print(e.arg(), 3, out);
            out += '^';
            out += std::to_string(e.exponent());
            break;
        case Expr::Kind::Binary: {
            const bool additive = e.binary_op() == BinaryOp::Add || e.binary_op() == BinaryOp::Sub;
            const int lhs_level = additive ? 0 : 1;
            print(e.lhs(), lhs_level, out);
            switch (e.binary_op()) {
                case BinaryOp::Add: out += " + "; break;
                case BinaryOp::Sub: out += " - "; break;
                case BinaryOp::Mul: out += '*'; break;
                case BinaryOp::Div: out += '/'; break;
            }
            print(e.rhs(), lhs_level + 1, out);
            break;
        }
    }
}

void print(const Expr& e, int required, std::string& out) {
    if (natural_level(e) < required) {
        out += '(';
        print_body(e, out);
        out += ')';
    } else {
        print_body(e, out);
    }
}

}  // namespace

std::string to_string(const Expr& e) {
    std::string out;
    print(e, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// Compiled programs

Program::Program(const Expr& e, std::span<const std::string> variables) { emit(e, variables, 1); }

void Program::emit(const Expr& e, std::span<const std::string> variables, int depth) {
    max_depth_ = std::max(max_depth_, depth);
    switch (e.kind()) {
        case Expr::Kind::Constant: code_.push_back({Code::Const, 0, e.value()}); return;
        case Expr::Kind::Variable: {
            auto it = std::find(variables.begin(), variables.end(), e.name());
            if (it == variables.end()) throw UnboundVariable(e.name());
            code_.push_back({Code::Load, static_cast<int>(it - variables.begin()), 0.0});
            return;
        }
        case Expr::Kind::Unary: {
            emit(e.arg(), variables, depth);
            static constexpr std::array<Code, 8> map{Code::Neg,  Code::Sin,  Code::Cos, Code::Exp,
                                                     Code::Tanh, Code::Sqrt, Code::Abs, Code::Sgn};
            code_.push_back({map[static_cast<std::size_t>(e.unary_op())], 0, 0.0});
            return;
        }
        case Expr::Kind::Power:
            emit(e.arg(), variables, depth);
            code_.push_back({Code::Pow, e.exponent(), 0.0});
            return;
        case Expr::Kind::Binary: {
            emit(e.lhs(), variables, depth);
            emit(e.rhs(), variables, depth + 1);
            static constexpr std::array<Code, 4> map{Code::Add, Code::Sub, Code::Mul, Code::Div};
            code_.push_back({map[static_cast<std::size_t>(e.binary_op())], 0, 0.0});
            return;
        }
    }
}

double Program::operator()(std::span<const double> values) const {
    constexpr int kInline = 32;
    std::array<double, kInline> inline_stack;
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap_stack.resize(static_cast<std::size_t>(max_depth_));
        stack = heap_stack.data();
    }
    int top = -1;
    for (const Instr& in : code_) {
        switch (in.code) {
            case Code::Const: stack[++top] = in.value; break;
            case Code::Load: stack[++top] = values[static_cast<std::size_t>(in.index)]; break;
            case Code::Neg: stack[top] = -stack[top]; break;
            case Code::Sin: stack[top] = std::sin(stack[top]); break;
            case Code::Cos: stack[top] = std::cos(stack[top]); break;
            case Code::Exp: stack[top] = std::exp(stack[top]); break;
            case Code::Tanh: stack[top] = std::tanh(stack[top]); break;
            case Code::Sqrt: stack[top] = apply_unary(UnaryOp::Sqrt, stack[top]); break;
            case Code::Abs: stack[top] = std::fabs(stack[top]); break;
            case Code::Sgn: stack[top] = sgn(stack[top]); break;
            case Code::Pow: stack[top] = apply_power(stack[top], in.index); break;
            case Code::Add: --top; stack[top] = stack[top] + stack[top + 1]; break;
            case Code::Sub: --top; stack[top] = stack[top] - stack[top + 1]; break;
            case Code::Mul: --top; stack[top] = stack[top] * stack[top + 1]; break;
            case Code::Div:
                --top;
                stack[top] = apply_binary(BinaryOp::Div, stack[top], stack[top + 1]);
                break;
        }
    }
    return top >= 0 ? stack[0] : 0.0;
}

}  // namespace filippov::expr
