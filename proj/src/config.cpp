#include "filippov/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace filippov::cli {

namespace {

std::string position_text(int line, int column) {
    if (line <= 0) return "";
    std::string s = "line " + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s + ": ";
}

struct Value {
    std::string text;
    int line = 0;
    int column = 0;  // of the first character of text
};

struct Piece {
    std::string text;
    int column;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// Splits on `sep`, trimming each piece and keeping its column.
std::vector<Piece> split(const Value& v, char sep) {
    std::vector<Piece> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = v.text.find(sep, start);
        const std::size_t stop = end == std::string::npos ? v.text.size() : end;
        std::size_t a = start;
        std::size_t b = stop;
        while (a < b && is_space(v.text[a])) ++a;
        while (b > a && is_space(v.text[b - 1])) --b;
        out.push_back({v.text.substr(a, b - a), v.column + static_cast<int>(a)});
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

double number(const Piece& p, int line) {
    double out = 0.0;
    const char* first = p.text.data();
    const char* last = first + p.text.size();
    if (!p.text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (p.text.empty() || ec != std::errc() || ptr != last)
        throw ConfigError(line, p.column + static_cast<int>(ptr - p.text.data()),
                          "expected a number, got '" + p.text + "'");
    return out;
}

std::vector<double> numbers(const Value& v) {
    std::vector<double> out;
    for (const auto& p : split(v, ',')) out.push_back(number(p, v.line));
    return out;
}

GridSpec grid_spec(const Piece& p, int line) {
    const auto parts = split(Value{p.text, line, p.column}, ':');
    if (parts.size() != 3) throw ConfigError(line, p.column, "grid must read lo:hi:count");
    GridSpec g{number(parts[0], line), number(parts[1], line), 0};
    const double n = number(parts[2], line);
    if (!(n >= 2) || n != static_cast<int>(n))
        throw ConfigError(line, parts[2].column, "grid count must be an integer >= 2");
    g.count = static_cast<int>(n);
    if (!(g.hi > g.lo)) throw ConfigError(line, p.column, "grid needs lo < hi");
    return g;
}

Expr expression(const Piece& p, int line) {
    try {
        return expr::parse(p.text);
    } catch (const expr::SyntaxError& e) {
        throw ConfigError(line, p.column + static_cast<int>(e.offset()) - 1,
                          "expected " + e.expected());
    }
}

using Section = std::map<std::string, Value, std::less<>>;

struct Document {
    std::map<std::string, Section, std::less<>> sections;
    std::map<std::string, int, std::less<>> header_lines;
};

const std::map<std::string, std::set<std::string>, std::less<>> kKnownKeys = {
    {"system", {"coordinates", "sigma", "X_plus", "X_minus"}},
    {"transition", {"kind", "M", "t0", "expr"}},
    {"run",
     {"epsilon", "grid", "from", "tspan", "mode", "method", "step", "abs_tol", "rel_tol",
      "max_step", "classify_tol", "transversality_tol", "zero_tol", "grid_cells", "t_tol"}},
    {"cross", {"coordinates", "X_pp", "X_pm", "X_mp", "X_mm", "phi", "psi", "epsilon_eta", "z"}},
};

Document tokenize(const std::string& text) {
    Document doc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    Section* current = nullptr;
    const std::set<std::string>* known = nullptr;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = raw.substr(0, raw.find('#'));
        std::size_t a = 0;
        while (a < line.size() && is_space(line[a])) ++a;
        std::size_t b = line.size();
        while (b > a && is_space(line[b - 1])) --b;
        if (a == b) continue;
        const int col = static_cast<int>(a) + 1;
        if (line[a] == '[') {
            if (line[b - 1] != ']') throw ConfigError(line_no, static_cast<int>(b), "expected ']'");
            std::string name = line.substr(a + 1, b - a - 2);
            const auto it = kKnownKeys.find(name);
            if (it == kKnownKeys.end())
                throw ConfigError(line_no, col + 1, "unknown section [" + name + "]");
            if (doc.sections.count(name))
                throw ConfigError(line_no, col, "section [" + name + "] appears twice");
            current = &doc.sections[name];
            known = &it->second;
            doc.header_lines[name] = line_no;
            continue;
        }
        const std::size_t eq = line.find('=', a);
        if (eq == std::string::npos || eq >= b) throw ConfigError(line_no, col, "expected key = value");
        if (!current) throw ConfigError(line_no, col, "key outside of any section");
        std::size_t kb = eq;
        while (kb > a && is_space(line[kb - 1])) --kb;
        const std::string key = line.substr(a, kb - a);
        if (key.empty()) throw ConfigError(line_no, col, "empty key");
        if (!known->count(key)) throw ConfigError(line_no, col, "unknown key '" + key + "'");
        if (current->count(key)) throw ConfigError(line_no, col, "duplicate key '" + key + "'");
        std::size_t va = eq + 1;
        while (va < b && is_space(line[va])) ++va;
        if (va == b) throw ConfigError(line_no, static_cast<int>(eq) + 2, "empty value for '" + key + "'");
        (*current)[key] = Value{line.substr(va, b - va), line_no, static_cast<int>(va) + 1};
    }
    return doc;
}

const Value* find(const Section* s, std::string_view key) {
    if (!s) return nullptr;
    const auto it = s->find(key);
    return it == s->end() ? nullptr : &it->second;
}

const Value& require(const Document& doc, const Section* s, std::string_view section,
                     std::string_view key) {
    if (const auto* v = find(s, key)) return *v;
    const auto it = doc.header_lines.find(section);
    throw ConfigError(it == doc.header_lines.end() ? 0 : it->second, 0,
                      "missing key '" + std::string(key) + "' in [" + std::string(section) + "]");
}

std::vector<std::string> names(const Value& v) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& p : split(v, ',')) {
        bool ok = !p.text.empty() && (std::isalpha(static_cast<unsigned char>(p.text[0])) || p.text[0] == '_');
        for (char c : p.text) ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
        if (!ok) throw ConfigError(v.line, p.column, "bad coordinate name '" + p.text + "'");
        if (!seen.insert(p.text).second)
            throw ConfigError(v.line, p.column, "coordinate '" + p.text + "' listed twice");
        out.push_back(p.text);
    }
    return out;
}

std::vector<Expr> components(const Value& v, const std::vector<std::string>& coords,
                             const std::string& field, std::vector<std::string>* texts) {
    const auto pieces = split(v, ',');
    if (pieces.size() != coords.size())
        throw ConfigError(v.line, v.column,
                          field + " has " + std::to_string(pieces.size()) + " components, expected " +
                              std::to_string(coords.size()));
    std::vector<Expr> out;
    for (const auto& p : pieces) {
        auto e = expression(p, v.line);
        for (const auto& name : e.free_variables())
            if (std::find(coords.begin(), coords.end(), name) == coords.end())
                throw ConfigError(v.line, p.column, field + " uses unknown variable '" + name + "'");
        out.push_back(std::move(e));
        if (texts) texts->push_back(p.text);
    }
    return out;
}

TransitionFunction build_transition(const TransitionSpec& spec, int line, int column) {
    try {
        return make_transition(spec);
    } catch (const ValidationFailure& e) {
        throw ConfigError(line, column, std::string("transition rejected: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(line, column, std::string("transition rejected: ") + e.what());
    }
}

TransitionSpec transition_section(const Document& doc, const Section* s,
                                  const std::vector<std::string>& locus, int& line, int& column) {
    const Value* kind = find(s, "kind");
    const std::string k = kind ? kind->text : "smoothstep";
    line = kind ? kind->line : 0;
    column = kind ? kind->column : 0;
    if (k == "smoothstep") return Smoothstep{};
    if (k == "overshoot") {
        const auto& v = require(doc, s, "transition", "M");
        line = v.line;
        column = v.column;
        return Overshoot{number({v.text, v.column}, v.line)};
    }
    if (k == "biased") {
        const auto& v = require(doc, s, "transition", "t0");
        line = v.line;
        column = v.column;
        return Biased{number({v.text, v.column}, v.line)};
    }
    if (k == "custom") {
        const auto& v = require(doc, s, "transition", "expr");
        line = v.line;
        column = v.column;
        auto body = expression({v.text, v.column}, v.line);
        return Custom{std::move(body), locus};
    }
    throw ConfigError(line, column, "unknown transition kind '" + k + "'");
}

}  // namespace

ConfigError::ConfigError(int line, int column, const std::string& message)
    : std::runtime_error(position_text(line, column) + message), line_(line), column_(column) {}

std::vector<double> GridSpec::points() const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out[i] = i == count - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    return out;
}

TransitionSpec parse_transition_shorthand(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    const auto num = [&] {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), v);
        if (arg.empty() || ec != std::errc() || ptr != arg.data() + arg.size())
            throw std::invalid_argument("expected a number after '" + kind + ":'");
        return v;
    };
    if (kind == "smoothstep" && colon == std::string::npos) return Smoothstep{};
    if (kind == "overshoot") return Overshoot{num()};
    if (kind == "biased") return Biased{num()};
    if (kind == "custom") return Custom{expr::parse(arg), {}};
    throw std::invalid_argument("unknown transition '" + text + "'");
}

std::vector<Expr> straighten(const std::vector<std::string>& coordinates,
                             const std::vector<Expr>& components, const Expr& g) {
    const std::string& y = coordinates.back();
    const Expr shifted = Expr::variable(y) + g;
    std::vector<Expr> out;
    out.reserve(components.size());
    for (const auto& c : components) out.push_back(expr::substitute(c, y, shifted));
    Expr normal = out.back();
    for (std::size_t i = 0; i + 1 < coordinates.size(); ++i)
        normal = normal - out[i] * expr::differentiate(g, coordinates[i]);
    out.back() = normal;
    return out;
}

SystemConfig parse_config(const std::string& text) {
    const Document doc = tokenize(text);
    const auto section = [&](std::string_view name) -> const Section* {
        const auto it = doc.sections.find(name);
        return it == doc.sections.end() ? nullptr : &it->second;
    };
    const Section* sys = section("system");
    if (!sys) throw ConfigError(0, 0, "missing section [system]");

    const auto& coord_value = require(doc, sys, "system", "coordinates");
    auto coords = names(coord_value);
    if (coords.size() < 2)
        throw ConfigError(coord_value.line, coord_value.column, "need at least two coordinates");
    const std::string& y = coords.back();
    const std::vector<std::string> locus(coords.begin(), coords.end() - 1);

    std::vector<std::string> plus_text;
    std::vector<std::string> minus_text;
    auto plus = components(require(doc, sys, "system", "X_plus"), coords, "X_plus", &plus_text);
    auto minus = components(require(doc, sys, "system", "X_minus"), coords, "X_minus", &minus_text);

    std::string sigma_text = y;
    if (const auto* s = find(sys, "sigma")) {
        sigma_text = s->text;
        const Expr sigma = expression({s->text, s->column}, s->line);
        for (const auto& name : sigma.free_variables())
            if (std::find(coords.begin(), coords.end(), name) == coords.end())
                throw ConfigError(s->line, s->column, "sigma uses unknown variable '" + name + "'");
        const Expr slope = expr::differentiate(sigma, y);
        if (!slope.free_variables().empty() || expr::evaluate(slope, {}) != 1.0)
            throw ConfigError(s->line, s->column, "sigma must have the form " + y + " - g(...)");
        const Expr g = -expr::substitute(sigma, y, Expr::constant(0.0));
        if (!g.is_constant(0.0)) {
            plus = straighten(coords, plus, g);
            minus = straighten(coords, minus, g);
        }
    }

    int tline = 0;
    int tcol = 0;
    const auto tspec = transition_section(doc, section("transition"), locus, tline, tcol);
    auto transition = build_transition(tspec, tline, tcol);

    RunConfig run;
    const Section* r = section("run");
    if (const auto* v = find(r, "epsilon")) {
        run.epsilon = numbers(*v);
        for (double e : run.epsilon)
            if (!(e > 0.0)) throw ConfigError(v->line, v->column, "epsilon values must be positive");
    }
    if (const auto* v = find(r, "grid")) {
        for (const auto& p : split(*v, ',')) run.grid.push_back(grid_spec(p, v->line));
        if (run.grid.size() != locus.size())
            throw ConfigError(v->line, v->column,
                              "grid needs one lo:hi:count per locus coordinate (" +
                                  std::to_string(locus.size()) + ")");
    } else {
        run.grid.assign(locus.size(), GridSpec{-1.0, 1.0, locus.size() == 1 ? 201 : 21});
    }
    if (const auto* v = find(r, "from")) {
        run.from = numbers(*v);
        if (run.from->size() != coords.size())
            throw ConfigError(v->line, v->column, "from needs " + std::to_string(coords.size()) + " values");
    }
    if (const auto* v = find(r, "tspan")) {
        const auto ts = numbers(*v);
        if (ts.size() != 2 || !(ts[1] >= ts[0]))
            throw ConfigError(v->line, v->column, "tspan must read t0, t1 with t0 <= t1");
        run.tspan = std::make_pair(ts[0], ts[1]);
    }
    if (const auto* v = find(r, "mode")) {
        if (v->text != "filippov" && v->text != "regularized")
            throw ConfigError(v->line, v->column, "mode must be filippov or regularized");
        run.mode = v->text;
    }
    if (const auto* v = find(r, "method")) {
        if (v->text == "rk4") run.method = Method::RK4;
        else if (v->text == "rk45") run.method = Method::RK45;
        else throw ConfigError(v->line, v->column, "method must be rk4 or rk45");
    }
    const auto positive = [&](std::string_view key, double& target) {
        if (const auto* v = find(r, key)) {
            target = number({v->text, v->column}, v->line);
            if (!(target > 0.0))
                throw ConfigError(v->line, v->column, std::string(key) + " must be positive");
        }
    };
    positive("step", run.step);
    positive("abs_tol", run.integrate.abs_tol);
    positive("rel_tol", run.integrate.rel_tol);
    positive("max_step", run.integrate.max_step);
    positive("classify_tol", run.classify_tol);
    positive("transversality_tol", run.certify.transversality_tol);
    positive("zero_tol", run.certify.zero_tol);
    positive("t_tol", run.certify.t_tol);
    double cells = run.certify.grid_cells;
    positive("grid_cells", cells);
    if (cells != static_cast<int>(cells)) {
        const auto* v = find(r, "grid_cells");
        throw ConfigError(v->line, v->column, "grid_cells must be an integer");
    }
    run.certify.grid_cells = static_cast<int>(cells);
    run.integrate.method = run.method;
    run.integrate.fixed_step = run.step;

    std::optional<CrossConfig> cross;
    if (const Section* c = section("cross")) {
        const auto& cv = require(doc, c, "cross", "coordinates");
        auto ccoords = names(cv);
        if (ccoords.size() != 3) throw ConfigError(cv.line, cv.column, "cross needs three coordinates");
        std::vector<VectorFieldDef> fields;
        for (const char* key : {"X_pp", "X_pm", "X_mp", "X_mm"})
            fields.emplace_back(ccoords, components(require(doc, c, "cross", key), ccoords, key, nullptr));
        const auto shorthand = [&](const char* key) {
            const auto& v = require(doc, c, "cross", key);
            try {
                return std::make_pair(v.text, make_transition(parse_transition_shorthand(v.text)));
            } catch (const expr::SyntaxError& e) {
                throw ConfigError(v.line, v.column, std::string(key) + ": expected " + e.expected());
            } catch (const std::exception& e) {
                throw ConfigError(v.line, v.column, std::string(key) + ": " + e.what());
            }
        };
        auto [phi_text, phi] = shorthand("phi");
        auto [psi_text, psi] = shorthand("psi");
        std::vector<std::pair<double, double>> pairs{{0.1, 0.1}};
        if (const auto* v = find(c, "epsilon_eta")) {
            pairs.clear();
            for (const auto& p : split(*v, ',')) {
                const auto parts = split(Value{p.text, v->line, p.column}, ':');
                if (parts.size() != 2) throw ConfigError(v->line, p.column, "epsilon_eta pairs read eps:eta");
                const double e = number(parts[0], v->line);
                const double h = number(parts[1], v->line);
                if (!(e > 0.0) || !(h > 0.0))
                    throw ConfigError(v->line, p.column, "epsilon_eta values must be positive");
                pairs.emplace_back(e, h);
            }
        }
        GridSpec z{-1.0, 1.0, 21};
        if (const auto* v = find(c, "z")) z = grid_spec({v->text, v->column}, v->line);
        try {
            cross.emplace(CrossConfig{ccoords, phi_text, psi_text, pairs, z,
                                      CrossSystem(fields[0], fields[1], fields[2], fields[3],
                                                  std::move(phi), std::move(psi))});
        } catch (const std::exception& e) {
            throw ConfigError(cv.line, cv.column, e.what());
        }
    }

    return SystemConfig{coords,
                        sigma_text,
                        plus_text,
                        minus_text,
                        PiecewiseSystem(VectorFieldDef(coords, plus), VectorFieldDef(coords, minus)),
                        std::move(transition),
                        std::move(run),
                        std::move(cross)};
}

SystemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(0, 0, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace filippov::cli
