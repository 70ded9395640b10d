#include "filippov/system.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace filippov {

VectorFieldDef::VectorFieldDef(std::vector<std::string> coordinates, std::vector<Expr> components)
    : coordinates_(std::move(coordinates)), components_(std::move(components)) {
    if (coordinates_.size() < 2)
        throw std::invalid_argument("vector field needs at least two coordinates");
    if (components_.size() != coordinates_.size())
        throw std::invalid_argument("vector field has " + std::to_string(components_.size()) +
                                    " components for " + std::to_string(coordinates_.size()) +
                                    " coordinates");
    std::set<std::string> names(coordinates_.begin(), coordinates_.end());
    if (names.size() != coordinates_.size())
        throw std::invalid_argument("duplicate coordinate name");
    programs_.reserve(components_.size());
    for (const auto& c : components_) {
        for (const auto& v : c.free_variables()) {
            if (!names.contains(v))
                throw std::invalid_argument("component '" + expr::to_string(c) +
                                            "' uses unknown variable '" + v + "'");
        }
        programs_.emplace_back(c, coordinates_);
    }
}

void VectorFieldDef::eval(std::span<const double> point, std::span<double> out) const {
    for (std::size_t i = 0; i < programs_.size(); ++i) out[i] = programs_[i](point);
}

std::vector<double> VectorFieldDef::eval(std::span<const double> point) const {
    std::vector<double> out(programs_.size());
    eval(point, out);
    return out;
}

double VectorFieldDef::eval_component(std::size_t i, std::span<const double> point) const {
    return programs_.at(i)(point);
}

VectorFieldDef VectorFieldDef::scaled(const Expr& factor) const {
    std::vector<Expr> comps;
    comps.reserve(components_.size());
    for (const auto& c : components_) comps.push_back(factor * c);
    return VectorFieldDef(coordinates_, std::move(comps));
}

const char* to_string(SigmaClass c) {
    switch (c) {
        case SigmaClass::Sewing: return "Sewing";
        case SigmaClass::Sliding: return "Sliding";
        case SigmaClass::SigmaSingular: return "SigmaSingular";
    }
    return "?";
}

PiecewiseSystem::PiecewiseSystem(VectorFieldDef plus, VectorFieldDef minus)
    : plus_(std::move(plus)), minus_(std::move(minus)) {
    if (plus_.coordinates() != minus_.coordinates())
        throw std::invalid_argument("X_plus and X_minus must share coordinates");
}

std::vector<double> PiecewiseSystem::lift(std::span<const double> x) const {
    if (x.size() != sigma_dimension())
        throw std::invalid_argument("point on the locus needs " + std::to_string(sigma_dimension()) +
                                    " coordinates, got " + std::to_string(x.size()));
    std::vector<double> p(x.begin(), x.end());
    p.push_back(0.0);
    return p;
}

PiecewiseSystem::NormalTraces PiecewiseSystem::normal_traces(std::span<const double> x) const {
    const auto p = lift(x);
    const std::size_t k = dimension() - 1;
    return {plus_.eval_component(k, p), minus_.eval_component(k, p)};
}

Expr lie_derivative(const VectorFieldDef& field, const Expr& g) {
    Expr out = Expr::constant(0.0);
    for (std::size_t i = 0; i < field.dimension(); ++i) {
        out = out + field.component(i) * expr::differentiate(g, field.coordinates()[i]);
    }
    return out;
}

SigmaClass classify_point(const PiecewiseSystem& sys, std::span<const double> x, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("classification tolerance must be positive");
    const auto [ap, am] = sys.normal_traces(x);
    const double product = ap * am;
    if (product > tol) return SigmaClass::Sewing;
    if (product < -tol) return SigmaClass::Sliding;
    return SigmaClass::SigmaSingular;
}

SlidingField filippov_sliding_field(const PiecewiseSystem& sys, std::span<const double> x,
                                    double tol) {
    if (classify_point(sys, x, tol) != SigmaClass::Sliding)
        throw NotSliding("point is not a sliding point");
    const auto p = sys.lift(x);
    const auto fp = sys.plus().eval(p);
    const auto fm = sys.minus().eval(p);
    const double ap = fp.back();
    const double am = fm.back();
    // tangency: lambda a_+ + (1 - lambda) a_- = 0
    const double lambda = am / (am - ap);
    SlidingField out{lambda, std::vector<double>(fp.size())};
    for (std::size_t i = 0; i < fp.size(); ++i) out.field[i] = lambda * fp[i] + (1.0 - lambda) * fm[i];
    return out;
}

}  // namespace filippov
