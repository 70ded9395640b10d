#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "filippov/blowup.hpp"
#include "filippov/cli.hpp"
#include "filippov/config.hpp"
#include "filippov/cross.hpp"
#include "filippov/dynamics.hpp"
#include "filippov/regular.hpp"
#include "filippov/system.hpp"

namespace py = pybind11;
using namespace filippov;

namespace {

Trajectory integrate_config(const cli::SystemConfig& cfg, const std::vector<double>& x0, double t0, double t1,
                            const std::string& mode, double eps) {
    auto opts = cfg.run.integrate;
    if (mode == "filippov") return integrate_filippov(cfg.system, x0, t0, t1, opts);
    if (mode != "regularized") throw std::invalid_argument("mode must be filippov or regularized");
    const auto& sys = cfg.system;
    const auto& psi = cfg.transition;
    VectorField f = [&sys, &psi, eps](double, std::span<const double> x, std::span<double> dx) {
        const auto v = regularized_field(sys, psi, eps, x);
        std::copy(v.begin(), v.end(), dx.begin());
    };
    return integrate(f, x0, t0, t1, opts);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Piecewise-smooth vector fields, their regularizations and sliding certificates";

    py::register_exception<expr::SyntaxError>(m, "SyntaxError", PyExc_ValueError);
    py::register_exception<expr::EvaluationError>(m, "EvaluationError", PyExc_ArithmeticError);
    py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ValidationFailure>(m, "ValidationFailure", PyExc_ValueError);
    py::register_exception<NotSliding>(m, "NotSliding", PyExc_ValueError);

    py::class_<expr::Expr>(m, "Expr")
        .def(py::init([](const std::string& text) { return expr::parse(text); }), py::arg("text"))
        .def("evaluate", [](const expr::Expr& e, const std::map<std::string, double>& b) {
            return expr::evaluate(e, expr::Bindings(b.begin(), b.end()));
        }, py::arg("bindings") = std::map<std::string, double>{})
        .def("differentiate", [](const expr::Expr& e, const std::string& v) { return expr::differentiate(e, v); })
        .def("free_variables", &expr::Expr::free_variables)
        .def("__eq__", [](const expr::Expr& a, const expr::Expr& b) { return a == b; })
        .def("__str__", [](const expr::Expr& e) { return expr::to_string(e); })
        .def("__repr__", [](const expr::Expr& e) { return "Expr('" + expr::to_string(e) + "')"; });

    py::class_<SlidingField>(m, "SlidingField")
        .def_readonly("lam", &SlidingField::lambda)
        .def_readonly("field", &SlidingField::field);

    py::class_<HeightRoot>(m, "HeightRoot")
        .def_readonly("t", &HeightRoot::t)
        .def_readonly("dh_dt", &HeightRoot::dh_dt);

    py::class_<SlidingCertificate>(m, "SlidingCertificate")
        .def_property_readonly("verdict", [](const SlidingCertificate& c) { return std::string(to_string(c.verdict)); })
        .def_readonly("roots", &SlidingCertificate::roots)
        .def_readonly("witness", &SlidingCertificate::witness)
        .def_readonly("min_abs_h", &SlidingCertificate::min_abs_h);

    py::class_<Event>(m, "Event")
        .def_readonly("time", &Event::time)
        .def_readonly("state", &Event::state)
        .def_property_readonly("kind", [](const Event& e) { return std::string(to_string(e.kind)); });

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("states", &Trajectory::states)
        .def_readonly("events", &Trajectory::events)
        .def_property_readonly("stop", [](const Trajectory& t) { return std::string(to_string(t.stop)); })
        .def("state_at", &Trajectory::state_at);

    py::class_<Equilibrium>(m, "Equilibrium")
        .def_readonly("x", &Equilibrium::x)
        .def_readonly("stability", &Equilibrium::stability);

    py::class_<StratifiedCurve>(m, "StratifiedCurve")
        .def_readonly("t0", &StratifiedCurve::t0)
        .def_readonly("u0", &StratifiedCurve::u0)
        .def_readonly("x", &StratifiedCurve::x)
        .def_readonly("y", &StratifiedCurve::y)
        .def_readonly("residual_x", &StratifiedCurve::residual_x)
        .def_readonly("residual_y", &StratifiedCurve::residual_y)
        .def_readonly("hausdorff", &StratifiedCurve::hausdorff)
        .def_readonly("bound", &StratifiedCurve::bound);

    py::class_<cli::SystemConfig>(m, "Config")
        .def_readonly("coordinates", &cli::SystemConfig::coordinates)
        .def_property_readonly("dimension", &cli::SystemConfig::dimension)
        .def_property_readonly("transition", [](const cli::SystemConfig& c) { return c.transition.describe(); })
        .def_property_readonly("epsilon", [](const cli::SystemConfig& c) { return c.run.epsilon; })
        .def("classify", [](const cli::SystemConfig& c, const std::vector<double>& x) {
            return std::string(to_string(classify_point(c.system, x, c.run.classify_tol)));
        }, py::arg("x"))
        .def("sliding_field", [](const cli::SystemConfig& c, const std::vector<double>& x) {
            return filippov_sliding_field(c.system, x, c.run.classify_tol);
        }, py::arg("x"))
        .def("certify", [](const cli::SystemConfig& c, const std::vector<double>& x) {
            return certify(c.system, c.transition, x, c.run.certify);
        }, py::arg("x"))
        .def("regularized_field", [](const cli::SystemConfig& c, double eps, const std::vector<double>& p) {
            return regularized_field(c.system, c.transition, eps, p);
        }, py::arg("epsilon"), py::arg("point"))
        .def("integrate", &integrate_config, py::arg("x0"), py::arg("t0"), py::arg("t1"),
             py::arg("mode") = "filippov", py::arg("epsilon") = 0.1)
        .def("equilibria", [](const cli::SystemConfig& c, double eps, double lo, double hi) {
            return equilibria_on_manifold(c.system, c.transition, eps, lo, hi, 2000, c.run.certify);
        }, py::arg("epsilon"), py::arg("x_lo"), py::arg("x_hi"))
        .def("slide_curves", [](const cli::SystemConfig& c) {
            if (!c.cross) throw std::invalid_argument("config has no [cross] section");
            std::vector<StratifiedCurve> out;
            for (auto [eps, eta] : c.cross->epsilon_eta) out.push_back(stratified_slide_curve(c.cross->system, eps, eta));
            return out;
        });

    m.def("parse", [](const std::string& text) { return expr::parse(text); }, py::arg("text"));
    m.def("load_config", &cli::load_config, py::arg("path"));
    m.def("parse_config", &cli::parse_config, py::arg("text"));
    m.def(
        "run",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "filippov");
            std::ostringstream err;
            const int code = cli::run(args, err);
            return py::make_tuple(code, err.str());
        },
        py::arg("args"), "Runs a CLI subcommand; returns (exit code, diagnostics).");
}
