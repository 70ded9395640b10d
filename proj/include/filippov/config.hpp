#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "filippov/cross.hpp"
#include "filippov/dynamics.hpp"

namespace filippov::cli {

/// Malformed input, with a 1-based position (column 0 when the whole line
/// is at fault).
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, int column, const std::string& message);
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// a:b:n, n evenly spaced points including both ends.
struct GridSpec {
    double lo = -1.0;
    double hi = 1.0;
    int count = 201;

    std::vector<double> points() const;
};

struct RunConfig {
    std::vector<double> epsilon{0.1};
    std::vector<GridSpec> grid;  // one per locus coordinate
    std::optional<std::vector<double>> from;
    std::optional<std::pair<double, double>> tspan;
    std::string mode = "filippov";  // or "regularized"
    Method method = Method::RK45;
    double step = 1e-3;
    CertifyOptions certify;
    IntegrateOptions integrate;
    double classify_tol = kDefaultClassifyTol;
};

struct CrossConfig {
    std::vector<std::string> coordinates;
    std::string phi_text;
    std::string psi_text;
    std::vector<std::pair<double, double>> epsilon_eta;
    GridSpec z{-1.0, 1.0, 21};
    CrossSystem system;
};

struct SystemConfig {
    std::vector<std::string> coordinates;
    std::string sigma_text;
    std::vector<std::string> plus_text;   // components as written
    std::vector<std::string> minus_text;
    PiecewiseSystem system;               // in the adapted chart
    TransitionFunction transition;
    RunConfig run;
    std::optional<CrossConfig> cross;

    std::size_t dimension() const { return coordinates.size(); }
};

SystemConfig parse_config(const std::string& text);
SystemConfig load_config(const std::filesystem::path& path);

/// "smoothstep", "overshoot:M", "biased:t0" or "custom:<expr in t>".
TransitionSpec parse_transition_shorthand(const std::string& text);

/// Rewrites fields written for the locus {y - g(x) = 0} into the chart
/// Y = y - g(x): components are composed with y = Y + g(x) and the normal
/// component becomes a - grad g . b.
std::vector<Expr> straighten(const std::vector<std::string>& coordinates,
                             const std::vector<Expr>& components, const Expr& g);

}  // namespace filippov::cli
