#include "filippov/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "filippov/blowup.hpp"
#include "filippov/config.hpp"
#include "filippov/parallel.hpp"
#include "filippov/scan.hpp"

#ifndef FILIPPOV_VERSION
#define FILIPPOV_VERSION "0.0.0"
#endif

namespace filippov::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<std::string>& coordinates,
                          const Trajectory& traj) {
    out << "t";
    for (const auto& c : coordinates) out << ',' << c;
    out << ",event\n";
    std::vector<std::string> labels(traj.times.size());
    for (const auto& e : traj.events) {
        auto it = std::lower_bound(traj.times.begin(), traj.times.end(), e.time);
        if (it == traj.times.end()) --it;
        if (it != traj.times.begin() && std::fabs(*(it - 1) - e.time) < std::fabs(*it - e.time)) --it;
        auto& label = labels[static_cast<std::size_t>(it - traj.times.begin())];
        if (!label.empty()) label += '|';
        label += to_string(e.kind);
    }
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << format_number(traj.times[i]);
        for (double v : traj.states[i]) out << ',' << format_number(v);
        out << ',' << labels[i] << '\n';
    }
}

namespace {

class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

json point_json(const std::vector<double>& x) {
    if (x.size() == 1) return x[0];
    return json(x);
}

std::vector<std::vector<double>> locus_grid(const std::vector<GridSpec>& specs) {
    std::vector<std::vector<double>> out{{}};
    for (const auto& s : specs) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : out)
            for (double v : s.points()) {
                auto p = prefix;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

struct Context {
    SystemConfig config;
    std::string sha;
    fs::path out;
};

json header(const Context& ctx, const std::string& command) {
    const auto& r = ctx.config.run;
    return json{{"version", FILIPPOV_VERSION},
                {"config_sha256", ctx.sha},
                {"command", command},
                {"tolerances",
                 {{"classify_tol", r.classify_tol},
                  {"transversality_tol", r.certify.transversality_tol},
                  {"zero_tol", r.certify.zero_tol},
                  {"grid_cells", r.certify.grid_cells},
                  {"t_tol", r.certify.t_tol},
                  {"abs_tol", r.integrate.abs_tol},
                  {"rel_tol", r.integrate.rel_tol}}},
                {"transition", ctx.config.transition.describe()}};
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
}

// Same layout as dump(2), but floats use format_number: nlohmann's Grisu2
// output is round-trip safe yet occasionally one digit longer than needed.
void emit(std::string& out, const json& j, int indent) {
    const bool object = j.is_object();
    if (!object && !j.is_array()) {
        out += j.is_number_float() ? format_number(j.get<double>()) : j.dump();
        return;
    }
    if (j.empty()) {
        out += object ? "{}" : "[]";
        return;
    }
    out += object ? "{\n" : "[\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out.append(indent + 2, ' ');
        if (object) out += json(it.key()).dump() + ": ";
        emit(out, *it, indent + 2);
    }
    out += '\n';
    out.append(indent, ' ');
    out += object ? '}' : ']';
}

void write_json(const Context& ctx, const std::string& name, const json& j) {
    std::string text;
    emit(text, j, 0);
    write_file(ctx.out / name, text + "\n");
}

// Boundaries of pred along a 1-D grid, refined by bisection between
// neighbouring nodes that disagree.
json boundaries(const std::vector<std::vector<double>>& grid, const std::vector<char>& flags,
                const std::function<bool(double)>& pred) {
    json out = json::array();
    if (grid.empty() || grid.front().size() != 1) return out;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (flags[i] == flags[i + 1]) continue;
        const double lo = grid[i][0];
        const double hi = grid[i + 1][0];
        const bool at_lo = flags[i] != 0;
        const double x = scan::bisect_predicate([&](double v) { return pred(v) == at_lo; }, lo, hi, 1e-12);
        out.push_back(x);
    }
    return out;
}

void cmd_classify(const Context& ctx) {
    const auto& sys = ctx.config.system;
    const double tol = ctx.config.run.classify_tol;
    const auto grid = locus_grid(ctx.config.run.grid);
    std::vector<json> rows(grid.size());
    std::vector<char> sliding(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const auto c = classify_point(sys, grid[i], tol);
        const auto tr = sys.normal_traces(grid[i]);
        rows[i] = json{{"x", point_json(grid[i])},
                       {"class", to_string(c)},
                       {"a_plus", tr.plus},
                       {"a_minus", tr.minus}};
        sliding[i] = c == SigmaClass::Sliding;
    });
    auto j = header(ctx, "classify");
    j["grid"] = rows;
    j["boundary_estimates"] = boundaries(grid, sliding, [&](double x) {
        const std::array<double, 1> p{x};
        return classify_point(sys, p, tol) == SigmaClass::Sliding;
    });
    write_json(ctx, "classify.json", j);
}

json certificate_json(const std::vector<double>& x, const SlidingCertificate& c) {
    json roots = json::array();
    for (const auto& r : c.roots) roots.push_back({{"t", r.t}, {"dh_dt", r.dh_dt}});
    json degenerate = json::array();
    for (const auto& d : c.degenerate) degenerate.push_back({{"t_lo", number(d.t_lo)}, {"t_hi", number(d.t_hi)}});
    return json{{"x", point_json(x)},
                {"verdict", to_string(c.verdict)},
                {"roots", roots},
                {"degenerate", degenerate},
                {"min_abs_h", c.min_abs_h}};
}

void cmd_certify(const Context& ctx) {
    const HeightFunction hf(ctx.config.system, ctx.config.transition);
    const auto& opts = ctx.config.run.certify;
    const auto grid = locus_grid(ctx.config.run.grid);
    std::vector<json> rows(grid.size());
    std::vector<char> sliding(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const auto c = certify(hf, grid[i], opts);
        rows[i] = certificate_json(grid[i], c);
        sliding[i] = c.verdict == Verdict::SlidingCertified;
    });
    auto j = header(ctx, "certify");
    j["grid"] = rows;
    j["boundary_estimates"] = boundaries(grid, sliding, [&](double x) {
        const std::array<double, 1> p{x};
        return certify(hf, p, opts).verdict == Verdict::SlidingCertified;
    });
    write_json(ctx, "certify.json", j);
}

void cmd_slow_fast(const Context& ctx) {
    const auto& cfg = ctx.config;
    const SlowFastSystem sf(cfg.system, cfg.transition, cfg.run.certify);
    const auto grid = locus_grid(cfg.run.grid);
    std::vector<json> rows(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const auto& x = grid[i];
        json flow = json::array();
        for (const auto& s : sf.slow_flow(x))
            flow.push_back({{"ybar", s.ybar}, {"dh_dt", s.dh_dt}, {"velocity", s.velocity}});
        json row{{"x", point_json(x)}, {"slow_flow", flow}};
        if (classify_point(cfg.system, x, cfg.run.classify_tol) == SigmaClass::Sliding) {
            const auto f = filippov_sliding_field(cfg.system, x, cfg.run.classify_tol);
            row["filippov"] = {{"lambda", f.lambda},
                               {"field", std::vector<double>(f.field.begin(), f.field.end() - 1)}};
        }
        rows[i] = std::move(row);
    });
    auto j = header(ctx, "slow-fast");
    j["grid"] = rows;
    write_json(ctx, "slow_fast.json", j);

    // S_eps in polar coordinates around {y = 0, eps = 0}: y = r cos(theta), eps = r sin(theta)
    std::ostringstream csv;
    csv << "x,theta,r,chart\n";
    const auto emit = [&](const std::vector<double>& x, double y, double eps) {
        const double r = std::hypot(y, eps);
        const double theta = r == 0.0 ? 0.0 : std::atan2(eps, y);
        const char* chart = std::fabs(y) <= eps ? "E" : (y > 0 ? "F+" : "F-");
        for (std::size_t k = 0; k < x.size(); ++k) csv << (k ? ";" : "") << format_number(x[k]);
        csv << ',' << format_number(theta) << ',' << format_number(r) << ',' << chart << '\n';
    };
    for (const auto& x : grid) {
        for (const auto& s : sf.slow_flow(x)) {
            // the divisor point of the critical manifold: direction (ybar, 1)
            const double theta = std::atan2(1.0, s.ybar);
            for (std::size_t k = 0; k < x.size(); ++k) csv << (k ? ";" : "") << format_number(x[k]);
            csv << ',' << format_number(theta) << ",0,E\n";
            for (double eps : cfg.run.epsilon) emit(x, eps * s.ybar, eps);
        }
    }
    write_file(ctx.out / "polar.csv", csv.str());
}

struct IntegrateFlags {
    std::vector<double> from;
    std::vector<double> tspan;
    std::string mode;
    double epsilon = 0.0;
    std::string method;
    double step = 0.0;
};

void cmd_integrate(const Context& ctx, const IntegrateFlags& flags) {
    const auto& cfg = ctx.config;
    std::vector<double> x0 = flags.from;
    if (x0.empty() && cfg.run.from) x0 = *cfg.run.from;
    if (x0.empty()) throw ConfigError(0, 0, "integrate needs an initial state (--from or [run] from)");
    if (x0.size() != cfg.dimension())
        throw ConfigError(0, 0, "--from needs " + std::to_string(cfg.dimension()) + " values");
    std::pair<double, double> span{0.0, 1.0};
    if (!flags.tspan.empty()) {
        if (flags.tspan.size() != 2 || !(flags.tspan[1] >= flags.tspan[0]))
            throw ConfigError(0, 0, "--tspan must read t0,t1 with t0 <= t1");
        span = {flags.tspan[0], flags.tspan[1]};
    } else if (cfg.run.tspan) {
        span = *cfg.run.tspan;
    }
    const std::string mode = flags.mode.empty() ? cfg.run.mode : flags.mode;
    IntegrateOptions opts = cfg.run.integrate;
    if (!flags.method.empty()) opts.method = flags.method == "rk4" ? Method::RK4 : Method::RK45;
    if (flags.step > 0.0) opts.fixed_step = flags.step;

    Trajectory traj;
    if (mode == "filippov") {
        FilippovOptions fopts;
        fopts.classify_tol = cfg.run.classify_tol;
        traj = integrate_filippov(cfg.system, x0, span.first, span.second, opts, fopts);
    } else {
        const double eps = flags.epsilon > 0.0 ? flags.epsilon : cfg.run.epsilon.front();
        const auto& sys = cfg.system;
        const auto& psi = cfg.transition;
        const VectorField f = [&](double, std::span<const double> p, std::span<double> dp) {
            const auto v = regularized_field(sys, psi, eps, p);
            std::copy(v.begin(), v.end(), dp.begin());
        };
        traj = integrate(f, x0, span.first, span.second, opts);
    }
    std::ostringstream csv;
    write_trajectory_csv(csv, cfg.coordinates, traj);
    write_file(ctx.out / "trajectory.csv", csv.str());
    if (traj.stop != StopReason::Completed)
        throw ComputationError(std::string("integration stopped: ") + to_string(traj.stop) + " at t = " +
                               format_number(traj.final_time()));
}

void cmd_manifold(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto grid = locus_grid(cfg.run.grid);
    std::vector<json> tracks(cfg.run.epsilon.size());
    parallel_for(cfg.run.epsilon.size(), [&](std::size_t k) {
        const double eps = cfg.run.epsilon[k];
        const auto track = track_manifold(cfg.system, cfg.transition, eps, grid, ExclusionPolicy::Record,
                                          cfg.run.certify);
        json samples = json::array();
        json excluded = json::array();
        std::vector<std::vector<double>> on_sigma;
        for (const auto& s : track.samples) {
            samples.push_back({{"x", point_json(s.x)}, {"t", s.t}, {"y", eps * s.t}, {"dh_dt", s.dh_dt}});
            auto p = s.x;
            p.push_back(0.0);
            on_sigma.push_back(std::move(p));
        }
        for (const auto& e : track.excluded) excluded.push_back({{"x", point_json(e.x)}, {"reason", e.reason}});
        json t{{"epsilon", eps}, {"samples", samples}, {"excluded", excluded}};
        t["hausdorff_to_sigma"] = track.samples.empty() ? json(nullptr) : json(hausdorff(track.points(), on_sigma));
        if (cfg.dimension() == 2) {
            json eq = json::array();
            const auto& g = cfg.run.grid.front();
            for (const auto& e : equilibria_on_manifold(cfg.system, cfg.transition, eps, g.lo, g.hi, 2000,
                                                        cfg.run.certify))
                eq.push_back({{"x", e.x}, {"stability", e.stability}});
            t["equilibria"] = eq;
        }
        tracks[k] = std::move(t);
    });
    auto j = header(ctx, "manifold");
    j["tracks"] = tracks;
    write_json(ctx, "manifold.json", j);
}

void cmd_cross(const Context& ctx) {
    if (!ctx.config.cross) throw ConfigError(0, 0, "cross needs a [cross] section");
    const auto& cc = *ctx.config.cross;
    json rows = json::array();
    for (const auto& [eps, eta] : cc.epsilon_eta) {
        StratifiedCurve c;
        try {
            c = stratified_slide_curve(cc.system, eps, eta, cc.z.lo, cc.z.hi, cc.z.count);
        } catch (const NonMonotoneTransition& e) {
            throw ComputationError(e.what());
        }
        rows.push_back({{"epsilon", eps},
                        {"eta", eta},
                        {"t0", c.t0},
                        {"u0", c.u0},
                        {"x", c.x},
                        {"y", c.y},
                        {"residual_x", c.residual_x},
                        {"residual_y", c.residual_y},
                        {"hausdorff_to_axis", c.hausdorff},
                        {"bound", c.bound}});
    }
    auto j = header(ctx, "cross");
    j["phi"] = cc.phi_text;
    j["psi"] = cc.psi_text;
    j["curves"] = rows;
    write_json(ctx, "cross.json", j);
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const char* b = item.data();
        const char* e = b + item.size();
        while (b < e && *b == ' ') ++b;
        const auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e)
            throw ConfigError(0, 0, std::string(flag) + ": expected comma-separated numbers");
        out.push_back(v);
    }
    return out;
}

Context load(const std::string& path, const std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(0, 0, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    Context ctx{parse_config(bytes), sha256_hex(bytes), out};
    fs::create_directories(ctx.out);
    return ctx;
}

void override_grid(Context& ctx, const std::string& grid) {
    if (grid.empty()) return;
    std::vector<GridSpec> specs;
    std::stringstream ss(grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find(':');
        const auto b = item.find(':', a == std::string::npos ? a : a + 1);
        if (a == std::string::npos || b == std::string::npos)
            throw ConfigError(0, 0, "--grid: expected lo:hi:count");
        const auto lo = parse_list(item.substr(0, a), "--grid");
        const auto hi = parse_list(item.substr(a + 1, b - a - 1), "--grid");
        const auto n = parse_list(item.substr(b + 1), "--grid");
        if (lo.size() != 1 || hi.size() != 1 || n.size() != 1 || !(hi[0] > lo[0]) || !(n[0] >= 2) ||
            n[0] != static_cast<int>(n[0]))
            throw ConfigError(0, 0, "--grid: expected lo:hi:count with lo < hi and count >= 2");
        specs.push_back({lo[0], hi[0], static_cast<int>(n[0])});
    }
    if (specs.size() != ctx.config.system.sigma_dimension())
        throw ConfigError(0, 0, "--grid needs one lo:hi:count per locus coordinate");
    ctx.config.run.grid = std::move(specs);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
    CLI::App app{"Analysis of piecewise-smooth vector fields and their regularizations", "filippov"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FILIPPOV_VERSION);

    std::string config;
    std::string out;
    std::string grid;
    IntegrateFlags flags;
    std::string from;
    std::string tspan;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "configuration file")->required();
        sub->add_option("--out", out, "output directory")->required();
    };
    const auto with_grid = [&](CLI::App* sub) {
        sub->add_option("--grid", grid, "locus grid lo:hi:count (comma-separated per coordinate)");
    };
    auto* classify = app.add_subcommand("classify", "sewing/sliding classification on a grid");
    auto* certify_cmd = app.add_subcommand("certify", "height-function certificates on a grid");
    auto* slow_fast_cmd = app.add_subcommand("slow-fast", "critical manifold, slow flow and polar plot data");
    auto* integrate_cmd = app.add_subcommand("integrate", "trajectory of the hybrid or regularized system");
    auto* manifold = app.add_subcommand("manifold", "invariant manifolds S_eps and their equilibria");
    auto* cross = app.add_subcommand("cross", "double regularization of the cross");
    auto* all = app.add_subcommand("all", "every command the configuration supports");
    for (auto* sub : {classify, certify_cmd, slow_fast_cmd, integrate_cmd, manifold, cross, all}) common(sub);
    for (auto* sub : {classify, certify_cmd, slow_fast_cmd, manifold, all}) with_grid(sub);
    integrate_cmd->add_option("--from", from, "initial state, comma-separated");
    integrate_cmd->add_option("--tspan", tspan, "t0,t1");
    integrate_cmd->add_option("--mode", flags.mode, "filippov or regularized")
        ->check(CLI::IsMember({"filippov", "regularized"}));
    integrate_cmd->add_option("--epsilon", flags.epsilon, "regularization parameter")
        ->check(CLI::PositiveNumber);
    integrate_cmd->add_option("--method", flags.method, "rk45 or rk4")->check(CLI::IsMember({"rk4", "rk45"}));
    integrate_cmd->add_option("--step", flags.step, "RK4 step")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        err << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        err << FILIPPOV_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        Context ctx = load(config, out);
        override_grid(ctx, grid);
        if (!from.empty()) flags.from = parse_list(from, "--from");
        if (!tspan.empty()) flags.tspan = parse_list(tspan, "--tspan");
        if (classify->parsed()) cmd_classify(ctx);
        if (certify_cmd->parsed()) cmd_certify(ctx);
        if (slow_fast_cmd->parsed()) cmd_slow_fast(ctx);
        if (integrate_cmd->parsed()) cmd_integrate(ctx, flags);
        if (manifold->parsed()) cmd_manifold(ctx);
        if (cross->parsed()) cmd_cross(ctx);
        if (all->parsed()) {
            cmd_classify(ctx);
            cmd_certify(ctx);
            cmd_slow_fast(ctx);
            cmd_manifold(ctx);
            if (ctx.config.cross) cmd_cross(ctx);
            if (ctx.config.run.from) cmd_integrate(ctx, flags);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << config << ": " << e.what() << '\n';
        return kExitConfig;
    } catch (const ComputationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitComputation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitComputation;
    }
    return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& err) {
    return run(std::vector<std::string>(argv, argv + argc), err);
}

}  // namespace filippov::cli
