#include "filippov/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "filippov/scan.hpp"

namespace filippov {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::SigmaHit: return "SigmaHit";
        case EventKind::SlideEntry: return "SlideEntry";
        case EventKind::SlideExit: return "SlideExit";
        case EventKind::StepFailure: return "StepFailure";
    }
    return "?";
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::Completed: return "Completed";
        case StopReason::StepFailure: return "StepFailure";
        case StopReason::UnresolvedSingularity: return "UnresolvedSingularity";
    }
    return "?";
}

std::vector<double> Trajectory::state_at(double t) const {
    if (times.empty()) throw std::logic_error("empty trajectory");
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
    const double h = times[i + 1] - times[i];
    const double s = (t - times[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    std::vector<double> out(states[i].size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = h00 * states[i][k] + h10 * h * derivatives[i][k] + h01 * states[i + 1][k] +
                 h11 * h * derivatives[i + 1][k];
    }
    return out;
}

namespace {

using State = std::vector<double>;

constexpr double kSafety = 0.8;

// Dormand-Prince 5(4)
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
public:
    Stepper(const VectorField& f, std::size_t n, const IntegrateOptions& opts)
        : f_(f), opts_(opts), k_(7, State(n)), tmp_(n) {}

    void deriv(double t, const State& y, State& dy) const { f_(t, y, dy); }

    /// One step of size h from (t, y) with dy = f(t, y). Returns the scaled
    /// error norm (0 for RK4); the new state goes to y_out.
    double step(double t, const State& y, const State& dy, double h, State& y_out) {
        const std::size_t n = y.size();
        y_out.resize(n);
        auto& k = k_;
        k[0] = dy;
        if (opts_.method == Method::RK4) {
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k[0][i];
            f_(t + 0.5 * h, tmp_, k[1]);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k[1][i];
            f_(t + 0.5 * h, tmp_, k[2]);
            for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k[2][i];
            f_(t + h, tmp_, k[3]);
            for (std::size_t i = 0; i < n; ++i)
                y_out[i] = y[i] + h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
            return 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * a21 * k[0][i];
        f_(t + c2 * h, tmp_, k[1]);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
        f_(t + c3 * h, tmp_, k[2]);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
        f_(t + c4 * h, tmp_, k[3]);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
        f_(t + c5 * h, tmp_, k[4]);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] +
                                  a65 * k[4][i]);
        f_(t + h, tmp_, k[5]);
        for (std::size_t i = 0; i < n; ++i)
            y_out[i] = y[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] +
                                   b6 * k[5][i]);
        f_(t + h, y_out, k[6]);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] +
                                  e6 * k[5][i] + e7 * k[6][i]);
            const double scale = opts_.abs_tol + opts_.rel_tol * std::max(std::fabs(y[i]), std::fabs(y_out[i]));
            const double r = std::fabs(e) / scale;
            if (!(r <= err)) err = std::isnan(r) ? r : std::max(err, r);
        }
        return err;
    }

private:
    const VectorField& f_;
    const IntegrateOptions& opts_;
    std::vector<State> k_;
    State tmp_;
};

enum class SegmentStatus { Reached, Left, Failed };

/// Integrates one smooth segment, appending accepted samples to `traj`.
/// When `inside` is given the segment ends at the first state for which it
/// fails, located by bisection on the size of a single step from the last
/// accepted state.
class SegmentDriver {
public:
    SegmentDriver(const IntegrateOptions& opts, double event_time_tol)
        : opts_(opts), event_time_tol_(event_time_tol) {}

    SegmentStatus run(const VectorField& f, double& t, State& y, double t_end,
                      const std::function<bool(const State&)>* inside,
                      const std::function<State(const State&)>& embed, Trajectory& traj) {
        Stepper stepper(f, y.size(), opts_);
        State dy(y.size());
        State y_new;
        stepper.deriv(t, y, dy);
        record(traj, t, embed(y), embed_deriv(embed, dy, y));
        const double span = t_end - t;
        if (span <= 0.0) return SegmentStatus::Reached;
        if (h_ <= 0.0) {
            h_ = opts_.method == Method::RK4 ? opts_.fixed_step
                 : opts_.initial_step > 0.0  ? opts_.initial_step
                                             : 1e-3 * span;
        }
        if (opts_.method == Method::RK4) h_ = opts_.fixed_step;
        while (t < t_end) {
            if (++steps_ > opts_.max_steps) return SegmentStatus::Failed;
            double h = std::min({h_, opts_.max_step, t_end - t});
            const bool last = h >= t_end - t;
            const double err = stepper.step(t, y, dy, h, y_new);
            if (opts_.method == Method::RK45) {
                if (!(err <= 1.0)) {
                    const double factor = std::isnan(err) ? 0.1 : std::max(0.1, kSafety * std::pow(err, -0.2));
                    h_ = h * factor;
                    if (h_ < opts_.min_step * std::max(1.0, std::fabs(t))) return SegmentStatus::Failed;
                    continue;
                }
                const double grow = err == 0.0 ? 5.0 : std::min(5.0, kSafety * std::pow(err, -0.2));
                if (!last || grow < 1.0) h_ = h * grow;
            }
            if (inside && !(*inside)(y_new)) {
                // bracket [lo, hi] in step size: lo stays inside, hi does not
                double lo = 0.0;
                double hi = h;
                State probe;
                State y_hi = y_new;
                while (hi - lo > event_time_tol_) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    stepper.step(t, y, dy, mid, probe);
                    if ((*inside)(probe)) {
                        lo = mid;
                    } else {
                        hi = mid;
                        y_hi = probe;
                    }
                }
                t = t + hi;
                y = y_hi;
                return SegmentStatus::Left;
            }
            t = last ? t_end : t + h;
            y.swap(y_new);
            stepper.deriv(t, y, dy);
            record(traj, t, embed(y), embed_deriv(embed, dy, y));
        }
        return SegmentStatus::Reached;
    }

    static void record(Trajectory& traj, double t, State state, State deriv) {
        if (!traj.times.empty() && t <= traj.times.back()) {
            traj.states.back() = std::move(state);
            traj.derivatives.back() = std::move(deriv);
            return;
        }
        traj.times.push_back(t);
        traj.states.push_back(std::move(state));
        traj.derivatives.push_back(std::move(deriv));
    }

private:
    // derivatives are embedded like states except that the appended normal
    // coordinate has zero velocity
    static State embed_deriv(const std::function<State(const State&)>& embed, const State& dy,
                             const State& y) {
        State out = embed(dy);
        if (out.size() > dy.size() && !y.empty()) out.back() = 0.0;
        return out;
    }

    const IntegrateOptions& opts_;
    double event_time_tol_;
    double h_ = 0.0;
    std::size_t steps_ = 0;
};

State identity(const State& y) { return y; }

void push_event(Trajectory& traj, double t, const State& state, EventKind kind) {
    traj.events.push_back({t, state, kind});
}

}  // namespace

Trajectory integrate(const VectorField& field, std::span<const double> x0, double t0, double t1,
                     const IntegrateOptions& opts) {
    if (!(t1 >= t0)) throw std::invalid_argument("integrate: t1 must not precede t0");
    if (opts.method == Method::RK4 && !(opts.fixed_step > 0.0))
        throw std::invalid_argument("integrate: RK4 needs a positive fixed step");
    Trajectory traj;
    State y(x0.begin(), x0.end());
    double t = t0;
    SegmentDriver driver(opts, 0.0);
    const auto status = driver.run(field, t, y, t1, nullptr, identity, traj);
    if (status == SegmentStatus::Failed) {
        traj.stop = StopReason::StepFailure;
        push_event(traj, traj.times.back(), traj.states.back(), EventKind::StepFailure);
    }
    return traj;
}

Trajectory integrate_filippov(const PiecewiseSystem& sys, std::span<const double> x0, double t0,
                              double t1, const IntegrateOptions& opts, const FilippovOptions& fopts) {
    const std::size_t n = sys.dimension();
    const std::size_t m = n - 1;
    if (x0.size() != n) throw std::invalid_argument("integrate_filippov: initial state has wrong dimension");
    if (!(t1 >= t0)) throw std::invalid_argument("integrate_filippov: t1 must not precede t0");

    Trajectory traj;
    SegmentDriver driver(opts, fopts.event_time_tol);
    double t = t0;

    enum class Mode { Plus, Minus, Slide };
    Mode mode{};
    State y(x0.begin(), x0.end());

    const auto lift = [&](const State& x) {
        State p(x);
        p.push_back(0.0);
        return p;
    };
    const auto traces = [&](const State& x) { return sys.normal_traces(x); };
    const auto stop_with = [&](StopReason r) {
        traj.stop = r;
        if (r == StopReason::StepFailure && !traj.times.empty())
            push_event(traj, traj.times.back(), traj.states.back(), EventKind::StepFailure);
        return traj;
    };
    const auto side_mode = [](double s) { return s > 0.0 ? Mode::Plus : Mode::Minus; };

    // arrival at (or start on) the locus: decide the next mode
    auto enter_locus = [&](const State& x, bool arriving) -> std::optional<Mode> {
        const auto state = lift(x);
        const auto cls = classify_point(sys, x, fopts.classify_tol);
        if (arriving) push_event(traj, t, state, EventKind::SigmaHit);
        if (cls == SigmaClass::Sliding) {
            push_event(traj, t, state, EventKind::SlideEntry);
            return Mode::Slide;
        }
        if (cls == SigmaClass::Sewing) return side_mode(traces(x).plus);
        return std::nullopt;
    };

    State x_slide;
    if (y.back() == 0.0) {
        x_slide.assign(y.begin(), y.end() - 1);
        SegmentDriver::record(traj, t, y, sys.plus().eval(y));
        auto next = enter_locus(x_slide, false);
        if (!next) return stop_with(StopReason::UnresolvedSingularity);
        mode = *next;
    } else {
        mode = side_mode(y.back());
    }

    const VectorField plus_field = [&](double, std::span<const double> p, std::span<double> dp) {
        sys.plus().eval(p, dp);
    };
    const VectorField minus_field = [&](double, std::span<const double> p, std::span<double> dp) {
        sys.minus().eval(p, dp);
    };
    State lifted(n);
    State fp(n);
    State fm(n);
    const VectorField slide_field = [&](double, std::span<const double> x, std::span<double> dx) {
        std::copy(x.begin(), x.end(), lifted.begin());
        lifted.back() = 0.0;
        sys.plus().eval(lifted, fp);
        sys.minus().eval(lifted, fm);
        const double lambda = fm.back() / (fm.back() - fp.back());
        for (std::size_t i = 0; i < m; ++i) dx[i] = lambda * fp[i] + (1.0 - lambda) * fm[i];
    };
    const std::function<State(const State&)> embed_slide = lift;

    std::size_t events = 0;
    while (t < t1) {
        if (++events > fopts.max_events) return stop_with(StopReason::StepFailure);
        if (mode == Mode::Slide) {
            if (x_slide.empty() && m > 0) x_slide.assign(y.begin(), y.end() - 1);
            const std::function<bool(const State&)> sliding = [&](const State& x) {
                const auto tr = traces(x);
                return tr.plus * tr.minus < 0.0;
            };
            const auto status = driver.run(slide_field, t, x_slide, t1, &sliding, embed_slide, traj);
            y = lift(x_slide);
            if (status == SegmentStatus::Failed) return stop_with(StopReason::StepFailure);
            if (status == SegmentStatus::Reached) break;
            const auto tr = traces(x_slide);
            const double lambda = tr.minus / (tr.minus - tr.plus);
            SegmentDriver::record(traj, t, y, sys.plus().eval(y));
            if (!std::isfinite(lambda)) return stop_with(StopReason::UnresolvedSingularity);
            if (std::fabs(lambda - 1.0) <= fopts.lambda_tol) {
                mode = Mode::Plus;
            } else if (std::fabs(lambda) <= fopts.lambda_tol) {
                mode = Mode::Minus;
            } else {
                return stop_with(StopReason::UnresolvedSingularity);
            }
            push_event(traj, t, y, EventKind::SlideExit);
            x_slide.clear();
            continue;
        }

        const double side = mode == Mode::Plus ? 1.0 : -1.0;
        const std::function<bool(const State&)> on_side = [&](const State& p) {
            return side * p.back() >= 0.0;
        };
        const auto status = driver.run(mode == Mode::Plus ? plus_field : minus_field, t, y, t1,
                                       &on_side, identity, traj);
        if (status == SegmentStatus::Failed) return stop_with(StopReason::StepFailure);
        if (status == SegmentStatus::Reached) break;
        y.back() = 0.0;
        SegmentDriver::record(traj, t, y, (mode == Mode::Plus ? sys.plus() : sys.minus()).eval(y));
        x_slide.assign(y.begin(), y.end() - 1);
        auto next = enter_locus(x_slide, true);
        if (!next) return stop_with(StopReason::UnresolvedSingularity);
        mode = *next;
    }
    return traj;
}

// ---------------------------------------------------------------------------

namespace {

std::string format_point(const std::vector<double>& x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

}  // namespace

NoSlidingAt::NoSlidingAt(std::vector<double> x)
    : std::runtime_error("no transversal zero of the height function at x = " + format_point(x)),
      x_(std::move(x)) {}

std::vector<std::vector<double>> ManifoldTrack::points() const {
    std::vector<std::vector<double>> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        auto p = s.x;
        p.push_back(eps * s.t);
        out.push_back(std::move(p));
    }
    return out;
}

ManifoldTrack track_manifold(const PiecewiseSystem& sys, const TransitionFunction& psi, double eps,
                             const std::vector<std::vector<double>>& grid, ExclusionPolicy policy,
                             const CertifyOptions& opts) {
    if (!(eps > 0.0)) throw std::invalid_argument("track_manifold: eps must be positive");
    const HeightFunction hf(sys, psi);
    ManifoldTrack track;
    track.eps = eps;
    for (const auto& x : grid) {
        const auto roots = height_roots(hf, x, opts);
        if (auto r = preferred_root(roots, opts.transversality_tol)) {
            track.samples.push_back({x, r->t, r->dh_dt});
            continue;
        }
        if (policy == ExclusionPolicy::Throw) throw NoSlidingAt(x);
        std::string reason = roots.roots.empty() && roots.degenerate.empty()
                                 ? "NoSlidingAt: height function has no zero"
                                 : "NoSlidingAt: only non-transversal zeros";
        track.excluded.push_back({x, std::move(reason)});
    }
    return track;
}

double hausdorff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff: point sets must be nonempty");
    const std::size_t dim = a.front().size();
    auto check = [&](const std::vector<std::vector<double>>& s) {
        for (const auto& p : s)
            if (p.size() != dim) throw std::invalid_argument("hausdorff: mixed point dimensions");
    };
    check(a);
    check(b);
    auto directed = [](const std::vector<std::vector<double>>& from, const std::vector<std::vector<double>>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                double d2 = 0.0;
                for (std::size_t i = 0; i < p.size(); ++i) d2 += (p[i] - q[i]) * (p[i] - q[i]);
                best = std::min(best, d2);
            }
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(directed(a, b), directed(b, a));
}

std::vector<Equilibrium> equilibria_on_manifold(const PiecewiseSystem& sys,
                                                const TransitionFunction& psi, double eps,
                                                double x_lo, double x_hi, int cells,
                                                const CertifyOptions& opts) {
    if (sys.dimension() != 2) throw std::invalid_argument("equilibria_on_manifold: planar systems only");
    if (!(eps > 0.0)) throw std::invalid_argument("equilibria_on_manifold: eps must be positive");
    if (!(x_hi > x_lo) || cells < 2) throw std::invalid_argument("equilibria_on_manifold: bad range");
    const HeightFunction hf(sys, psi);

    // flow of X_eps along S_eps; NaN where the slice has no transversal zero
    const auto flow = [&](double x) {
        const std::array<double, 1> xs{x};
        const auto r = preferred_root(height_roots(hf, xs, opts), opts.transversality_tol);
        if (!r) return std::numeric_limits<double>::quiet_NaN();
        const std::array<double, 2> p{x, eps * r->t};
        return regularized_field(sys, psi, eps, p)[0];
    };

    std::vector<double> nodes(static_cast<std::size_t>(cells) + 1);
    std::vector<bool> defined(nodes.size());
    for (int i = 0; i <= cells; ++i) {
        nodes[i] = i == cells ? x_hi : x_lo + (x_hi - x_lo) * static_cast<double>(i) / cells;
        defined[i] = std::isfinite(flow(nodes[i]));
    }

    std::vector<double> zeros;
    for (int i = 0; i <= cells;) {
        if (!defined[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 <= cells && defined[j + 1]) ++j;
        if (j > i) {
            const auto found = scan::find_zeros(flow, nodes[i], nodes[j], {j - i, 1e-14, 1e-12});
            zeros.insert(zeros.end(), found.roots.begin(), found.roots.end());
        }
        i = j + 1;
    }
    std::sort(zeros.begin(), zeros.end());

    std::vector<Equilibrium> out;
    constexpr double kDelta = 1e-6;
    for (double z : zeros) {
        const double d = (flow(z + kDelta) - flow(z - kDelta)) / (2.0 * kDelta);
        int stability = 0;
        if (std::isfinite(d) && std::fabs(d) > 1e-9) stability = d < 0.0 ? -1 : 1;
        out.push_back({z, stability});
    }
    return out;
}

}  // namespace filippov
