#pragma once

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "filippov/regular.hpp"

namespace filippov {

/// dx/dt = f(t, x), written into `dx`.
using VectorField = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

enum class Method { RK4, RK45 };

struct IntegrateOptions {
    Method method = Method::RK45;
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0: pick from the tolerances
    double fixed_step = 1e-3;   // RK4 only
    double min_step = 1e-14;    // relative to max(1, |t|)
    std::size_t max_steps = 2'000'000;
};

enum class EventKind { SigmaHit, SlideEntry, SlideExit, StepFailure };

const char* to_string(EventKind k);

struct Event {
    double time;
    std::vector<double> state;
    EventKind kind;
};

enum class StopReason { Completed, StepFailure, UnresolvedSingularity };

const char* to_string(StopReason r);

/// Time-stamped states with their derivatives (for cubic Hermite dense
/// output) and the events met on the way.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> derivatives;
    std::vector<Event> events;
    StopReason stop = StopReason::Completed;

    const std::vector<double>& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }

    /// Cubic Hermite interpolation between stored samples.
    std::vector<double> state_at(double t) const;
};

Trajectory integrate(const VectorField& field, std::span<const double> x0, double t0, double t1,
                     const IntegrateOptions& opts = {});

struct FilippovOptions {
    double classify_tol = kDefaultClassifyTol;
    double event_time_tol = 1e-12;
    double lambda_tol = 1e-10;
    std::size_t max_events = 10'000;
};

/// Hybrid integration: X_plus / X_minus off the locus, crossing at sewing
/// points, sliding along the Filippov field at sliding points and leaving
/// when the convex weight reaches 0 or 1. Arrival at a singular point ends
/// the run with StopReason::UnresolvedSingularity.
Trajectory integrate_filippov(const PiecewiseSystem& sys, std::span<const double> x0, double t0,
                              double t1, const IntegrateOptions& opts = {},
                              const FilippovOptions& fopts = {});

// ---------------------------------------------------------------------------
// Invariant-manifold tracking

class NoSlidingAt : public std::runtime_error {
public:
    explicit NoSlidingAt(std::vector<double> x);
    const std::vector<double>& point() const noexcept { return x_; }

private:
    std::vector<double> x_;
};

struct ManifoldSample {
    std::vector<double> x;
    double t;      // transversal zero of h(x, .)
    double dh_dt;
};

struct ManifoldExclusion {
    std::vector<double> x;
    std::string reason;
};

/// S_eps = {(x, eps * t_x)} over a grid of locus points.
struct ManifoldTrack {
    double eps = 0.0;
    std::vector<ManifoldSample> samples;
    std::vector<ManifoldExclusion> excluded;

    std::vector<std::vector<double>> points() const;
};

enum class ExclusionPolicy { Throw, Record };

ManifoldTrack track_manifold(const PiecewiseSystem& sys, const TransitionFunction& psi, double eps,
                             const std::vector<std::vector<double>>& grid,
                             ExclusionPolicy policy = ExclusionPolicy::Throw,
                             const CertifyOptions& opts = {});

/// Symmetric Hausdorff distance between finite point sets (Euclidean).
double hausdorff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b);

struct Equilibrium {
    double x;
    int stability;  // -1 stable, +1 unstable, 0 degenerate
};

/// Zeros of the flow of X_eps restricted to S_eps, for planar systems.
std::vector<Equilibrium> equilibria_on_manifold(const PiecewiseSystem& sys,
                                                const TransitionFunction& psi, double eps,
                                                double x_lo, double x_hi, int cells = 2000,
                                                const CertifyOptions& opts = {});

}  // namespace filippov
