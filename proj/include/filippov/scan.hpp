#pragma once

#include <functional>
#include <vector>

namespace filippov::scan {

struct Options {
    int cells = 512;
    double x_tol = 1e-12;     // bisection width
    double zero_tol = 1e-10;  // |f| at or below this counts as a zero
};

struct Interval {
    double lo;
    double hi;
};

struct Result {
    /// Isolated zeros, ascending.
    std::vector<double> roots;
    /// Runs of consecutive grid nodes where |f| <= zero_tol.
    std::vector<Interval> flat;
    /// min |f| over [lo, hi], refined around every local minimum of the grid.
    double min_abs = 0.0;
};

/// Uniform-grid scan for zeros of f on [lo, hi]: sign changes refined by
/// bisection, grid nodes within zero_tol, and tangential zeros found by
/// refining local extrema of f toward the axis (an extremum that crosses the
/// axis yields the two bracketed roots around it).
Result find_zeros(const std::function<double(double)>& f, double lo, double hi,
                  const Options& opts = {});

/// Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must have
/// opposite signs.
double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol);

/// Golden-section search for the minimizer of f on [lo, hi].
double golden_min(const std::function<double(double)>& f, double lo, double hi, double x_tol);

/// Largest t in [lo, hi] for which pred holds, given pred(lo) && !pred(hi).
double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                        double x_tol);

}  // namespace filippov::scan
