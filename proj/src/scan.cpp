#include "filippov/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace filippov::scan {

double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if (f(hi) == 0.0) return hi;
    for (int it = 0; it < 200 && hi - lo > x_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, double x_tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 300 && b - a > x_tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    // the interval ends can beat the interior probes for monotone f
    double best = fc <= fd ? c : d;
    double fbest = std::min(fc, fd);
    for (double x : {lo, hi}) {
        const double fx = f(x);
        if (fx < fbest) {
            best = x;
            fbest = fx;
        }
    }
    return best;
}

double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                        double x_tol) {
    for (int it = 0; it < 200 && hi - lo > x_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (pred(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

Result find_zeros(const std::function<double(double)>& f, double lo, double hi,
                  const Options& opts) {
    if (!(hi > lo)) throw std::invalid_argument("find_zeros: empty interval");
    if (opts.cells < 2) throw std::invalid_argument("find_zeros: need at least two cells");
    const int n = opts.cells;
    std::vector<double> xs(static_cast<std::size_t>(n) + 1);
    std::vector<double> fs(xs.size());
    for (int i = 0; i <= n; ++i) {
        xs[i] = i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / n;
        fs[i] = f(xs[i]);
    }

    Result out;
    out.min_abs = std::numeric_limits<double>::infinity();
    auto is_zero = [&](int i) { return std::fabs(fs[i]) <= opts.zero_tol; };

    for (int i = 0; i <= n; ++i) out.min_abs = std::min(out.min_abs, std::fabs(fs[i]));

    // zero nodes, grouped into runs
    for (int i = 0; i <= n;) {
        if (!is_zero(i)) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 <= n && is_zero(j + 1)) ++j;
        if (j == i)
            out.roots.push_back(xs[i]);
        else
            out.flat.push_back({xs[i], xs[j]});
        i = j + 1;
    }

    // strict sign changes
    for (int i = 0; i < n; ++i) {
        if (is_zero(i) || is_zero(i + 1)) continue;
        if ((fs[i] < 0.0) != (fs[i + 1] < 0.0)) out.roots.push_back(bisect(f, xs[i], xs[i + 1], opts.x_tol));
    }

    // local extrema approaching the axis without a sign change at the nodes
    for (int i = 0; i <= n; ++i) {
        if (is_zero(i)) continue;
        const int l = std::max(i - 1, 0);
        const int r = std::min(i + 1, n);
        if (is_zero(l) || is_zero(r)) continue;
        const bool same_side = (fs[l] < 0.0) == (fs[i] < 0.0) && (fs[r] < 0.0) == (fs[i] < 0.0);
        if (!same_side) continue;
        if (std::fabs(fs[i]) > std::fabs(fs[l]) || std::fabs(fs[i]) > std::fabs(fs[r])) continue;
        const double s = fs[i] > 0.0 ? 1.0 : -1.0;
        const auto toward_axis = [&](double x) { return s * f(x); };
        const double xm = golden_min(toward_axis, xs[l], xs[r], opts.x_tol);
        const double fm = f(xm);
        out.min_abs = std::min(out.min_abs, std::fabs(fm));
        if (std::fabs(fm) <= opts.zero_tol) {
            out.roots.push_back(xm);
        } else if ((fm < 0.0) != (fs[i] < 0.0)) {
            out.min_abs = 0.0;
            out.roots.push_back(bisect(f, xs[l], xm, opts.x_tol));
            out.roots.push_back(bisect(f, xm, xs[r], opts.x_tol));
        }
    }

    std::sort(out.roots.begin(), out.roots.end());
    const double merge = 1e-9 * (hi - lo);
    std::vector<double> unique;
    for (double r : out.roots) {
        if (unique.empty() || r - unique.back() > merge) unique.push_back(r);
    }
    // drop roots swallowed by a flat run
    std::erase_if(unique, [&](double r) {
        return std::any_of(out.flat.begin(), out.flat.end(),
                           [&](const Interval& iv) { return r >= iv.lo - merge && r <= iv.hi + merge; });
    });
    out.roots = std::move(unique);
    if (!out.roots.empty() || !out.flat.empty()) out.min_abs = std::min(out.min_abs, 0.0);
    return out;
}

}  // namespace filippov::scan
