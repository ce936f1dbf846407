#pragma once

#include <cmath>
#include <functional>

#include "equicomp/errors.hpp"

namespace equicomp {

// Safeguarded Newton for a strictly increasing function with a sign-changing
// bracket [lo, hi]: Newton steps are accepted only while they stay inside the
// current bracket, otherwise the step falls back to bisection. Terminates when
// `converged(x, fx)` says so or the bracket collapses to machine width.
template <class F, class DF, class Conv>
double newton_bisect_increasing(F f, DF df, double lo, double hi, Conv converged,
                                int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo > 0 || fhi < 0) throw guard_error("root bracket does not straddle zero");
    if (converged(lo, flo)) return lo;
    if (converged(hi, fhi)) return hi;

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        if (converged(x, fx)) return x;
        if (fx > 0) hi = x; else lo = x;

        double next = x;
        const double d = df(x);
        if (d > 0 && std::isfinite(d)) {
            next = x - fx / d;
        }
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) next = 0.5 * (lo + hi);
        x = next;
        if (hi - lo <= std::abs(x) * 1e-16) return x;
    }
    return x;
}

} // namespace equicomp
