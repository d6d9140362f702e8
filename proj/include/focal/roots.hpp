#pragma once

// Small 1-D solvers shared by the threshold, minimizer and temperature code.

#include <cmath>
#include <utility>

namespace focal::roots {

struct Bracket {
    double lo;
    double hi;
    double width() const { return hi - lo; }
    double mid() const { return lo + 0.5 * (hi - lo); }
};

// Bisection on a bracket whose endpoints give f values of opposite sign.
// Stops once the bracket is narrower than tol, after max_iters halvings, or
// when the midpoint no longer moves in floating point.
template <class F>
Bracket bisect(F&& f, double lo, double hi, double tol, int max_iters = 200) {
    const bool lo_negative = f(lo) < 0.0;
    for (int it = 0; it < max_iters && hi - lo > tol; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if ((f(mid) < 0.0) == lo_negative) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {lo, hi};
}

// Golden-section search for the minimizer of a unimodal f on [lo, hi].
template <class F>
Bracket golden_minimize(F&& f, double lo, double hi, double tol, int max_iters = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iters && b - a > tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return {a, b};
}

}  // namespace focal::roots
