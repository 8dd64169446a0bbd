#pragma once

// Internal bracketed scalar root finders shared by the homeomorphism inverse,
// the growth-witness inverse and the c_h search of the solution operator.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "philap/errors.hpp"

namespace philap::detail {

inline constexpr int kMaxRootIterations = 200;

/// Grows hi (starting at max(1, target)) by doubling until f(hi) >= target.
template <class F>
double grow_upper_bracket(F&& f, double target) {
    double hi = std::max(1.0, target);
    for (int i = 0; i < kMaxRootIterations; ++i) {
        if (f(hi) >= target) return hi;
        hi *= 2.0;
    }
    throw NumericalFailure("inverse bracket growth exceeded iteration cap for y = " +
                           std::to_string(target));
}

/// Solves f(x) = target on [lo, hi] for increasing f with f(lo) <= target <= f(hi),
/// using Newton steps guarded by bisection. Converges to a bracket of a few ulps.
template <class F, class DF>
double guarded_newton(F&& f, DF&& df, double target, double lo, double hi) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double x = 0.5 * (lo + hi);
    double width = hi - lo;
    for (int i = 0; i < kMaxRootIterations; ++i) {
        const double fx = f(x) - target;
        if (fx == 0.0) return x;
        if (fx < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double d = df(x);
        double next = (d > 0.0 && std::isfinite(d)) ? x - fx / d : lo - 1.0;
        // Bisect when Newton leaves the bracket or fails to halve it.
        if (!(next > lo && next < hi) || hi - lo > 0.5 * width) next = 0.5 * (lo + hi);
        width = hi - lo;
        const double scale = std::abs(next);
        if (std::abs(next - x) <= 2.0 * eps * scale || hi - lo <= 4.0 * eps * std::abs(hi) ||
            next == lo || next == hi) {
            return next;
        }
        x = next;
    }
    throw NumericalFailure("inverse solve did not converge for y = " + std::to_string(target));
}

/// Derivative-free bracketed solve (TOMS 748) of f(x) = target on [lo, hi].
/// `abs_floor` is the absolute bracket width below which the search stops.
template <class F>
std::pair<double, double> bracketed_solve(F&& f, double target, double lo, double hi,
                                          double abs_floor) {
    auto g = [&](double x) { return f(x) - target; };
    double glo = g(lo);
    double ghi = g(hi);
    if (glo == 0.0) return {lo, lo};
    if (ghi == 0.0) return {hi, hi};
    if (glo > 0.0 || ghi < 0.0) {
        throw NumericalFailure("root is not bracketed on [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]");
    }
    auto tol = [abs_floor](double a, double b) {
        return std::abs(b - a) <=
               std::max(abs_floor, 4.0 * std::numeric_limits<double>::epsilon() *
                                       std::max(std::abs(a), std::abs(b)));
    };
    std::uintmax_t iters = kMaxRootIterations;
    auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
    if (iters >= static_cast<std::uintmax_t>(kMaxRootIterations) && !tol(a, b)) {
        throw NumericalFailure("bracketed solve did not converge; final bracket [" +
                               std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return {a, b};
}

}  // namespace philap::detail
