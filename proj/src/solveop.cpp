#include "philap/solveop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "philap/errors.hpp"
#include "roots.hpp"

namespace philap {

namespace {

/// Oriented integral of (s - phi(x)) over x from xa to xb (same sign).
/// int over [lo, hi] of s - phi(x), with lo and hi on the same side of 0.
double one_sided_area(const Homeomorphism& phi, double lo, double hi, double s) {
    const double near = std::min(std::abs(lo), std::abs(hi));
    const double far = std::max(std::abs(lo), std::abs(hi));
    if (near < 0.5 * far) {
        // phi may be non-smooth at 0 (e.g. x^{1/3}); double-exponential
        // quadrature absorbs endpoint singularities. The integral is taken on
        // [0, hi - lo] anchored at the endpoint nearest 0, since abscissas
        // that round onto a nonzero endpoint trip an assertion in boost.
        const double anchor = std::abs(lo) <= std::abs(hi) ? lo : hi;
        const double dir = anchor == lo ? 1.0 : -1.0;
        auto shifted = [&phi, s, anchor, dir](double t) { return s - phi(anchor + dir * t); };
        thread_local boost::math::quadrature::tanh_sinh<double> ts;
        return ts.integrate(shifted, 0.0, hi - lo, 1e-14);
    }
    auto integrand = [&phi, s](double x) { return s - phi(x); };
    return boost::math::quadrature::gauss<double, 7>::integrate(integrand, lo, hi);
}

double area(const Homeomorphism& phi, double xa, double xb, double s) {
    if (xa == xb) return 0.0;
    const double lo = std::min(xa, xb), hi = std::max(xa, xb);
    const double sign = xb > xa ? 1.0 : -1.0;
    if (lo < 0.0 && hi > 0.0) {
        return sign * (one_sided_area(phi, lo, 0.0, s) + one_sided_area(phi, 0.0, hi, s));
    }
    return sign * one_sided_area(phi, lo, hi, s);
}

/// int_{sa}^{sb} phi^{-1}(s) ds, with xa = phi^{-1}(sa), xb = phi^{-1}(sb).
double segment(const Homeomorphism& phi, double sa, double sb, double xa, double xb) {
    return xa * (sb - sa) + area(phi, xa, xb, sb);
}

struct Profile {
    std::vector<double> x;     // phi^{-1}(c - H_i)
    std::vector<double> cells; // cell integrals of phi^{-1}(c - H)
    double total = 0.0;
};

Profile profile(const Homeomorphism& phi, const std::vector<double>& nodes,
                const std::vector<double>& H, double c) {
    const std::size_t n = nodes.size();
    Profile p;
    p.x.resize(n);
    p.cells.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i) p.x[i] = phi.inverse(c - H[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double m = mean_inverse(phi, c - H[i], c - H[i + 1], p.x[i], p.x[i + 1]);
        p.cells[i] = (nodes[i + 1] - nodes[i]) * m;
        p.total += p.cells[i];
    }
    return p;
}

double interpolate_linear(const Grid& g, const std::vector<double>& v, double x) {
    const std::size_t k = g.cell_of(x);
    const double t = (x - g[k]) / g.spacing(k);
    return v[k] + t * (v[k + 1] - v[k]);
}

}  // namespace

double mean_inverse(const Homeomorphism& phi, double g0, double g1, double x0, double x1) {
    if (g0 == g1) return x0;
    if ((g0 > 0.0 && g1 < 0.0) || (g0 < 0.0 && g1 > 0.0)) {
        const double total = segment(phi, g0, 0.0, x0, 0.0) + segment(phi, 0.0, g1, 0.0, x1);
        return total / (g1 - g0);
    }
    const double m = x0 + area(phi, x0, x1, g1) / (g1 - g0);
    // Guard the convex-combination property against roundoff.
    return std::clamp(m, std::min(x0, x1), std::max(x0, x1));
}

BvpSolution solve_s_phi(const Homeomorphism& phi, const SampledFunction& h) {
    const Grid& grid = h.grid();
    const std::size_t n = grid.size();
    SampledFunction Hf = cumulative_integral(h);
    const std::vector<double> H = Hf.values();
    const auto [lo_it, hi_it] = std::minmax_element(H.begin(), H.end());
    const double lo = *lo_it, hi = *hi_it;

    double c = 0.0;
    if (lo < hi) {
        double abs_mass = 0.0;
        for (double cell : cell_integrals(h)) abs_mass += std::abs(cell);
        const double floor = 1e-14 * (1.0 + abs_mass);
        auto F = [&](double cc) { return profile(phi, grid.nodes(), H, cc).total; };
        auto [ca, cb] = detail::bracketed_solve(F, 0.0, lo, hi, floor);
        c = ca == cb ? ca : (std::abs(F(ca)) <= std::abs(F(cb)) ? ca : cb);
    }

    const Profile p = profile(phi, grid.nodes(), H, c);
    std::vector<double> u(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        acc += p.cells[i];
        u[i + 1] = acc;
    }
    double sup_u = 0.0;
    for (double v : u) sup_u = std::max(sup_u, std::abs(v));
    if (std::abs(u.back()) > kBoundaryTolerance * (1.0 + sup_u)) {
        throw NumericalFailure("boundary defect u(b) = " + format_double(u.back()) +
                               " exceeds tolerance (c_h = " + format_double(c) + ")");
    }

    std::vector<double> defect(n);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        defect[i] = phi(p.x[i]) - (c - H[i]);
        residual = std::max(residual, std::abs(defect[i]));
    }
    const GridPtr& gp = h.grid_ptr();
    return BvpSolution{SampledFunction(gp, std::move(u)), SampledFunction(gp, p.x), c, residual,
                       SampledFunction(gp, std::move(defect)), std::move(Hf)};
}

SupportBounds support_bounds(const SampledFunction& h) {
    const Grid& g = h.grid();
    const auto cells = cell_integrals(h);
    const double tol_scale = 1e-12 * sup_norm(h);
    std::optional<std::size_t> first, last;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double tol = tol_scale * g.spacing(i);
        if (cells[i] < -tol) {
            throw DomainError("support bounds require a nonnegative weight (negative mass near x = " +
                              format_double(g[i]) + ")");
        }
        if (cells[i] > tol) {
            if (!first) first = i;
            last = i;
        }
    }
    if (!first) throw DomainError("support bounds are undefined for a weight that vanishes identically");
    SupportBounds s;
    s.alpha = g[*first];
    s.beta = g[*last + 1];
    const double a = g.interval().a(), b = g.interval().b();
    s.theta_under = std::min(1.0 / (s.beta - a), 1.0 / (b - s.alpha));
    s.theta_bar = 0.5 * (s.alpha + s.beta);
    return s;
}

namespace {

/// min of int_a^theta phi^{-1}(H(theta) - H) and int_theta^b phi^{-1}(H - H(theta)).
double envelope_minimum(const Homeomorphism& phi, const Grid& g, const std::vector<double>& H,
                        double theta) {
    const std::size_t n = g.size();
    const std::size_t k = g.cell_of(theta);
    const double Ht = interpolate_linear(g, H, theta);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = phi.inverse(i <= k ? Ht - H[i] : H[i] - Ht);

    double left = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        left += g.spacing(i) * mean_inverse(phi, Ht - H[i], Ht - H[i + 1], x[i], x[i + 1]);
    }
    left += (theta - g[k]) * mean_inverse(phi, Ht - H[k], 0.0, x[k], 0.0);

    double right = (g[k + 1] - theta) * mean_inverse(phi, 0.0, H[k + 1] - Ht, 0.0, x[k + 1]);
    for (std::size_t i = k + 1; i + 1 < n; ++i) {
        right += g.spacing(i) * mean_inverse(phi, H[i] - Ht, H[i + 1] - Ht, x[i], x[i + 1]);
    }
    return std::min(left, right);
}

}  // namespace

BoundEnvelope bound_envelope(const Homeomorphism& phi, const SampledFunction& h,
                             std::optional<double> n_exponent) {
    const SupportBounds s = support_bounds(h);
    const Grid& g = h.grid();
    const std::vector<double> H = cumulative_integral(h).values();
    const double m_const = envelope_minimum(phi, g, H, s.theta_bar);
    const double top = phi.inverse(H.back());

    const std::size_t n = g.size();
    std::vector<double> lower(n), upper(n);
    const Interval& iv = g.interval();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::max(0.0, iv.delta(g[i]));
        lower[i] = s.theta_under * m_const * d;
        upper[i] = top * d;
    }
    BoundEnvelope env{SampledFunction(h.grid_ptr(), std::move(lower)),
                      SampledFunction(h.grid_ptr(), std::move(upper)), m_const, std::nullopt, s};
    if (n_exponent) {
        if (!(*n_exponent > 0.0)) throw ConfigError("envelope exponent must be positive");
        env.n_omega_constant =
            envelope_minimum(Homeomorphism::p_laplacian(1.0 + *n_exponent), g, H, s.theta_bar);
    }
    return env;
}

double residual_of(const Homeomorphism& phi, const SampledFunction& h, const BvpSolution& candidate) {
    if (!h.grid().same_nodes(candidate.uprime.grid())) {
        throw ConfigError("candidate solution lives on a different grid");
    }
    const SampledFunction H = cumulative_integral(h);
    double r = 0.0;
    for (std::size_t i = 0; i < H.size(); ++i) {
        r = std::max(r, std::abs(phi(candidate.uprime[i]) - (candidate.c_h - H[i])));
    }
    return r;
}

double equation_defect(const Homeomorphism& phi, const SampledFunction& uprime,
                       const SampledFunction& source) {
    if (!uprime.grid().same_nodes(source.grid())) {
        throw ConfigError("slope profile and source live on different grids");
    }
    const SampledFunction H = cumulative_integral(source);
    const double c = phi(uprime[0]);
    double r = 0.0;
    for (std::size_t i = 0; i < H.size(); ++i) {
        r = std::max(r, std::abs(phi(uprime[i]) - (c - H[i])));
    }
    return r;
}

}  // namespace philap
