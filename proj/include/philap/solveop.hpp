#pragma once

#include <optional>

#include "philap/funcgrid.hpp"
#include "philap/homeo.hpp"

namespace philap {

/// Discrete solution of -phi(v')' = h, v(a) = v(b) = 0.
struct BvpSolution {
    SampledFunction u;
    SampledFunction uprime;
    /// The constant with v(b) = 0; the constant making v(a) = 0 from the
    /// right end is integrate(h) - c_h.
    double c_h = 0.0;
    /// sup over nodes of |phi(u') - (c_h - H)|.
    double residual_sup = 0.0;
    /// phi(u'(x_i)) - (c_h - H(x_i)) per node.
    SampledFunction defect;
    /// Cumulative integral H of the right-hand side.
    SampledFunction antiderivative;
};

struct SupportBounds {
    double alpha = 0.0;
    double beta = 0.0;
    double theta_under = 0.0;
    double theta_bar = 0.0;
};

struct BoundEnvelope {
    SampledFunction lower;
    SampledFunction upper;
    /// min of the two one-sided integrals in the lower bound.
    double m_omega_constant = 0.0;
    /// Same minimum with phi^{-1}(s) replaced by s^{1/p}, when an exponent p is given.
    std::optional<double> n_omega_constant;
    SupportBounds support;
};

/// Boundary tolerance factor: |u(b)| <= kBoundaryTolerance (1 + sup|u|).
inline constexpr double kBoundaryTolerance = 1e-8;

/// Evaluates v(x) = int_a^x phi^{-1}(c_h - H(y)) dy.
///
/// H is the cumulative trapezoid integral of h and is linear on every cell,
/// so the inner integral over each cell is computed exactly (up to the
/// quadrature of phi itself). The discrete solution is therefore the exact
/// solution for the cellwise-averaged right-hand side, and inherits its
/// monotonicity, concavity and two-sided bounds.
BvpSolution solve_s_phi(const Homeomorphism& phi, const SampledFunction& h);

/// Throws DomainError if h vanishes identically.
SupportBounds support_bounds(const SampledFunction& h);

BoundEnvelope bound_envelope(const Homeomorphism& phi, const SampledFunction& h,
                             std::optional<double> n_exponent = std::nullopt);

double residual_of(const Homeomorphism& phi, const SampledFunction& h, const BvpSolution& candidate);

/// sup_i |phi(u'(x_i)) - phi(u'(a)) + int_a^{x_i} source| for an arbitrary
/// slope profile: the first-order defect of -phi(u')' = source.
double equation_defect(const Homeomorphism& phi, const SampledFunction& uprime,
                       const SampledFunction& source);

/// Mean of phi^{-1} over the segment [g0, g1] of values, given x_i = phi^{-1}(g_i).
double mean_inverse(const Homeomorphism& phi, double g0, double g1, double x0, double x1);

}  // namespace philap
