#include "philap/existence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "philap/errors.hpp"

namespace philap {

std::string to_string(ProblemCase c) { return c == ProblemCase::CaseI ? "I" : "II"; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxHalvings = 80;

/// Largest power of two not exceeding x (x > 0).
double dyadic_floor(double x) {
    if (!std::isfinite(x) || !(x > 0.0)) return x;
    int e = 0;
    const double frac = std::frexp(x, &e);
    return frac == 0.5 ? x : std::ldexp(1.0, e - 1);
}

/// Smallest power of two not below x (x > 0).
double dyadic_ceil(double x) {
    if (!std::isfinite(x) || !(x > 0.0)) return x;
    int e = 0;
    const double frac = std::frexp(x, &e);
    return frac == 0.5 ? x : std::ldexp(1.0, e);
}

double fpos(const ProblemSpec& spec, double t) { return spec.f(std::max(0.0, t)); }

/// Minimum of a nodewise inequality over interior nodes and both one-sided limits
/// of the weights, with a relative failure test.
struct NodeMin {
    double value = kInf;
    double x = 0.0;
    bool failed = false;
    double worst_relative = -kInf;
    double worst_x = 0.0;

    void add(double margin, double scale, double x_at) {
        if (std::isnan(margin)) {
            failed = true;
            worst_x = x_at;
            return;
        }
        if (margin < value) {
            value = margin;
            x = x_at;
        }
        const double rel = scale > 0.0 ? -margin / scale : (margin < 0.0 ? kInf : -kInf);
        if (rel > worst_relative) {
            worst_relative = rel;
            worst_x = x_at;
        }
        if (margin < 0.0 && -margin > kMarginTolerance * scale) failed = true;
    }
};

/// fn(i, m, r) -> {margin, scale}, evaluated at each interior node for each
/// one-sided limit of m and r.
template <class Fn>
NodeMin nodewise(const Problem& pb, Fn fn) {
    NodeMin out;
    const std::size_t n = pb.grid->size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const bool jump = pb.m.has_jump(i) || (pb.r && pb.r->has_jump(i));
        for (int side = 0; side < (jump ? 2 : 1); ++side) {
            const double m = side == 0 ? pb.m.left(i) : pb.m.right(i);
            const double r = pb.r ? (side == 0 ? pb.r->left(i) : pb.r->right(i)) : 0.0;
            const auto [margin, scale] = fn(i, m, r);
            out.add(margin, scale, (*pb.grid)[i]);
        }
    }
    if (n <= 2) out.value = 0.0;
    return out;
}

/// lower <= upper, judged against the sup norms (both vanish at the boundary).
NodeMin ordering(const SampledFunction& lower, const SampledFunction& upper) {
    NodeMin out;
    const double scale = sup_norm(lower) + sup_norm(upper);
    for (std::size_t i = 0; i < lower.size(); ++i) out.add(upper[i] - lower[i], scale, lower.grid()[i]);
    return out;
}

struct MarginBook {
    std::map<std::string, double> margins;
    std::string failure;

    void scalar(const std::string& name, double slack, double scale) {
        margins[name] = slack;
        if (failure.empty() && (std::isnan(slack) || slack < -1e-12 * std::abs(scale))) {
            failure = name + " slack " + format_double(slack);
        }
    }
    void nodal(const std::string& name, const NodeMin& nm) {
        margins[name] = nm.value;
        if (failure.empty() && nm.failed) {
            failure = name + " margin " + format_double(nm.value) + " at x = " + format_double(nm.worst_x);
        }
    }
    bool ok() const { return failure.empty(); }
};

SampledFunction m_delta_q(const Problem& pb, double q) { return pb.m * delta_power(pb.grid, q); }

double delta_pow(const Problem& pb, std::size_t i, double q) {
    return std::pow(std::max(0.0, pb.grid->interval().delta((*pb.grid)[i])), q);
}

double sup_ratio(const Homeomorphism& phi, const std::vector<double>& ts, double c, double p,
                 bool numerator_phi_ct_over_phi_t) {
    double s = 0.0;
    for (double t : ts) {
        if (t <= 0.0) continue;
        const double r = numerator_phi_ct_over_phi_t ? phi(c * t) / phi(t) : phi(t) / std::pow(t, p);
        if (std::isnan(r)) continue;
        s = std::max(s, r);
    }
    return s;
}

/// K with phi(t) <= K t^p on (0, hi], from a sampled supremum.
double measured_power_ceiling(const Homeomorphism& phi, double p, double hi) {
    return kSafetyFactor * sup_ratio(phi, default_closed_grid(hi), 0.0, p, false);
}

/// N with phi(c t) <= N phi(t) for t >= 1, from a sampled supremum.
double measured_doubling_ceiling(const Homeomorphism& phi, double c) {
    return kSafetyFactor * sup_ratio(phi, default_large_grid(), c, 0.0, true);
}

Problem without_r(const Problem& pb) {
    Problem out = pb;
    out.r.reset();
    out.spec.r.reset();
    return out;
}

/// lambda m f(u) - r phi(u) at every node limit, with clamping applied by the caller.
SampledFunction rhs(const Problem& pb, const std::vector<double>& u) {
    const std::size_t n = u.size();
    const ProblemSpec& s = pb.spec;
    std::vector<double> left(n), right(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fu = fpos(s, u[i]);
        const double pu = pb.r ? s.phi(u[i]) : 0.0;
        left[i] = s.lambda * pb.m.left(i) * fu - (pb.r ? pb.r->left(i) * pu : 0.0);
        right[i] = s.lambda * pb.m.right(i) * fu - (pb.r ? pb.r->right(i) * pu : 0.0);
    }
    auto ls = pb.m.left_singularity(), rs = pb.m.right_singularity();
    if (pb.r) {
        auto mn = [](std::optional<double> x, std::optional<double> y) -> std::optional<double> {
            if (x && y) return std::min(*x, *y);
            return x ? x : y;
        };
        ls = mn(ls, pb.r->left_singularity());
        rs = mn(rs, pb.r->right_singularity());
    }
    return SampledFunction(pb.grid, std::move(left), std::move(right), Provenance::Samples)
        .with_singularities(ls, rs);
}

template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
    auto tag = [stage](const std::exception& e) { return std::string(stage) + ": " + e.what(); };
    try {
        return fn();
    } catch (const HypothesisViolation& e) {
        throw HypothesisViolation(tag(e));
    } catch (const PreconditionError& e) {
        throw PreconditionError(tag(e));
    } catch (const ConstructionFailure& e) {
        throw ConstructionFailure(tag(e));
    } catch (const NonConvergence& e) {
        throw NonConvergence(tag(e));
    } catch (const NumericalFailure& e) {
        throw NumericalFailure(tag(e));
    } catch (const DomainError& e) {
        throw DomainError(tag(e));
    } catch (const ConfigError& e) {
        throw ConfigError(tag(e));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Problem

Problem Problem::discretize(const ProblemSpec& spec, std::span<const double> extra_breakpoints) {
    if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) throw ConfigError("lambda must be positive");
    if (!spec.f) throw ConfigError("problem has no nonlinearity f");
    spec.m.validate(spec.interval);
    if (spec.r) spec.r->validate(spec.interval);
    std::vector<double> bps = spec.m.breakpoints;
    if (spec.r) bps.insert(bps.end(), spec.r->breakpoints.begin(), spec.r->breakpoints.end());
    for (double x : extra_breakpoints) {
        if (x > spec.interval.a() && x < spec.interval.b()) bps.push_back(x);
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    GridPtr grid = Grid::uniform(spec.interval, spec.grid_n, bps);

    Problem pb{spec, grid, sample(spec.m, grid), std::nullopt};
    if (spec.r) pb.r = sample(*spec.r, grid);
    return pb;
}

Problem Problem::from_samples(const ProblemSpec& spec, SampledFunction m, std::optional<SampledFunction> r) {
    GridPtr grid = m.grid_ptr();
    ProblemSpec s = spec;
    s.interval = grid->interval();
    s.grid_n = static_cast<int>(grid->size());
    return Problem{s, grid, std::move(m), std::move(r)};
}

bool Problem::has_r() const {
    if (!r) return false;
    for (std::size_t i = 0; i < r->size(); ++i) {
        if (r->left(i) != 0.0 || r->right(i) != 0.0) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Hypotheses

std::vector<HypothesisReport> verify_hypotheses(const ProblemSpec& spec) {
    std::vector<HypothesisReport> out;
    const double c = spec.interval.c_omega();
    if (spec.problem_case == ProblemCase::CaseI) {
        if (!spec.psi) throw PreconditionError("case I requires a growth witness psi");
        out.push_back(check_h1(spec.phi, *spec.psi));
        out.push_back(check_f1(spec.f, spec.k1, spec.k2, spec.q, spec.t_bar));
        out.push_back(check_sublinearity_case_i(*spec.psi, spec.q));
    } else {
        out.push_back(check_h1_prime(spec.phi, spec.p, c));
        out.push_back(check_f1_prime(spec.f, spec.phi, spec.k1, spec.k2, spec.q1, spec.q2, spec.t_bar));
        out.push_back(check_sublinearity_case_ii(spec.p, spec.q1, spec.q2));
    }
    if (spec.r) out.push_back(check_h2(spec.phi, spec.t2, spec.M, c));
    return out;
}

namespace {

void require_corroborated(const std::vector<HypothesisReport>& reports) {
    for (const auto& r : reports) {
        if (r.violated()) {
            std::string msg = to_string(r.hypothesis) + " violated";
            if (!r.failed_condition.empty()) msg += " (" + r.failed_condition + ")";
            if (r.violation_point) {
                msg += " at (" + format_double(r.violation_point->first) + ", " +
                       format_double(r.violation_point->second) + ")";
            }
            throw HypothesisViolation(msg);
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Case I

namespace {

/// Everything in the case I chain except the final dyadic choice of epsilon.
CaseIConstants case_i_chain(const Problem& pb) {
    const ProblemSpec& s = pb.spec;
    if (!s.psi) throw PreconditionError("case I requires a growth witness psi");
    const GrowthWitness& psi = *s.psi;
    const double c = s.interval.c_omega();

    CaseIConstants k;
    const SampledFunction mdq = m_delta_q(pb, s.q);
    k.integral_mdq = integrate(mdq);
    if (!(k.integral_mdq > 0.0)) throw PreconditionError("weight m must be nonnegative and nontrivial");
    k.epsilon_bar = s.phi(s.t_bar / c) / k.integral_mdq;
    const BoundEnvelope env = bound_envelope(s.phi, mdq);
    k.m_omega = env.m_omega_constant;
    k.theta_under = support_bounds(pb.m).theta_under;
    k.M = std::max(1.0 / (s.lambda * s.k1 * std::pow(k.theta_under * k.m_omega, s.q)),
                   s.lambda * s.k2 * std::pow(s.phi.inverse(k.integral_mdq), s.q));

    // eps0: largest dyadic s <= t1 with M psi(s') <= s'^q for s' = s and the
    // next 60 dyadic values below it.
    auto holds = [&](double x) { return k.M * psi(x) <= std::pow(x, s.q); };
    double start = dyadic_floor(psi.t1());
    for (int j = 0; j <= 200; ++j) {
        const double x = std::ldexp(start, -j);
        bool all = true;
        for (int l = 0; l <= 60 && all; ++l) all = holds(std::ldexp(x, -l));
        if (all) {
            k.epsilon0 = x;
            break;
        }
    }
    if (!(k.epsilon0 > 0.0)) {
        throw HypothesisViolation("no epsilon0 with M psi(eps0) <= eps0^q; the growth condition fails numerically");
    }
    k.e2_bound = std::min({1.0, k.epsilon_bar, psi(k.epsilon0), psi(psi.t1())});
    return k;
}

void case_i_theory(MarginBook& book, const Problem& pb, const CaseIConstants& k, double eps) {
    const ProblemSpec& s = pb.spec;
    const GrowthWitness& psi = *s.psi;
    const double lhs_pri = s.phi.inverse(eps * k.integral_mdq);
    const double t_pri = s.t_bar / s.interval.c_omega();
    book.scalar("pri", t_pri - lhs_pri, t_pri);
    if (eps <= psi(psi.t1())) {
        const double e0_rhs = std::pow(psi.inverse(eps), s.q);
        book.scalar("e0", e0_rhs - k.M * eps, e0_rhs);
    } else {
        book.scalar("e0", -kInf, 1.0);
    }
    book.scalar("e2", k.e2_bound - eps, k.e2_bound);
}

SubSuperPair evaluate_case_i(const Problem& pb, const CaseIConstants& k, double eps, MarginBook& book) {
    const ProblemSpec& s = pb.spec;
    if (!(eps > 0.0)) throw PreconditionError("epsilon must be positive");
    const SampledFunction mdq = m_delta_q(pb, s.q);
    BvpSolution v = solve_s_phi(s.phi, eps * mdq);
    BvpSolution w = solve_s_phi(s.phi, (1.0 / eps) * mdq);

    case_i_theory(book, pb, k, eps);
    book.scalar("sub_bound", s.t_bar - sup_norm(v.u), s.t_bar);
    book.nodal("sub_pointwise", nodewise(pb, [&](std::size_t i, double m, double) {
                   const double lhs = s.lambda * m * fpos(s, v.u[i]);
                   const double rhs = eps * m * delta_pow(pb, i, s.q);
                   return std::pair{lhs - rhs, std::abs(lhs) + std::abs(rhs)};
               }));
    book.nodal("super_pointwise", nodewise(pb, [&](std::size_t i, double m, double) {
                   const double lhs = m * delta_pow(pb, i, s.q) / eps;
                   const double rhs = s.lambda * m * fpos(s, w.u[i]);
                   return std::pair{lhs - rhs, std::abs(lhs) + std::abs(rhs)};
               }));
    book.nodal("order", ordering(v.u, w.u));

    SubSuperPair pair{std::move(v), std::move(w), eps, std::nullopt, book.margins, {}, {}};
    pair.constants = {{"epsilon_bar", k.epsilon_bar}, {"epsilon0", k.epsilon0},
                      {"M_Omega", k.m_omega},         {"theta_under", k.theta_under},
                      {"int_m_delta_q", k.integral_mdq}, {"M", k.M},
                      {"e2_bound", k.e2_bound}};
    return pair;
}

}  // namespace

CaseIConstants pick_epsilon_case_i(const Problem& problem) {
    const ProblemSpec& s = problem.spec;
    if (!s.psi) throw PreconditionError("case I requires a growth witness psi");
    const HypothesisReport nu = check_sublinearity_case_i(*s.psi, s.q);
    if (nu.violated()) {
        throw HypothesisViolation("t^q / psi(t) does not diverge as t -> 0+; no admissible epsilon");
    }
    CaseIConstants k = case_i_chain(problem);
    k.epsilon = dyadic_floor(k.e2_bound);
    if (!(k.epsilon >= std::ldexp(1.0, -kMaxHalvings))) {
        throw HypothesisViolation("no dyadic epsilon above 2^-80 satisfies the case I constraints");
    }
    return k;
}

SubSuperPair build_sub_super_case_i(const Problem& problem, double epsilon) {
    const CaseIConstants k = case_i_chain(problem);
    MarginBook book;
    SubSuperPair pair = evaluate_case_i(problem, k, epsilon, book);
    if (!book.ok()) throw ConstructionFailure("case I pair with epsilon = " + format_double(epsilon) + ": " + book.failure);
    return pair;
}

// ---------------------------------------------------------------------------
// Case II

namespace {

CaseIIConstants case_ii_chain(const Problem& pb) {
    const ProblemSpec& s = pb.spec;
    const double p = s.p;
    if (!(s.q1 > 0.0 && s.q1 < p)) {
        throw PreconditionError("q1 must lie in (0, p); got q1 = " + format_double(s.q1) + ", p = " + format_double(p));
    }
    if (!(s.q2 > 0.0 && s.q2 < 1.0)) {
        throw PreconditionError("q2 must lie in (0, 1); got q2 = " + format_double(s.q2));
    }
    const double c = s.interval.c_omega();
    CaseIIConstants k;
    k.K = s.K ? *s.K : measured_power_ceiling(s.phi, p, 1.0);
    k.N = s.N ? *s.N : measured_doubling_ceiling(s.phi, c);
    if (!std::isfinite(k.K) || !(k.K > 0.0)) throw HypothesisViolation("no finite K with phi(t) <= K t^p on [0, 1]");
    if (!std::isfinite(k.N) || !(k.N > 0.0)) throw HypothesisViolation("no finite N with phi(c t) <= N phi(t) for t >= 1");

    const SampledFunction mdq = m_delta_q(pb, s.q1);
    k.integral_mdq = integrate(mdq);
    k.integral_m = integrate(pb.m);
    if (!(k.integral_mdq > 0.0)) throw PreconditionError("weight m must be nonnegative and nontrivial");
    k.epsilon_bar = s.phi(s.t_bar / c) / k.integral_mdq;
    const BoundEnvelope env = bound_envelope(s.phi, mdq, p);
    k.n_omega = *env.n_omega_constant;
    k.theta_under = support_bounds(pb.m).theta_under;
    k.epsilon_ew = std::pow(s.lambda * s.k1 * std::pow(k.theta_under * k.n_omega / std::pow(k.K, 1.0 / p), s.q1),
                            p / (p - s.q1));
    k.epsilon_kk = s.phi(1.0) / k.integral_mdq;
    return k;
}

double case_ii_gamma_floor(const Problem& pb, const CaseIIConstants& k, double eps) {
    const ProblemSpec& s = pb.spec;
    const double c = s.interval.c_omega();
    return std::max({s.phi(1.0) / k.integral_m,
                     std::pow(s.lambda * s.k2 * std::pow(k.N * k.integral_m, s.q2), 1.0 / (1.0 - s.q2)),
                     eps * std::pow(c, s.q1)});
}

void case_ii_theory(MarginBook& book, const Problem& pb, const CaseIIConstants& k, double eps, double gamma) {
    const ProblemSpec& s = pb.spec;
    const double c = s.interval.c_omega();
    const double t_pri = s.t_bar / c;
    book.scalar("pri", t_pri - s.phi.inverse(eps * k.integral_mdq), t_pri);
    book.scalar("ew", k.epsilon_ew - eps, k.epsilon_ew);
    book.scalar("kk_domain", k.epsilon_kk - eps, k.epsilon_kk);
    const double g1 = s.phi(1.0) / k.integral_m;
    const double g2 = std::pow(s.lambda * s.k2 * std::pow(k.N * k.integral_m, s.q2), 1.0 / (1.0 - s.q2));
    const double g3 = eps * std::pow(c, s.q1);
    book.scalar("gaio_phi1", gamma - g1, gamma);
    book.scalar("gaio_growth", gamma - g2, gamma);
    book.scalar("gamma_enlarge", gamma - g3, gamma);
}

SubSuperPair evaluate_case_ii(const Problem& pb, const CaseIIConstants& k, double eps, double gamma,
                              MarginBook& book) {
    const ProblemSpec& s = pb.spec;
    if (!(eps > 0.0) || !(gamma > 0.0)) throw PreconditionError("epsilon and gamma must be positive");
    const SampledFunction mdq = m_delta_q(pb, s.q1);
    BvpSolution v = solve_s_phi(s.phi, eps * mdq);
    BvpSolution w = solve_s_phi(s.phi, gamma * pb.m);

    case_ii_theory(book, pb, k, eps, gamma);
    book.scalar("sub_bound", s.t_bar - sup_norm(v.u), s.t_bar);
    book.nodal("sub_pointwise", nodewise(pb, [&](std::size_t i, double m, double) {
                   const double lhs = s.lambda * m * fpos(s, v.u[i]);
                   const double rhs = eps * m * delta_pow(pb, i, s.q1);
                   return std::pair{lhs - rhs, std::abs(lhs) + std::abs(rhs)};
               }));
    book.nodal("super_pointwise", nodewise(pb, [&](std::size_t i, double m, double) {
                   const double lhs = gamma * m;
                   const double rhs = s.lambda * m * fpos(s, w.u[i]);
                   return std::pair{lhs - rhs, std::abs(lhs) + std::abs(rhs)};
               }));
    book.nodal("order", ordering(v.u, w.u));

    SubSuperPair pair{std::move(v), std::move(w), eps, gamma, book.margins, {}, {}};
    pair.constants = {{"epsilon_bar", k.epsilon_bar}, {"epsilon_ew", k.epsilon_ew},
                      {"epsilon_kk", k.epsilon_kk},   {"N_Omega", k.n_omega},
                      {"theta_under", k.theta_under}, {"int_m_delta_q1", k.integral_mdq},
                      {"int_m", k.integral_m},        {"K", k.K},
                      {"N", k.N},                     {"gamma_floor", case_ii_gamma_floor(pb, k, eps)}};
    return pair;
}

}  // namespace

CaseIIConstants pick_constants_case_ii(const Problem& problem) {
    CaseIIConstants k = case_ii_chain(problem);
    k.epsilon = dyadic_floor(std::min({k.epsilon_bar, k.epsilon_ew, k.epsilon_kk}));
    if (!(k.epsilon >= std::ldexp(1.0, -kMaxHalvings))) {
        throw HypothesisViolation("no dyadic epsilon above 2^-80 satisfies the case II constraints");
    }
    k.gamma_floor = case_ii_gamma_floor(problem, k, k.epsilon);
    k.gamma = dyadic_ceil(k.gamma_floor);
    if (!std::isfinite(k.gamma)) throw NumericalFailure("gamma overflows: " + format_double(k.gamma_floor));
    return k;
}

SubSuperPair build_sub_super_case_ii(const Problem& problem, double epsilon, double gamma) {
    const CaseIIConstants k = case_ii_chain(problem);
    MarginBook book;
    SubSuperPair pair = evaluate_case_ii(problem, k, epsilon, gamma, book);
    if (!book.ok()) {
        throw ConstructionFailure("case II pair with epsilon = " + format_double(epsilon) +
                                  ", gamma = " + format_double(gamma) + ": " + book.failure);
    }
    return pair;
}

// ---------------------------------------------------------------------------
// Subsolutions below a given supersolution (r-term, sweeps)

namespace {

enum class RBranch { None, RBelowM, Bounded };

RBranch classify_r(const Problem& pb) {
    if (!pb.has_r()) return RBranch::None;
    const SampledFunction& r = *pb.r;
    const SampledFunction& m = pb.m;
    bool below = true;
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (double rv : {r.left(i), r.right(i)}) {
            if (rv < 0.0 && !r.singular_node(i)) throw PreconditionError("r must be nonnegative");
        }
        if (r.singular_node(i) || m.singular_node(i)) {
            if (r.singular_node(i) && !m.singular_node(i)) below = false;
            continue;
        }
        if (r.left(i) > m.left(i) || r.right(i) > m.right(i)) below = false;
    }
    if (below) return RBranch::RBelowM;
    const bool bounded = !m.left_singularity() && !m.right_singularity() && !r.left_singularity() &&
                         !r.right_singularity();
    double inf_m = kInf;
    for (std::size_t i = 0; i < m.size(); ++i) inf_m = std::min({inf_m, m.left(i), m.right(i)});
    if (bounded && inf_m > 0.0) return RBranch::Bounded;
    throw PreconditionError("r-term needs r <= m, or bounded m, r with inf m > 0");
}

/// Exponent used in phi(t) <= K t^p near 0 for the r-term estimate.
double r_exponent(const ProblemSpec& s) {
    if (s.problem_case == ProblemCase::CaseI) {
        if (!s.psi || !s.psi->is_power()) {
            throw PreconditionError("the r-term construction needs a power witness psi(t) = c t^p");
        }
        return s.psi->p();
    }
    return s.p;
}

/// Halves epsilon from `eps_start` until v = S(eps m delta^q) satisfies the
/// subsolution inequality of the full equation and lies below `super`.
/// `super_source` is the right-hand side `super` actually solves.
SubSuperPair sub_below(const Problem& pb, double eps_start, const BvpSolution& super,
                       const SampledFunction& super_source, SubSuperPair seed) {
    const ProblemSpec& s = pb.spec;
    const double q = s.problem_case == ProblemCase::CaseI ? s.q : s.q1;
    const RBranch branch = classify_r(pb);
    const SampledFunction mdq = m_delta_q(pb, q);
    const double I = integrate(mdq);
    const double c = s.interval.c_omega();

    double K_aau = 0.0, P = 0.0;
    if (branch != RBranch::None) {
        P = r_exponent(s);
        K_aau = measured_power_ceiling(s.phi, P, c);
    }

    std::string last_failure = "no attempt";
    double eps = eps_start;
    for (int h = 0; h <= 2 * kMaxHalvings; ++h, eps *= 0.5) {
        MarginBook book;
        if (branch != RBranch::None) {
            const double top = s.phi.inverse(eps * I);
            book.scalar("h2_range", s.t2 - top, s.t2);
            if (!book.ok()) {
                last_failure = book.failure;
                continue;
            }
        }
        BvpSolution v = solve_s_phi(s.phi, eps * mdq);
        book.nodal("sub_pointwise", nodewise(pb, [&](std::size_t i, double m, double r) {
                       const double vi = v.u[i];
                       const double gain = s.lambda * m * fpos(s, vi);
                       const double loss = r * s.phi(std::max(0.0, vi));
                       const double need = eps * m * delta_pow(pb, i, q);
                       return std::pair{gain - loss - need, std::abs(gain) + std::abs(loss) + std::abs(need)};
                   }));
        book.nodal("order", ordering(v.u, super.u));
        if (!book.ok()) {
            last_failure = book.failure;
            continue;
        }
        if (branch != RBranch::None) {
            book.nodal("cofi", nodewise(pb, [&](std::size_t i, double, double) {
                           const double bound = eps * s.M * K_aau * delta_pow(pb, i, P) * I;
                           const double pv = s.phi(std::max(0.0, v.u[i]));
                           return std::pair{bound - pv, std::abs(bound) + std::abs(pv)};
                       }));
            book.margins["r_branch"] = branch == RBranch::RBelowM ? 1.0 : 2.0;
            book.margins["K_aau"] = K_aau;
            if (!book.ok()) {
                last_failure = book.failure;
                continue;
            }
        }
        const std::vector<double> wv = super.u.values();
        const SampledFunction need = rhs(pb, wv);
        book.nodal("super_pointwise", nodewise(pb, [&](std::size_t i, double, double) {
                       // The supersolution solves -phi(w')' = super_source; compare with
                       // the right-hand side of the current equation at w.
                       const double have = super_source.value(i);
                       const double want = need.value(i);
                       return std::pair{have - want, std::abs(have) + std::abs(want)};
                   }));
        book.failure.clear();  // supersolution margin is reported, not enforced here

        SubSuperPair pair = std::move(seed);
        pair.sub = std::move(v);
        pair.super = super;
        pair.epsilon = eps;
        for (auto& [name, value] : book.margins) pair.margins[name] = value;
        pair.constants["halvings"] = h;
        return pair;
    }
    throw ConstructionFailure("epsilon underflow while shrinking the subsolution: " + last_failure);
}

}  // namespace

SubSuperPair adjust_sub_for_r(const Problem& problem, double epsilon) {
    if (!problem.has_r()) {
        if (problem.spec.problem_case == ProblemCase::CaseI) return build_sub_super_case_i(problem, epsilon);
        const CaseIIConstants k = pick_constants_case_ii(problem);
        return build_sub_super_case_ii(problem, epsilon, dyadic_ceil(case_ii_gamma_floor(problem, k, epsilon)));
    }
    const ProblemSpec& s = problem.spec;
    const HypothesisReport h2 = check_h2(s.phi, s.t2, s.M, s.interval.c_omega());
    if (h2.violated()) throw HypothesisViolation("H2 fails with the supplied t2 and M");
    classify_r(problem);
    r_exponent(s);

    const Problem free = without_r(problem);
    const ExistenceCertificate base = solve_problem(free);
    const SampledFunction base_source = rhs(free, base.solution.u.values());

    SubSuperPair seed;
    seed.margins["super_inherited_defect"] = base.final_residual;
    seed.constants["base_epsilon"] = base.pair.epsilon;
    if (base.pair.gamma) seed.gamma = base.pair.gamma;
    return sub_below(problem, epsilon, base.solution, base_source, std::move(seed));
}

// ---------------------------------------------------------------------------
// Iteration

ExistenceCertificate iterate_between(const Problem& problem, const SubSuperPair& pair,
                                     const IterationOptions& options) {
    const ProblemSpec& s = problem.spec;
    const std::vector<double> lower = pair.sub.u.values();
    const std::vector<double> upper = pair.super.u.values();
    const std::size_t n = lower.size();
    if (upper.size() != n || n != problem.grid->size()) throw PreconditionError("pair does not match the problem grid");
    const double order_tol = kMarginTolerance * (sup_norm(pair.sub.u) + sup_norm(pair.super.u));
    for (std::size_t i = 0; i < n; ++i) {
        if (lower[i] > upper[i] + order_tol) {
            throw PreconditionError("subsolution exceeds supersolution at x = " + format_double((*problem.grid)[i]));
        }
    }

    ExistenceCertificate cert;
    cert.pair = pair;

    const double top = *std::max_element(upper.begin(), upper.end());
    {
        double prev = fpos(s, 0.0);
        for (double t : linear_grid(0.0, std::max(top, 1e-300), 1000)) {
            const double v = fpos(s, t);
            if (v < prev) {
                cert.warnings.push_back("f is not nondecreasing on [0, sup super]; monotone convergence is not guaranteed");
                break;
            }
            prev = v;
        }
    }

    auto clamp_all = [&](const std::vector<double>& u) {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = std::clamp(u[i], lower[i], upper[i]);
        return c;
    };

    // Plain Picard steps from the subsolution. When the source is not monotone
    // in u (sign-changing m, r-term) successive updates may point in opposite
    // directions; the update is then relaxed, u <- u + theta (T(u) - u), with
    // theta halved down to 1/64 after each pair of reversals.
    std::vector<double> u = lower;
    std::vector<double> prev_update(n, 0.0);
    std::optional<BvpSolution> sol;
    double step = kInf, defect = kInf, theta = 1.0;
    int reversals = 0;
    bool converged = false;
    int k = 0;
    while (k < options.max_iterations) {
        ++k;
        sol = solve_s_phi(s.phi, rhs(problem, clamp_all(u)));
        const std::vector<double> next = sol->u.values();
        step = 0.0;
        double norm = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            step = std::max(step, std::abs(next[i] - u[i]));
            norm = std::max(norm, std::abs(next[i]));
            dot += (next[i] - u[i]) * prev_update[i];
        }
        if (step <= options.step_tolerance * std::min(1.0, norm)) {
            defect = equation_defect(s.phi, sol->uprime, rhs(problem, clamp_all(next)));
            if (defect <= options.defect_tolerance) {
                u = next;
                converged = true;
                break;
            }
        }
        reversals = dot < 0.0 ? reversals + 1 : 0;
        if (reversals >= 2 && theta > 1.0 / 64.0) {
            theta *= 0.5;
            reversals = 0;
        }
        for (std::size_t i = 0; i < n; ++i) prev_update[i] = next[i] - u[i];
        for (std::size_t i = 0; i < n; ++i) u[i] += theta * (next[i] - u[i]);
    }
    if (!converged) {
        throw NonConvergence("no convergence after " + std::to_string(k) + " iterations (last step " +
                             format_double(step) + ", defect " + format_double(defect) + ")");
    }

    cert.solution = std::move(*sol);
    cert.iterations = k;
    cert.final_residual = defect;
    cert.last_step = step;
    for (std::size_t i = 0; i < n; ++i) {
        if (u[i] < lower[i] - 1e-8 || u[i] > upper[i] + 1e-8) cert.clamp_active = true;
    }
    if (cert.clamp_active) cert.warnings.push_back("clamping is active at convergence; sandwich violated");
    if (theta < 1.0) cert.warnings.push_back("relaxed iteration, final theta = " + format_double(theta));

    cert.slope_a = cert.solution.uprime[0];
    cert.slope_b = cert.solution.uprime[n - 1];
    const double slope_tol = 1e-9 * sup_norm(cert.solution.uprime);
    bool interior_positive = n > 2;
    for (std::size_t i = 1; i + 1 < n; ++i) interior_positive = interior_positive && u[i] > 0.0;
    cert.in_positive_cone = interior_positive && cert.slope_a > slope_tol && cert.slope_b < -slope_tol;
    return cert;
}

// ---------------------------------------------------------------------------
// Orchestration

ExistenceCertificate solve_problem(const ProblemSpec& spec, const IterationOptions& options) {
    const Problem pb = staged("discretize", [&] { return Problem::discretize(spec); });
    return solve_problem(pb, options);
}

ExistenceCertificate solve_problem(const Problem& problem, const IterationOptions& options) {
    const ProblemSpec& s = problem.spec;
    staged("hypotheses", [&] { require_corroborated(verify_hypotheses(s)); });

    SubSuperPair pair = staged("construct", [&]() -> SubSuperPair {
        if (problem.has_r()) {
            const Problem free = without_r(problem);
            const double eps = s.problem_case == ProblemCase::CaseI ? pick_epsilon_case_i(free).epsilon
                                                                   : pick_constants_case_ii(free).epsilon;
            return adjust_sub_for_r(problem, eps);
        }
        if (s.problem_case == ProblemCase::CaseI) {
            const CaseIConstants k = pick_epsilon_case_i(problem);
            double eps = k.epsilon;
            std::string failure;
            for (int h = 0; h <= kMaxHalvings; ++h, eps *= 0.5) {
                MarginBook book;
                SubSuperPair p = evaluate_case_i(problem, k, eps, book);
                if (book.ok()) return p;
                failure = book.failure;
            }
            throw ConstructionFailure("case I pair: " + failure);
        }
        CaseIIConstants k = pick_constants_case_ii(problem);
        double eps = k.epsilon;
        double gamma = k.gamma;
        std::string failure;
        for (int h = 0; h <= 2 * kMaxHalvings; ++h) {
            MarginBook book;
            SubSuperPair p = evaluate_case_ii(problem, k, eps, gamma, book);
            if (book.ok()) return p;
            failure = book.failure;
            if (failure.rfind("super", 0) == 0 || failure.rfind("gaio", 0) == 0 ||
                failure.rfind("gamma", 0) == 0) {
                gamma *= 2.0;
            } else {
                eps *= 0.5;
            }
        }
        throw ConstructionFailure("case II pair: " + failure);
    });

    return staged("iterate", [&] { return iterate_between(problem, pair, options); });
}

std::vector<SweepRow> lambda_sweep(const ProblemSpec& spec, const std::vector<double>& lambdas,
                                   const IterationOptions& options) {
    if (lambdas.empty()) throw ConfigError("lambda sweep needs at least one value");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw ConfigError("sweep values must be positive");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw ConfigError("sweep values must be strictly decreasing");
    }

    std::vector<SweepRow> rows;
    std::optional<ExistenceCertificate> prev;
    std::optional<SampledFunction> prev_source;
    for (double lambda : lambdas) {
        ProblemSpec s = spec;
        s.lambda = lambda;
        const Problem pb = Problem::discretize(s);
        ExistenceCertificate cert;
        if (!prev) {
            cert = solve_problem(pb, options);
        } else {
            cert = staged("sweep", [&] {
                const Problem free = without_r(pb);
                const double eps = s.problem_case == ProblemCase::CaseI ? pick_epsilon_case_i(free).epsilon
                                                                       : pick_constants_case_ii(free).epsilon;
                SubSuperPair pair = sub_below(pb, eps, prev->solution, *prev_source, SubSuperPair{});
                return iterate_between(pb, pair, options);
            });
        }

        const std::vector<double> u = cert.solution.u.values();
        SweepRow row;
        row.lambda = lambda;
        row.sup_u = sup_norm(cert.solution.u);
        row.sup_uprime = sup_norm(cert.solution.uprime);
        row.c1 = row.sup_u + row.sup_uprime;
        const SampledFunction mf = pb.m * cert.solution.u.map([&](double t) { return fpos(s, t); });
        row.bound = s.phi.inverse(lambda * integrate(mf)) * s.interval.c_omega();
        row.bound_holds = row.sup_u <= row.bound + 1e-6;
        if (prev) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                if (u[i] > prev->solution.u[i] + 1e-12) row.below_previous = false;
            }
        }
        row.final_residual = cert.final_residual;
        row.iterations = cert.iterations;
        rows.push_back(row);

        prev_source = rhs(pb, u);
        prev = std::move(cert);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Sign-changing weights

Kink one_sided_slopes(const SampledFunction& u, std::size_t k) {
    const Grid& g = u.grid();
    if (k < 2 || k + 2 >= g.size()) throw PreconditionError("kink too close to the boundary for one-sided slopes");
    auto d3 = [&](std::size_t i0, std::size_t i1, std::size_t i2) {
        const double x0 = g[i0], x1 = g[i1], x2 = g[i2];
        return u[i0] * (1.0 / (x0 - x1) + 1.0 / (x0 - x2)) + u[i1] * (x0 - x2) / ((x1 - x0) * (x1 - x2)) +
               u[i2] * (x0 - x1) / ((x2 - x0) * (x2 - x1));
    };
    return Kink{g[k], d3(k, k - 1, k - 2), d3(k, k + 1, k + 2)};
}

namespace {

SampledFunction restrict_to(const SampledFunction& f, const GridPtr& sub, std::size_t first) {
    const std::size_t n = sub->size();
    std::vector<double> left(n), right(n);
    for (std::size_t i = 0; i < n; ++i) {
        left[i] = f.left(first + i);
        right[i] = f.right(first + i);
    }
    // The restricted piece starts and ends with its inner limits.
    left[0] = right[0];
    right[n - 1] = left[n - 1];
    std::optional<double> ls = first == 0 ? f.left_singularity() : std::nullopt;
    std::optional<double> rs = first + n == f.size() ? f.right_singularity() : std::nullopt;
    return SampledFunction(sub, std::move(left), std::move(right), f.provenance()).with_singularities(ls, rs);
}

SampledFunction extend_by_zero(const SampledFunction& f, const GridPtr& full, std::size_t first) {
    std::vector<double> v(full->size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) v[first + i] = f[i];
    return SampledFunction(full, std::move(v));
}

}  // namespace

ExistenceCertificate solve_sign_changing(const ProblemSpec& spec, const Interval& omega0,
                                         const IterationOptions& options) {
    if (omega0.a() < spec.interval.a() || omega0.b() > spec.interval.b()) {
        throw PreconditionError("omega0 must lie inside the domain");
    }
    const double bps[] = {omega0.a(), omega0.b()};
    const Problem pb = staged("discretize", [&] { return Problem::discretize(spec, bps); });
    const GridPtr& grid = pb.grid;
    const std::size_t i0 = *grid->node_index(omega0.a());
    const std::size_t i1 = *grid->node_index(omega0.b());

    bool any_positive = false;
    for (std::size_t i = 0; i < pb.m.size(); ++i) {
        if (pb.m.left(i) > 0.0 || pb.m.right(i) > 0.0) any_positive = true;
    }
    if (!any_positive) throw PreconditionError("m has no positive part; no admissible omega0");
    double mass0 = 0.0;
    for (std::size_t i = i0; i <= i1; ++i) {
        const double l = i == i0 ? pb.m.right(i) : pb.m.left(i);
        const double r = i == i1 ? pb.m.left(i) : pb.m.right(i);
        if ((l < 0.0 && !pb.m.singular_node(i)) || (r < 0.0 && !pb.m.singular_node(i))) {
            throw PreconditionError("m is negative inside omega0 near x = " + format_double((*grid)[i]));
        }
        mass0 += std::max(l, 0.0) + std::max(r, 0.0);
    }
    if (!(mass0 > 0.0)) throw PreconditionError("m vanishes identically on omega0");

    // Supersolution: the solution with m+ in place of m.
    const Problem plus = Problem::from_samples(spec, pb.m.map([](double v) { return std::max(v, 0.0); }), pb.r);
    const ExistenceCertificate upper = solve_problem(plus, options);

    // Subsolution on omega0, extended by zero.
    const GridPtr sub_grid = grid->slice(i0, i1);
    std::optional<SampledFunction> r0;
    if (pb.r) r0 = restrict_to(*pb.r, sub_grid, i0);
    ProblemSpec spec0 = spec;
    spec0.interval = sub_grid->interval();
    const Problem inner = Problem::from_samples(spec0, restrict_to(pb.m, sub_grid, i0), r0);

    SubSuperPair pair = staged("subsolution", [&] {
        const Problem free = without_r(inner);
        const double eps = spec.problem_case == ProblemCase::CaseI ? pick_epsilon_case_i(free).epsilon
                                                                  : pick_constants_case_ii(free).epsilon;
        const BvpSolution w0{restrict_to(upper.solution.u, sub_grid, i0),
                             restrict_to(upper.solution.uprime, sub_grid, i0), upper.solution.c_h, 0.0,
                             SampledFunction::zero(sub_grid), SampledFunction::zero(sub_grid)};
        const SampledFunction w0_source = rhs(inner, w0.u.values());
        return sub_below(inner, eps, w0, w0_source, SubSuperPair{});
    });

    const BvpSolution& z = pair.sub;
    BvpSolution sub{extend_by_zero(z.u, grid, i0), extend_by_zero(z.uprime, grid, i0), z.c_h, z.residual_sup,
                    extend_by_zero(z.defect, grid, i0), extend_by_zero(z.antiderivative, grid, i0)};

    std::vector<Kink> kinks;
    for (std::size_t k : {i0, i1}) {
        if (k == 0 || k + 1 == grid->size()) continue;
        Kink kink = one_sided_slopes(sub.u, k);
        if (!(kink.left_slope < kink.right_slope)) {
            throw ConstructionFailure("kink condition fails at x = " + format_double(kink.x) + ": left slope " +
                                      format_double(kink.left_slope) + " >= right slope " +
                                      format_double(kink.right_slope));
        }
        kinks.push_back(kink);
    }

    SubSuperPair full;
    full.sub = std::move(sub);
    full.super = upper.solution;
    full.epsilon = pair.epsilon;
    full.gamma = upper.pair.gamma;
    full.margins = pair.margins;
    full.margins.erase("super_pointwise");
    full.margins["order"] = ordering(full.sub.u, full.super.u).value;
    full.margins["super_inherited_defect"] = upper.final_residual;
    double kink_slack = kInf;
    for (const auto& k : kinks) kink_slack = std::min(kink_slack, k.right_slope - k.left_slope);
    if (!kinks.empty()) full.margins["kink"] = kink_slack;
    full.constants = pair.constants;
    full.kink_set = kinks;

    ExistenceCertificate cert = staged("iterate", [&] { return iterate_between(pb, full, options); });
    const std::vector<double> final_u = cert.solution.u.values();
    const double lowest = *std::min_element(final_u.begin(), final_u.end());
    if (lowest < -1e-12) cert.warnings.push_back("solution dips below zero: " + format_double(lowest));
    if (!(sup_norm(cert.solution.u) > 0.0)) throw ConstructionFailure("iteration collapsed to the trivial solution");
    return cert;
}

}  // namespace philap
