#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "philap/funcgrid.hpp"
#include "philap/homeo.hpp"
#include "philap/solveop.hpp"

namespace philap {

enum class ProblemCase { CaseI, CaseII };

std::string to_string(ProblemCase c);

/// Declarative description of -phi(u')' + r phi(u) = lambda m f(u) on (a, b), u = 0 on the boundary.
struct ProblemSpec {
    Interval interval{0.0, 1.0};
    Homeomorphism phi = Homeomorphism::p_laplacian(2.0);
    ScalarFn f;
    std::string f_text;  // human-readable form of f, for reports

    /// Growth constants of f: k1 t^q <= f(t) on [0, t_bar] and the upper bound.
    double k1 = 1.0;
    double k2 = 1.0;
    double q = 0.5;    // case I
    double q1 = 0.5;   // case II
    double q2 = 0.5;   // case II
    double t_bar = 1.0;

    PiecewiseSpec m = PiecewiseSpec::constant(1.0);
    std::optional<PiecewiseSpec> r;
    double lambda = 1.0;
    ProblemCase problem_case = ProblemCase::CaseI;

    /// Case I witness psi (a power witness is required when r is present).
    std::optional<GrowthWitness> psi;
    /// Case II exponent p and optional explicit K, N (otherwise measured, times 1.05).
    double p = 1.0;
    std::optional<double> K;
    std::optional<double> N;
    /// H2 constants, needed when r is present.
    double t2 = 1.0;
    double M = 1.0;

    int grid_n = Grid::kDefaultNodes;
};

/// A ProblemSpec sampled on a grid whose nodes include every breakpoint.
struct Problem {
    ProblemSpec spec;
    GridPtr grid;
    SampledFunction m;
    std::optional<SampledFunction> r;

    static Problem discretize(const ProblemSpec& spec, std::span<const double> extra_breakpoints = {});
    /// Same spec on a different grid with given weight samples.
    static Problem from_samples(const ProblemSpec& spec, SampledFunction m,
                                std::optional<SampledFunction> r);

    bool has_r() const;
};

/// Safety factor applied to sampled suprema.
inline constexpr double kSafetyFactor = 1.05;
/// Relative tolerance for nodewise inequality margins.
inline constexpr double kMarginTolerance = 1e-9;

/// Every constant of the case I chain, as used by the builders.
struct CaseIConstants {
    double epsilon = 0.0;
    double epsilon_bar = 0.0;
    double epsilon0 = 0.0;
    double m_omega = 0.0;      // envelope constant of m delta^q
    double theta_under = 0.0;
    double integral_mdq = 0.0;  // int m delta^q
    double M = 0.0;
    double e2_bound = 0.0;      // min{1, eps_bar, psi(eps0), psi(t1)}
};

struct CaseIIConstants {
    double epsilon = 0.0;
    double gamma = 0.0;
    double epsilon_bar = 0.0;
    double epsilon_ew = 0.0;
    double epsilon_kk = 0.0;    // eps int m delta^{q1} <= phi(1), keeps (kk) applicable
    double n_omega = 0.0;
    double theta_under = 0.0;
    double integral_mdq = 0.0;  // int m delta^{q1}
    double integral_m = 0.0;
    double K = 0.0;
    double N = 0.0;
    double gamma_floor = 0.0;   // max of the three lower bounds
};

struct Kink {
    double x = 0.0;
    double left_slope = 0.0;
    double right_slope = 0.0;
};

struct SubSuperPair {
    BvpSolution sub;
    BvpSolution super;
    double epsilon = 0.0;
    std::optional<double> gamma;
    /// Inequality name -> minimal slack (nodewise minima or scalar constraint slacks).
    std::map<std::string, double> margins;
    std::map<std::string, double> constants;
    std::vector<Kink> kink_set;
};

struct ExistenceCertificate {
    SubSuperPair pair;
    BvpSolution solution;
    int iterations = 0;
    double final_residual = 0.0;
    double last_step = 0.0;
    bool in_positive_cone = false;
    double slope_a = 0.0;
    double slope_b = 0.0;
    bool clamp_active = false;
    std::vector<std::string> warnings;
};

struct IterationOptions {
    int max_iterations = 500;
    double step_tolerance = 1e-8;
    double defect_tolerance = 1e-6;
};

/// Hypothesis reports required by the declared case (plus H2 when r is present).
std::vector<HypothesisReport> verify_hypotheses(const ProblemSpec& spec);

CaseIConstants pick_epsilon_case_i(const Problem& problem);
SubSuperPair build_sub_super_case_i(const Problem& problem, double epsilon);

CaseIIConstants pick_constants_case_ii(const Problem& problem);
SubSuperPair build_sub_super_case_ii(const Problem& problem, double epsilon, double gamma);

/// Subsolution for the problem with r, below the r-free solution used as supersolution.
SubSuperPair adjust_sub_for_r(const Problem& problem, double epsilon);

ExistenceCertificate iterate_between(const Problem& problem, const SubSuperPair& pair,
                                     const IterationOptions& options = {});

ExistenceCertificate solve_problem(const ProblemSpec& spec, const IterationOptions& options = {});
ExistenceCertificate solve_problem(const Problem& problem, const IterationOptions& options = {});

struct SweepRow {
    double lambda = 0.0;
    double sup_u = 0.0;
    double sup_uprime = 0.0;
    double c1 = 0.0;
    /// phi^{-1}(lambda int m f(u)) c_Omega
    double bound = 0.0;
    bool bound_holds = false;
    bool below_previous = true;
    double final_residual = 0.0;
    int iterations = 0;
};

std::vector<SweepRow> lambda_sweep(const ProblemSpec& spec, const std::vector<double>& lambdas,
                                   const IterationOptions& options = {});

/// Sign-changing m: supersolution from m+, subsolution built on omega0 and
/// extended by zero, kinks checked at the interior endpoints of omega0.
ExistenceCertificate solve_sign_changing(const ProblemSpec& spec, const Interval& omega0,
                                         const IterationOptions& options = {});

/// One-sided slopes of u at node k from the three nearest nodes on each side.
Kink one_sided_slopes(const SampledFunction& u, std::size_t k);

}  // namespace philap
