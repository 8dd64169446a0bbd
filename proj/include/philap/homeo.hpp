#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "philap/expression.hpp"

namespace philap {

enum class PhiKind {
    PLaplacian,      // |x|^{p-2} x
    SumPowers,       // x^{p1} + x^{p2},          p1 >= p2 > 0
    ExpPower,        // e^{x^p} - 1
    ExpMinusLinear,  // e^x - x - 1
    PowerRatio,      // x^{p1} / (1 + x^{p2}),    p1 > p2 > 0
    LogWeighted,     // x (|ln x| + 1)
    LinearMinusLog,  // x - ln(x + 1)
    LogPower,        // (ln(x + 1))^p
    Custom,          // user expression in x
};

/// Odd increasing homeomorphism of the real line.
///
/// Each kind is defined by a closed form on [0, inf) and extended oddly.
/// Instances are immutable and cheap to copy (custom expressions are shared).
class Homeomorphism {
public:
    static Homeomorphism p_laplacian(double p);
    static Homeomorphism sum_powers(double p1, double p2);
    static Homeomorphism exp_power(double p);
    static Homeomorphism exp_minus_linear();
    static Homeomorphism power_ratio(double p1, double p2);
    static Homeomorphism log_weighted();
    static Homeomorphism linear_minus_log();
    static Homeomorphism log_power(double p);

    /// A user-defined phi given on [0, inf) as an expression in `x`.
    /// Monotonicity must be declared; it is falsified (not proved) on 10^4 samples.
    static Homeomorphism custom(Expression phi, std::optional<Expression> derivative,
                                bool declared_increasing);

    double operator()(double x) const;

    /// Numerical inverse; closed form where one exists, otherwise a bracketed
    /// root solve on |y| with a doubling bracket starting at [0, max(1, |y|)].
    double inverse(double y) const;

    bool has_derivative() const noexcept;
    /// phi'(x); only meaningful when has_derivative().
    double derivative(double x) const;

    PhiKind kind() const noexcept { return kind_; }
    const std::vector<double>& params() const noexcept { return params_; }
    std::string name() const;

private:
    Homeomorphism(PhiKind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}

    double positive(double x) const;
    double positive_derivative(double x) const;
    double positive_inverse(double y) const;

    struct CustomForms {
        Expression phi;
        std::optional<Expression> derivative;
    };

    PhiKind kind_;
    std::vector<double> params_;
    std::shared_ptr<const CustomForms> custom_;
};

inline double eval_phi(const Homeomorphism& phi, double x) { return phi(x); }
inline double eval_phi_inverse(const Homeomorphism& phi, double y) { return phi.inverse(y); }

/// Increasing homeomorphism psi on [0, t1] with psi(0) = 0, used as the H1 witness.
class GrowthWitness {
public:
    static GrowthWitness power(double c, double p, double t1, std::string purpose = "H1");
    static GrowthWitness custom(Expression psi, double t1, std::string purpose = "H1");

    double operator()(double t) const;
    /// psi^{-1}(r) for r in [0, psi(t1)].
    double inverse(double r) const;

    bool is_power() const noexcept { return !custom_; }
    double c() const noexcept { return c_; }
    double p() const noexcept { return p_; }
    double t1() const noexcept { return t1_; }
    const std::string& purpose() const noexcept { return purpose_; }
    std::string name() const;

private:
    GrowthWitness() = default;

    double c_ = 1.0;
    double p_ = 1.0;
    double t1_ = 1.0;
    std::string purpose_;
    std::shared_ptr<const Expression> custom_;
};

// ---------------------------------------------------------------------------
// Hypothesis checks. All asymptotic conditions are sampled on finite grids,
// so a positive verdict only means "not falsified on the tested range".

enum class Hypothesis { H1, H1Prime, H2, F1, F1Prime, NuCondition, Q12Condition };
enum class Verdict { CorroboratedOnRange, ViolatedAt, NotApplicable };

std::string to_string(Hypothesis h);
std::string to_string(Verdict v);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct HypothesisReport {
    Hypothesis hypothesis = Hypothesis::H1;
    Verdict verdict = Verdict::NotApplicable;
    Range t_range;
    Range x_range;
    std::map<std::string, double> witness_constants;
    /// (t, x) where the defining inequality fails worst; for one-variable
    /// conditions the second coordinate carries the offending ratio.
    std::optional<std::pair<double, double>> violation_point;
    /// Which sub-condition failed, e.g. "hbi" for H1'; empty when corroborated.
    std::string failed_condition;

    bool corroborated() const noexcept { return verdict == Verdict::CorroboratedOnRange; }
    bool violated() const noexcept { return verdict == Verdict::ViolatedAt; }
};

using ScalarFn = std::function<double(double)>;

/// Geometric grid with `count` points from lo to hi inclusive (0 < lo < hi).
std::vector<double> geometric_grid(double lo, double hi, int count);
/// Uniform grid with `count` points from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, int count);

/// Default sampling of t -> 0+ (1e-8 .. 1, 20 points per decade).
std::vector<double> default_small_grid(double scale = 1.0);
/// Default sampling of t -> inf (1 .. 1e8, 20 points per decade).
std::vector<double> default_large_grid(double scale = 1.0);
/// Union of a geometric grid on [1e-8 hi, hi], a uniform grid on [0, hi], and 0.
std::vector<double> default_closed_grid(double hi);

/// Relative slack used by every inequality check.
inline constexpr double kInequalitySlack = 1e-9;
/// Log-log slope beyond which a sampled ratio is judged to tend to 0 or infinity.
inline constexpr double kTrendSlope = 0.01;

HypothesisReport check_h1(const Homeomorphism& phi, const GrowthWitness& psi,
                          const std::vector<double>& grid_t, const std::vector<double>& grid_x);
HypothesisReport check_h1(const Homeomorphism& phi, const GrowthWitness& psi);

HypothesisReport check_h1_prime(const Homeomorphism& phi, double p, double c_omega,
                                const std::vector<double>& small_t_grid,
                                const std::vector<double>& large_t_grid);
HypothesisReport check_h1_prime(const Homeomorphism& phi, double p, double c_omega);

HypothesisReport check_h2(const Homeomorphism& phi, double t2, double M, double c_omega,
                          const std::vector<double>& grid_t, const std::vector<double>& grid_x);
HypothesisReport check_h2(const Homeomorphism& phi, double t2, double M, double c_omega);

/// Sup of t phi'(tx) / (phi(t) phi'(x)) over (0,1] x (0,c_omega]; a finite value
/// is an H2 constant with t2 = 1.
HypothesisReport check_h2_derivative(const Homeomorphism& phi, double c_omega,
                                     const std::vector<double>& grid_t,
                                     const std::vector<double>& grid_x);
HypothesisReport check_h2_derivative(const Homeomorphism& phi, double c_omega);

HypothesisReport check_f1(const ScalarFn& f, double k1, double k2, double q, double t_bar,
                          const std::vector<double>& lower_grid,
                          const std::vector<double>& upper_grid);
HypothesisReport check_f1(const ScalarFn& f, double k1, double k2, double q, double t_bar);

HypothesisReport check_f1_prime(const ScalarFn& f, const Homeomorphism& phi, double k1,
                                double k2, double q1, double q2, double t_bar,
                                const std::vector<double>& lower_grid,
                                const std::vector<double>& upper_grid);
HypothesisReport check_f1_prime(const ScalarFn& f, const Homeomorphism& phi, double k1,
                                double k2, double q1, double q2, double t_bar);

/// Case I: t^q / psi(t) -> infinity as t -> 0+, sampled on a decreasing grid.
HypothesisReport check_sublinearity_case_i(const GrowthWitness& psi, double q,
                                           const std::vector<double>& decreasing_t);
HypothesisReport check_sublinearity_case_i(const GrowthWitness& psi, double q);
/// Case II: q1 in (0, p) and q2 in (0, 1).
HypothesisReport check_sublinearity_case_ii(double p, double q1, double q2);

/// True when liminf_{x->0+} phi(x)/x^p > 0 is not falsified on the small grid.
bool check_small_power_floor(const Homeomorphism& phi, double p);

/// H2 constant built from an H1'-type exponent p: M_{c} N_1 N_{c}, where
/// M_{t0} = sup_{(0,t0]} phi(t)/t^p and N_{x0} = sup_{(0,x0]} x^p/phi(x).
/// Sampled suprema are enlarged by `safety`.
double constructed_h2_constant(const Homeomorphism& phi, double p, double c_omega,
                               double safety = 1.05);

}  // namespace philap
