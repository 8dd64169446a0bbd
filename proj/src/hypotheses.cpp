#include <algorithm>
#include <cmath>
#include <limits>

#include "philap/errors.hpp"
#include "philap/homeo.hpp"

namespace philap {

std::string to_string(Hypothesis h) {
    switch (h) {
        case Hypothesis::H1: return "H1";
        case Hypothesis::H1Prime: return "H1prime";
        case Hypothesis::H2: return "H2";
        case Hypothesis::F1: return "F1";
        case Hypothesis::F1Prime: return "F1prime";
        case Hypothesis::NuCondition: return "NuCondition";
        case Hypothesis::Q12Condition: return "Q12Condition";
    }
    return "unknown";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::CorroboratedOnRange: return "CorroboratedOnRange";
        case Verdict::ViolatedAt: return "ViolatedAt";
        case Verdict::NotApplicable: return "NotApplicable";
    }
    return "unknown";
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw ConfigError("invalid geometric grid");
    std::vector<double> out(count);
    const double ratio = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) out[i] = lo * std::exp(ratio * i);
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
    if (!(hi > lo) || count < 2) throw ConfigError("invalid linear grid");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * i / (count - 1);
    out.back() = hi;
    return out;
}

std::vector<double> default_small_grid(double scale) { return geometric_grid(1e-8 * scale, scale, 161); }

std::vector<double> default_large_grid(double scale) { return geometric_grid(scale, 1e8 * scale, 161); }

std::vector<double> default_closed_grid(double hi) {
    std::vector<double> out = geometric_grid(1e-8 * hi, hi, 161);
    auto lin = linear_grid(0.0, hi, 101);
    out.insert(out.end(), lin.begin(), lin.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

Range range_of(const std::vector<double>& g) {
    if (g.empty()) return {};
    auto [lo, hi] = std::minmax_element(g.begin(), g.end());
    return {*lo, *hi};
}

/// Tracks the worst violation of lhs <= rhs over a family of samples.
struct InequalityScan {
    double worst = -std::numeric_limits<double>::infinity();  // scale-free excess
    std::pair<double, double> at{0.0, 0.0};
    long skipped = 0;

    void add(double lhs, double rhs, double t, double x) {
        if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
            ++skipped;
            return;
        }
        const double scale = std::max(std::abs(lhs), std::abs(rhs));
        const double excess = scale > 0.0 ? (lhs - rhs) / scale : 0.0;
        if (excess > worst) {
            worst = excess;
            at = {t, x};
        }
    }

    bool violated() const { return worst > kInequalitySlack; }
};

/// Least-squares slope of log r against log t over the last two decades of t
/// (the end of the grid, which is ordered toward the limit point).
double tail_slope(const std::vector<double>& t, const std::vector<double>& r) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::isfinite(r[i]) && r[i] > 0.0 && t[i] > 0.0) {
            pts.emplace_back(std::log10(t[i]), std::log10(r[i]));
        }
    }
    if (pts.size() < 3) return std::nan("");
    const double end = pts.back().first;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [lx, lr] : pts) {
        if (std::abs(lx - end) > 2.0) continue;
        sx += lx;
        sy += lr;
        sxx += lx * lx;
        sxy += lx * lr;
        ++n;
    }
    if (n < 3) return std::nan("");
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::nan("");
    return (n * sxy - sx * sy) / den;
}

std::vector<double> sorted_descending(std::vector<double> g) {
    std::sort(g.begin(), g.end(), std::greater<>());
    return g;
}

std::vector<double> sorted_ascending(std::vector<double> g) {
    std::sort(g.begin(), g.end());
    return g;
}

void finish(HypothesisReport& rep, const InequalityScan& scan, const std::string& condition) {
    rep.witness_constants["worst_relative_excess"] = scan.worst;
    rep.witness_constants["skipped_pairs"] = static_cast<double>(scan.skipped);
    if (scan.violated()) {
        rep.verdict = Verdict::ViolatedAt;
        rep.violation_point = scan.at;
        rep.failed_condition = condition;
    } else {
        rep.verdict = Verdict::CorroboratedOnRange;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

HypothesisReport check_h1(const Homeomorphism& phi, const GrowthWitness& psi,
                          const std::vector<double>& grid_t, const std::vector<double>& grid_x) {
    if (grid_t.empty() || grid_x.empty()) throw ConfigError("check_h1 needs nonempty grids");
    HypothesisReport rep;
    rep.hypothesis = Hypothesis::H1;
    rep.t_range = range_of(grid_t);
    rep.x_range = range_of(grid_x);
    rep.witness_constants["t1"] = psi.t1();
    if (psi.is_power()) {
        rep.witness_constants["psi_c"] = psi.c();
        rep.witness_constants["psi_p"] = psi.p();
    }
    InequalityScan scan;
    std::vector<double> phix(grid_x.size());
    for (std::size_t j = 0; j < grid_x.size(); ++j) phix[j] = phi(grid_x[j]);
    for (double t : grid_t) {
        if (t < 0.0 || t > psi.t1()) continue;
        const double pt = psi(t);
        for (std::size_t j = 0; j < grid_x.size(); ++j) {
            scan.add(phi(t * grid_x[j]), pt * phix[j], t, grid_x[j]);
        }
    }
    finish(rep, scan, "h1");
    return rep;
}

HypothesisReport check_h1(const Homeomorphism& phi, const GrowthWitness& psi) {
    return check_h1(phi, psi, default_closed_grid(psi.t1()),
                    geometric_grid(1e-8, 1e8, 321));
}

HypothesisReport check_h1_prime(const Homeomorphism& phi, double p, double c_omega,
                                const std::vector<double>& small_t_grid,
                                const std::vector<double>& large_t_grid) {
    if (!(p > 0.0) || !(c_omega > 0.0)) throw ConfigError("check_h1_prime needs p, c_omega > 0");
    HypothesisReport rep;
    rep.hypothesis = Hypothesis::H1Prime;
    rep.t_range = range_of(small_t_grid);
    rep.x_range = range_of(large_t_grid);
    rep.witness_constants["p"] = p;
    rep.witness_constants["c_omega"] = c_omega;

    // (h32): liminf_{t->0+} t^p / phi(t) > 0.
    const auto small = sorted_descending(small_t_grid);
    std::vector<double> ratio(small.size());
    double floor = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < small.size(); ++i) {
        const double ph = phi(small[i]);
        ratio[i] = ph > 0.0 ? std::pow(small[i], p) / ph : std::numeric_limits<double>::infinity();
        if (!std::isnan(ratio[i])) floor = std::min(floor, ratio[i]);
    }
    const double small_slope = tail_slope(small, ratio);
    rep.witness_constants["h32_floor"] = floor;
    rep.witness_constants["h32_tail_slope"] = std::isnan(small_slope) ? 0.0 : small_slope;
    rep.witness_constants["K"] = 1.0 / floor;
    // Ratio decaying as t -> 0 means log r grows with log t: positive slope.
    const bool h32_ok = floor > 0.0 && !(small_slope > kTrendSlope);

    // (hbi): limsup_{t->inf} phi(c t) / phi(t) < inf.
    const auto large = sorted_ascending(large_t_grid);
    std::vector<double> big_ratio;
    std::vector<double> big_t;
    double ceiling = 0.0;
    std::optional<std::pair<double, double>> blowup;
    for (double t : large) {
        const double den = phi(t);
        const double num = phi(c_omega * t);
        if (!std::isfinite(den)) break;
        if (!std::isfinite(num)) {
            blowup = std::make_pair(t, std::numeric_limits<double>::infinity());
            break;
        }
        big_t.push_back(t);
        big_ratio.push_back(num / den);
        ceiling = std::max(ceiling, num / den);
    }
    const double large_slope = tail_slope(big_t, big_ratio);
    rep.witness_constants["hbi_tail_slope"] = std::isnan(large_slope) ? 0.0 : large_slope;
    rep.witness_constants["N"] = blowup ? std::numeric_limits<double>::infinity() : ceiling;
    const bool hbi_ok = !blowup && !(large_slope > kTrendSlope);

    if (!h32_ok) {
        rep.verdict = Verdict::ViolatedAt;
        rep.failed_condition = "h32";
        rep.violation_point = std::make_pair(small.back(), ratio.back());
    } else if (!hbi_ok) {
        rep.verdict = Verdict::ViolatedAt;
        rep.failed_condition = "hbi";
        rep.violation_point = blowup ? *blowup : std::make_pair(big_t.back(), big_ratio.back());
    } else {
        rep.verdict = Verdict::CorroboratedOnRange;
    }
    return rep;
}

HypothesisReport check_h1_prime(const Homeomorphism& phi, double p, double c_omega) {
    return check_h1_prime(phi, p, c_omega, default_small_grid(), default_large_grid());
}

HypothesisReport check_h2(const Homeomorphism& phi, double t2, double M, double c_omega,
                          const std::vector<double>& grid_t, const std::vector<double>& grid_x) {
    if (!(t2 > 0.0) || !(M > 0.0) || !(c_omega > 0.0)) {
        throw ConfigError("check_h2 needs t2, M, c_omega > 0");
    }
    HypothesisReport rep;
    rep.hypothesis = Hypothesis::H2;
    rep.t_range = range_of(grid_t);
    rep.x_range = range_of(grid_x);
    rep.witness_constants["t2"] = t2;
    rep.witness_constants["M"] = M;
    rep.witness_constants["c_omega"] = c_omega;
    InequalityScan scan;
    double sup_ratio = 0.0;
    for (double t : grid_t) {
        if (t < 0.0 || t > t2) continue;
        const double pt = phi(t);
        for (double x : grid_x) {
            if (x < 0.0 || x > c_omega) continue;
            const double lhs = phi(t * x);
            const double rhs = pt * phi(x);
            scan.add(lhs, M * rhs, t, x);
            if (rhs > 0.0 && std::isfinite(lhs)) sup_ratio = std::max(sup_ratio, lhs / rhs);
        }
    }
    rep.witness_constants["sup_ratio"] = sup_ratio;
    finish(rep, scan, "h31");
    return rep;
}

HypothesisReport check_h2(const Homeomorphism& phi, double t2, double M, double c_omega) {
    return check_h2(phi, t2, M, c_omega, default_closed_grid(t2), default_closed_grid(c_omega));
}

HypothesisReport check_h2_derivative(const Homeomorphism& phi, double c_omega,
                                     const std::vector<double>& grid_t,
                                     const std::vector<double>& grid_x) {
    HypothesisReport rep;
    rep.hypothesis = Hypothesis::H2;
    rep.t_range = range_of(grid_t);
    rep.x_range = range_of(grid_x);
    rep.witness_constants["c_omega"] = c_omega;
    rep.witness_constants["t2"] = 1.0;
    if (!phi.has_derivative()) {
        rep.verdict = Verdict::NotApplicable;
        rep.failed_condition = "no derivative";
        return rep;
    }
    double sup = 0.0;
    std::pair<double, double> at{0.0, 0.0};
    for (double t : grid_t) {
        if (!(t > 0.0) || t > 1.0) continue;
        const double pt = phi(t);
        for (double x : grid_x) {
            if (!(x > 0.0) || x > c_omega) continue;
            const double value = t * phi.derivative(t * x) / (pt * phi.derivative(x));
            if (std::isnan(value)) continue;
            if (value > sup) {
                sup = value;
                at = {t, x};
            }
        }
    }
    rep.witness_constants["M"] = sup;
    if (std::isfinite(sup)) {
        rep.verdict = Verdict::CorroboratedOnRange;
    } else {
        // An unbounded ratio only means this sufficient criterion is inconclusive.
        rep.verdict = Verdict::NotApplicable;
        rep.failed_condition = "derivative ratio unbounded";
        rep.violation_point = at;
    }
    return rep;
}

HypothesisReport check_h2_derivative(const Homeomorphism& phi, double c_omega) {
    return check_h2_derivative(phi, c_omega, geometric_grid(1e-6, 1.0, 121),
                               geometric_grid(1e-6 * c_omega, c_omega, 121));
}

HypothesisReport check_f1(const ScalarFn& f, double k1, double k2, double q, double t_bar,
                          const std::vector<double>& lower_grid,
                          const std::vector<double>& upper_grid) {
    if (!(k1 > 0.0) || !(k2 > 0.0) || !(q > 0.0) || !(t_bar > 0.0)) {
        throw ConfigError("check_f1 needs positive constants");
    }
    HypothesisReport rep;
    rep.hypothesis = Hypothesis::F1;
    rep.t_range = range_of(lower_grid);
    rep.x_range = range_of(upper_grid);
    rep.witness_constants = {{"k1", k1}, {"k2", k2}, {"q", q}, {"t_bar", t_bar}};
    InequalityScan lower;
    for (double t : lower_grid) {
        if (t < 0.0 || t > t_bar) continue;
        lower.add(k1 * std::pow(t, q), f(t), t, f(t));
    }
    InequalityScan upper;
    for (double t : upper_grid) {
        if (t < 0.0) continue;
        upper.add(f(t), k2 * std::pow(t, q), t, f(t));
    }
    if (lower.violated()) {
        finish(rep, lower, "lower");
    } else {
        finish(rep, upper, "upper");
        rep.witness_constants["lower_worst_relative_excess"] = lower.worst;
    }
    return rep;
}

HypothesisReport check_f1(const ScalarFn& f, double k1, double k2, double q, double t_bar) {
    return check_f1(f, k1, k2, q, t_bar, default_closed_grid(t_bar), default_closed_grid(1e8));
}

HypothesisReport check_f1_prime(const ScalarFn& f, const Homeomorphism& phi, double k1,
                                double k2, double q1, double q2, double t_bar,
                                const std::vector<double>& lower_grid,
                                const std::vector<double>& upper_grid) {
    if (!(k1 > 0.0) || !(k2 > 0.0) || !(q1 > 0.0) || !(q2 > 0.0) || !(t_bar > 0.0)) {
        throw ConfigError("check_f1_prime needs positive constants");
    }
    HypothesisReport rep;
    rep.hypothesis = Hypothesis::F1Prime;
    rep.t_range = range_of(lower_grid);
    rep.x_range = range_of(upper_grid);
    rep.witness_constants = {{"k1", k1}, {"k2", k2}, {"q1", q1}, {"q2", q2}, {"t_bar", t_bar}};
    InequalityScan lower;
    for (double t : lower_grid) {
        if (t < 0.0 || t > t_bar) continue;
        lower.add(k1 * std::pow(t, q1), f(t), t, f(t));
    }
    InequalityScan upper;
    for (double t : upper_grid) {
        if (t < 0.0) continue;
        upper.add(f(t), k2 * std::pow(phi(t), q2), t, f(t));
    }
    if (lower.violated()) {
        finish(rep, lower, "lower");
    } else {
        finish(rep, upper, "upper");
        rep.witness_constants["lower_worst_relative_excess"] = lower.worst;
    }
    return rep;
}

HypothesisReport check_f1_prime(const ScalarFn& f, const Homeomorphism& phi, double k1,
                                double k2, double q1, double q2, double t_bar) {
    return check_f1_prime(f, phi, k1, k2, q1, q2, t_bar, default_closed_grid(t_bar),
                          default_closed_grid(1e8));
}

HypothesisReport check_sublinearity_case_i(const GrowthWitness& psi, double q,
                                           const std::vector<double>& decreasing_t) {
    if (!(q > 0.0)) throw ConfigError("sublinearity check needs q > 0");
    HypothesisReport rep;
    rep.hypothesis = Hypothesis::NuCondition;
    rep.t_range = range_of(decreasing_t);
    rep.witness_constants["q"] = q;
    const auto ts = sorted_descending(decreasing_t);
    std::vector<double> ratio(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double ps = psi(ts[i]);
        ratio[i] = ps > 0.0 ? std::pow(ts[i], q) / ps : std::numeric_limits<double>::infinity();
    }
    const double slope = tail_slope(ts, ratio);
    rep.witness_constants["tail_slope"] = std::isnan(slope) ? 0.0 : slope;
    // Divergence as t -> 0+ shows up as a clearly negative log-log slope.
    const bool diverges = std::isinf(ratio.back()) || slope < -kTrendSlope;
    if (diverges) {
        rep.verdict = Verdict::CorroboratedOnRange;
    } else {
        rep.verdict = Verdict::ViolatedAt;
        rep.failed_condition = "nu";
        rep.violation_point = std::make_pair(ts.back(), ratio.back());
    }
    return rep;
}

HypothesisReport check_sublinearity_case_i(const GrowthWitness& psi, double q) {
    return check_sublinearity_case_i(psi, q, geometric_grid(1e-8 * psi.t1(), psi.t1(), 161));
}

HypothesisReport check_sublinearity_case_ii(double p, double q1, double q2) {
    HypothesisReport rep;
    rep.hypothesis = Hypothesis::Q12Condition;
    rep.witness_constants = {{"p", p}, {"q1", q1}, {"q2", q2}};
    const bool ok = q1 > 0.0 && q1 < p && q2 > 0.0 && q2 < 1.0;
    if (ok) {
        rep.verdict = Verdict::CorroboratedOnRange;
    } else {
        rep.verdict = Verdict::ViolatedAt;
        rep.failed_condition = "q12";
        rep.violation_point = std::make_pair(q1, q2);
    }
    return rep;
}

bool check_small_power_floor(const Homeomorphism& phi, double p) {
    const auto small = sorted_descending(default_small_grid());
    std::vector<double> ratio(small.size());
    double floor = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < small.size(); ++i) {
        ratio[i] = phi(small[i]) / std::pow(small[i], p);
        if (!std::isnan(ratio[i])) floor = std::min(floor, ratio[i]);
    }
    const double slope = tail_slope(small, ratio);
    return floor > 0.0 && !(slope > kTrendSlope);
}

double constructed_h2_constant(const Homeomorphism& phi, double p, double c_omega, double safety) {
    auto sup_over = [&](double hi, auto&& ratio) {
        double s = 0.0;
        for (double t : default_closed_grid(hi)) {
            if (t <= 0.0) continue;
            const double r = ratio(t);
            if (std::isfinite(r)) s = std::max(s, r);
        }
        return s;
    };
    auto phi_over_power = [&](double t) { return phi(t) / std::pow(t, p); };
    auto power_over_phi = [&](double t) { return std::pow(t, p) / phi(t); };
    const double m_c = sup_over(c_omega, phi_over_power);
    const double n_1 = sup_over(1.0, power_over_phi);
    const double n_c = sup_over(c_omega, power_over_phi);
    return safety * m_c * safety * n_1 * safety * n_c;
}

}  // namespace philap
