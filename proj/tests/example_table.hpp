#pragma once

// Catalog example table shared by the hypothesis tests and the acceptance runner.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "philap/homeo.hpp"

namespace philap::examples {

struct ExampleRow {
    std::string label;
    std::string check;
    Verdict expected;
    std::function<HypothesisReport()> run;
};

inline std::vector<ExampleRow> example_table() {
    std::vector<ExampleRow> rows;
    const auto pass = Verdict::CorroboratedOnRange;
    const auto fail = Verdict::ViolatedAt;

    // (a1) x^2 + x: psi(t) = t^{p2}, H2 with M = 1.
    const auto a1 = Homeomorphism::sum_powers(2.0, 1.0);
    rows.push_back({"a1", "H1", pass, [=] { return check_h1(a1, GrowthWitness::power(1.0, 1.0, 1.0)); }});
    rows.push_back({"a1", "H2", pass, [=] { return check_h2(a1, 1.0, 1.0, 0.5); }});

    // (a2) e^x - 1: psi(t) = t; H2 through the constructed constant; (hbi) fails once |Omega| > 2.
    const auto a2 = Homeomorphism::exp_power(1.0);
    rows.push_back({"a2", "H1", pass, [=] { return check_h1(a2, GrowthWitness::power(1.0, 1.0, 1.0)); }});
    rows.push_back({"a2", "H2", pass, [=] { return check_h2(a2, 1.0, constructed_h2_constant(a2, 1.0, 0.5), 0.5); }});
    rows.push_back({"a2", "H1' |Omega|=4", fail, [=] { return check_h1_prime(a2, 1.0, 2.0); }});
    rows.push_back({"a2", "H1' |Omega|=2", pass, [=] { return check_h1_prime(a2, 1.0, 1.0); }});

    // (a4) x^2 / (1 + x): H2 with t2 = 1 and M = 2 (1 + c_Omega^{p2}).
    const auto a4 = Homeomorphism::power_ratio(2.0, 1.0);
    for (double c : {0.5, 1.0, 2.0}) {
        rows.push_back({"a4", "H2 c=" + std::to_string(c).substr(0, 3), pass,
                        [=] { return check_h2(a4, 1.0, 2.0 * (1.0 + c), c); }});
    }
    rows.push_back({"a4", "H1", pass, [=] { return check_h1(a4, GrowthWitness::power(1.0, 1.0, 1.0)); }});

    // (b) x (|ln x| + 1): H1 with psi(t) = t^{1/2} on [0, 0.05]; H2 with M = 1.
    const auto b = Homeomorphism::log_weighted();
    rows.push_back({"b", "H1", pass, [=] { return check_h1(b, GrowthWitness::power(1.0, 0.5, 0.05)); }});
    rows.push_back({"b", "H2", pass, [=] { return check_h2(b, 1.0, 1.0, 1.0); }});

    // (c) x - ln(x + 1): H1' with p = 1; derivative criterion for H2.
    const auto c = Homeomorphism::linear_minus_log();
    rows.push_back({"c", "H1'", pass, [=] { return check_h1_prime(c, 1.0, 1.0); }});
    rows.push_back({"c", "H2 derivative", pass, [=] { return check_h2_derivative(c, 1.0); }});

    // (d) ln(x + 1): no power witness works for H1; H1' and H2 hold.
    const auto d = Homeomorphism::log_power(1.0);
    for (double q : {0.1, 0.25, 0.5, 1.0, 2.0}) {
        rows.push_back({"d", "H1 psi=t^" + std::to_string(q).substr(0, 4), fail,
                        [=] { return check_h1(d, GrowthWitness::power(1.0, q, 1.0)); }});
    }
    rows.push_back({"d", "H1'", pass, [=] { return check_h1_prime(d, 1.0, 1.0); }});
    rows.push_back({"d", "H2", pass, [=] { return check_h2(d, 1.0, constructed_h2_constant(d, 1.0, 1.0), 1.0); }});
    return rows;
}

/// Bound on the derivative-criterion constant for (c): (c_Omega + 1) / (1 - ln 2).
inline double example_c_bound(double c_omega) { return (c_omega + 1.0) / (1.0 - std::log(2.0)); }

}  // namespace philap::examples
