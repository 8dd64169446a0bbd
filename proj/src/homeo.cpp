#include "philap/homeo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "philap/errors.hpp"
#include "roots.hpp"

namespace philap {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string("parameter ") + what + " must be positive, got " + fmt(v));
    }
}

// x - ln(1 + x), accurate near 0.
double linear_minus_log_value(double x) {
    if (x < 1e-2) {
        double term = x;
        double sum = 0.0;
        for (int k = 2; k <= 14; ++k) {
            term *= -x;
            sum -= term / k;
        }
        return sum;
    }
    return x - std::log1p(x);
}

// e^x - x - 1, accurate near 0.
double exp_minus_linear_value(double x) {
    if (x < 1e-2) {
        double term = x;
        double sum = 0.0;
        for (int k = 2; k <= 14; ++k) {
            term *= x / k;
            sum += term;
        }
        return sum;
    }
    return std::expm1(x) - x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Factories

Homeomorphism Homeomorphism::p_laplacian(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw ConfigError("p-Laplacian requires p > 1, got " + fmt(p));
    }
    return Homeomorphism(PhiKind::PLaplacian, {p});
}

Homeomorphism Homeomorphism::sum_powers(double p1, double p2) {
    require_positive(p1, "p1");
    require_positive(p2, "p2");
    if (p1 < p2) throw ConfigError("sum of powers requires p1 >= p2");
    return Homeomorphism(PhiKind::SumPowers, {p1, p2});
}

Homeomorphism Homeomorphism::exp_power(double p) {
    require_positive(p, "p");
    return Homeomorphism(PhiKind::ExpPower, {p});
}

Homeomorphism Homeomorphism::exp_minus_linear() { return Homeomorphism(PhiKind::ExpMinusLinear, {}); }

Homeomorphism Homeomorphism::power_ratio(double p1, double p2) {
    require_positive(p1, "p1");
    require_positive(p2, "p2");
    if (p1 <= p2) throw ConfigError("power ratio requires p1 > p2");
    return Homeomorphism(PhiKind::PowerRatio, {p1, p2});
}

Homeomorphism Homeomorphism::log_weighted() { return Homeomorphism(PhiKind::LogWeighted, {}); }

Homeomorphism Homeomorphism::linear_minus_log() { return Homeomorphism(PhiKind::LinearMinusLog, {}); }

Homeomorphism Homeomorphism::log_power(double p) {
    require_positive(p, "p");
    return Homeomorphism(PhiKind::LogPower, {p});
}

Homeomorphism Homeomorphism::custom(Expression phi, std::optional<Expression> derivative,
                                    bool declared_increasing) {
    if (!declared_increasing) {
        throw ConfigError("custom phi must be declared increasing");
    }
    if (phi.variables().size() != 1) throw ConfigError("custom phi must be an expression in x");
    Homeomorphism h(PhiKind::Custom, {});
    h.custom_ = std::make_shared<CustomForms>(CustomForms{std::move(phi), std::move(derivative)});

    if (h.custom_->phi(0.0) != 0.0) throw ConfigError("custom phi must satisfy phi(0) = 0");
    // Falsification only: 5000 geometric plus 5000 uniform samples on (0, 100].
    std::vector<double> xs = geometric_grid(1e-8, 100.0, 5000);
    auto lin = linear_grid(0.0, 100.0, 5000);
    xs.insert(xs.end(), lin.begin(), lin.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    double prev = 0.0;
    for (double x : xs) {
        const double v = h.positive(x);
        if (!std::isfinite(v)) throw ConfigError("custom phi is not finite at x = " + fmt(x));
        if (v < prev || (v == prev && v > 0.0)) {
            throw ConfigError("custom phi is not increasing near x = " + fmt(x));
        }
        prev = v;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Evaluation

double Homeomorphism::operator()(double x) const {
    if (x < 0.0) return -positive(-x);
    return positive(x);
}

double Homeomorphism::positive(double x) const {
    if (x == 0.0) return 0.0;
    switch (kind_) {
        case PhiKind::PLaplacian: return std::pow(x, params_[0] - 1.0);
        case PhiKind::SumPowers: return std::pow(x, params_[0]) + std::pow(x, params_[1]);
        case PhiKind::ExpPower: return std::expm1(std::pow(x, params_[0]));
        case PhiKind::ExpMinusLinear: return exp_minus_linear_value(x);
        case PhiKind::PowerRatio: return std::pow(x, params_[0]) / (1.0 + std::pow(x, params_[1]));
        case PhiKind::LogWeighted: return x * (std::abs(std::log(x)) + 1.0);
        case PhiKind::LinearMinusLog: return linear_minus_log_value(x);
        case PhiKind::LogPower: return std::pow(std::log1p(x), params_[0]);
        case PhiKind::Custom: return custom_->phi(x);
    }
    return std::nan("");
}

bool Homeomorphism::has_derivative() const noexcept {
    return kind_ != PhiKind::Custom || custom_->derivative.has_value();
}

double Homeomorphism::derivative(double x) const { return positive_derivative(std::abs(x)); }

double Homeomorphism::positive_derivative(double x) const {
    switch (kind_) {
        case PhiKind::PLaplacian: {
            const double p = params_[0];
            return (p - 1.0) * std::pow(x, p - 2.0);
        }
        case PhiKind::SumPowers: {
            const double p1 = params_[0], p2 = params_[1];
            return p1 * std::pow(x, p1 - 1.0) + p2 * std::pow(x, p2 - 1.0);
        }
        case PhiKind::ExpPower: {
            const double p = params_[0];
            return p * std::pow(x, p - 1.0) * std::exp(std::pow(x, p));
        }
        case PhiKind::ExpMinusLinear: return std::expm1(x);
        case PhiKind::PowerRatio: {
            const double p1 = params_[0], p2 = params_[1];
            const double xp2 = std::pow(x, p2);
            const double den = 1.0 + xp2;
            return std::pow(x, p1 - 1.0) * (p1 * den - p2 * xp2) / (den * den);
        }
        case PhiKind::LogWeighted: return x < 1.0 ? -std::log(x) : std::log(x) + 2.0;
        case PhiKind::LinearMinusLog: return x / (1.0 + x);
        case PhiKind::LogPower: {
            const double p = params_[0];
            return p * std::pow(std::log1p(x), p - 1.0) / (1.0 + x);
        }
        case PhiKind::Custom:
            return custom_->derivative ? (*custom_->derivative)(x) : std::nan("");
    }
    return std::nan("");
}

double Homeomorphism::inverse(double y) const {
    if (std::isnan(y)) throw NumericalFailure("phi inverse of NaN");
    if (y < 0.0) return -positive_inverse(-y);
    return positive_inverse(y);
}

double Homeomorphism::positive_inverse(double y) const {
    if (y == 0.0) return 0.0;
    if (std::isinf(y)) throw NumericalFailure("phi inverse of infinite value");
    switch (kind_) {
        case PhiKind::PLaplacian: {
            const double p = params_[0];
            return p == 2.0 ? y : std::pow(y, 1.0 / (p - 1.0));
        }
        case PhiKind::ExpPower: return std::pow(std::log1p(y), 1.0 / params_[0]);
        case PhiKind::LogPower: return std::expm1(std::pow(y, 1.0 / params_[0]));
        case PhiKind::SumPowers:
            if (params_[0] == 2.0 && params_[1] == 1.0) {
                return 2.0 * y / (1.0 + std::sqrt(1.0 + 4.0 * y));
            }
            if (params_[0] == params_[1]) return std::pow(0.5 * y, 1.0 / params_[0]);
            break;
        case PhiKind::PowerRatio:
            if (params_[0] == 2.0 && params_[1] == 1.0) {
                return 0.5 * (y + std::sqrt(y * y + 4.0 * y));
            }
            break;
        default:
            break;
    }

    auto f = [this](double x) { return positive(x); };
    const double hi = detail::grow_upper_bracket(f, y);
    if (has_derivative()) {
        auto df = [this](double x) { return positive_derivative(x); };
        return detail::guarded_newton(f, df, y, 0.0, hi);
    }
    auto [a, b] = detail::bracketed_solve(f, y, 0.0, hi, 0.0);
    return 0.5 * (a + b);
}

std::string Homeomorphism::name() const {
    switch (kind_) {
        case PhiKind::PLaplacian: return "p_laplacian(p=" + fmt(params_[0]) + ")";
        case PhiKind::SumPowers:
            return "sum_powers(p1=" + fmt(params_[0]) + ", p2=" + fmt(params_[1]) + ")";
        case PhiKind::ExpPower: return "exp_power(p=" + fmt(params_[0]) + ")";
        case PhiKind::ExpMinusLinear: return "exp_minus_linear";
        case PhiKind::PowerRatio:
            return "power_ratio(p1=" + fmt(params_[0]) + ", p2=" + fmt(params_[1]) + ")";
        case PhiKind::LogWeighted: return "log_weighted";
        case PhiKind::LinearMinusLog: return "linear_minus_log";
        case PhiKind::LogPower: return "log_power(p=" + fmt(params_[0]) + ")";
        case PhiKind::Custom: return "custom(" + custom_->phi.to_string() + ")";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Growth witness

GrowthWitness GrowthWitness::power(double c, double p, double t1, std::string purpose) {
    require_positive(c, "c");
    require_positive(p, "p");
    require_positive(t1, "t1");
    GrowthWitness w;
    w.c_ = c;
    w.p_ = p;
    w.t1_ = t1;
    w.purpose_ = std::move(purpose);
    return w;
}

GrowthWitness GrowthWitness::custom(Expression psi, double t1, std::string purpose) {
    require_positive(t1, "t1");
    GrowthWitness w;
    w.t1_ = t1;
    w.purpose_ = std::move(purpose);
    w.custom_ = std::make_shared<const Expression>(std::move(psi));
    if (w(0.0) != 0.0) throw ConfigError("growth witness must satisfy psi(0) = 0");
    double prev = 0.0;
    for (double t : linear_grid(0.0, t1, 1000)) {
        const double v = w(t);
        if (t > 0.0 && !(v > prev)) throw ConfigError("growth witness is not increasing on [0, t1]");
        prev = v;
    }
    return w;
}

double GrowthWitness::operator()(double t) const {
    if (custom_) return (*custom_)(t);
    return t == 0.0 ? 0.0 : c_ * std::pow(t, p_);
}

double GrowthWitness::inverse(double r) const {
    if (r <= 0.0) return 0.0;
    if (!custom_) return std::pow(r / c_, 1.0 / p_);
    auto f = [this](double t) { return (*this)(t); };
    if (r > f(t1_)) throw DomainError("psi inverse outside the range of psi on [0, t1]");
    auto [a, b] = detail::bracketed_solve(f, r, 0.0, t1_, 0.0);
    return 0.5 * (a + b);
}

std::string GrowthWitness::name() const {
    if (custom_) return "custom(" + custom_->to_string() + ")";
    return "power(c=" + fmt(c_) + ", p=" + fmt(p_) + ")";
}

}  // namespace philap
