#include "philap/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "philap/errors.hpp"

namespace philap {

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

Json range(const Range& r) { return Json{{"lo", num(r.lo)}, {"hi", num(r.hi)}}; }

Json report(const HypothesisReport& r) {
    Json j;
    j["hypothesis"] = to_string(r.hypothesis);
    j["verdict"] = to_string(r.verdict);
    j["t_range"] = range(r.t_range);
    j["x_range"] = range(r.x_range);
    Json w = Json::object();
    for (const auto& [k, v] : r.witness_constants) w[k] = num(v);
    j["witness_constants"] = w;
    if (r.violation_point) {
        j["violation_point"] = Json::array({num(r.violation_point->first), num(r.violation_point->second)});
    } else {
        j["violation_point"] = nullptr;
    }
    j["failed_condition"] = r.failed_condition;
    return j;
}

Json double_map(const std::map<std::string, double>& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[k] = num(v);
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

double value_at(const SampledFunction& f, double x) {
    const Grid& g = f.grid();
    const std::size_t k = g.cell_of(x);
    const double t = (x - g[k]) / g.spacing(k);
    return f[k] + t * (f[k + 1] - f[k]);
}

BoundsSummary summarize_bounds(const BvpSolution& solution, const BoundEnvelope& envelope, double tolerance) {
    BoundsSummary s;
    s.tolerance = tolerance;
    s.theta_bar = envelope.support.theta_bar;
    s.lower_at_theta = value_at(envelope.lower, s.theta_bar);
    s.u_at_theta = value_at(solution.u, s.theta_bar);
    s.upper_at_theta = value_at(envelope.upper, s.theta_bar);
    s.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < solution.u.size(); ++i) {
        const double u = solution.u[i];
        const double excess = std::max(envelope.lower[i] - u, u - envelope.upper[i]);
        s.worst_excess = std::max(s.worst_excess, excess);
        if (excess > tolerance) ++s.violations;
    }
    s.pass = s.violations == 0;
    return s;
}

std::string reports_json(const std::vector<HypothesisReport>& reports) {
    Json arr = Json::array();
    bool ok = true;
    for (const auto& r : reports) {
        arr.push_back(report(r));
        ok = ok && !r.violated();
    }
    return dump(Json{{"all_corroborated", ok}, {"reports", arr}});
}

std::string certificate_json(const ExistenceCertificate& cert, const ProblemSpec& spec) {
    Json j;
    j["case"] = to_string(spec.problem_case);
    j["phi"] = spec.phi.name();
    j["f"] = spec.f_text;
    j["lambda"] = num(spec.lambda);
    j["grid_n"] = cert.solution.u.size();
    j["epsilon"] = num(cert.pair.epsilon);
    j["gamma"] = cert.pair.gamma ? num(*cert.pair.gamma) : Json(nullptr);
    j["margins"] = double_map(cert.pair.margins);
    j["constants"] = double_map(cert.pair.constants);
    Json kinks = Json::array();
    for (const auto& k : cert.pair.kink_set) {
        kinks.push_back(Json{{"x", num(k.x)}, {"left_slope", num(k.left_slope)}, {"right_slope", num(k.right_slope)}});
    }
    j["kinks"] = kinks;
    j["iterations"] = cert.iterations;
    j["final_residual"] = num(cert.final_residual);
    j["last_step"] = num(cert.last_step);
    j["in_positive_cone"] = cert.in_positive_cone;
    j["slopes"] = Json{{"a", num(cert.slope_a)}, {"b", num(cert.slope_b)}};
    j["clamp_active"] = cert.clamp_active;
    j["sup_u"] = num(sup_norm(cert.solution.u));
    j["warnings"] = cert.warnings;
    return dump(j);
}

std::string bounds_json(const BoundsSummary& s, const BoundEnvelope& envelope, const BvpSolution& solution) {
    Json j;
    j["pass"] = s.pass;
    j["violations"] = s.violations;
    j["tolerance"] = num(s.tolerance);
    j["worst_excess"] = num(s.worst_excess);
    j["theta_bar"] = num(s.theta_bar);
    j["lower_at_theta_bar"] = num(s.lower_at_theta);
    j["u_at_theta_bar"] = num(s.u_at_theta);
    j["upper_at_theta_bar"] = num(s.upper_at_theta);
    j["m_omega"] = num(envelope.m_omega_constant);
    j["support"] = Json{{"alpha", num(envelope.support.alpha)},
                        {"beta", num(envelope.support.beta)},
                        {"theta_under", num(envelope.support.theta_under)},
                        {"theta_bar", num(envelope.support.theta_bar)}};
    j["c_h"] = num(solution.c_h);
    j["residual_sup"] = num(solution.residual_sup);
    return dump(j);
}

void write_columns_csv(std::ostream& out,
                       const std::vector<std::pair<std::string, const SampledFunction*>>& columns) {
    if (columns.empty()) return;
    const Grid& g = columns.front().second->grid();
    out << "x";
    for (const auto& [name, f] : columns) {
        if (!f->grid().same_nodes(g)) throw ConfigError("CSV columns live on different grids");
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t i = 0; i < g.size(); ++i) {
        out << format_double(g[i]);
        for (const auto& col : columns) out << ',' << format_double((*col.second)[i]);
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "lambda,sup_u,sup_uprime,c1,bound,bound_holds,below_previous,final_residual,iterations\n";
    for (const auto& r : rows) {
        out << format_double(r.lambda) << ',' << format_double(r.sup_u) << ',' << format_double(r.sup_uprime) << ','
            << format_double(r.c1) << ',' << format_double(r.bound) << ',' << (r.bound_holds ? 1 : 0) << ','
            << (r.below_previous ? 1 : 0) << ',' << format_double(r.final_residual) << ',' << r.iterations << '\n';
    }
}

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw ConfigError("cannot write " + path.string());
}

}  // namespace philap
