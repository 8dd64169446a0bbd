#include "philap/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "philap/config.hpp"
#include "philap/errors.hpp"
#include "philap/existence.hpp"
#include "philap/io.hpp"

namespace philap {

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> out;
    std::optional<int> grid_n;
};

RunConfig resolve(const Flags& flags) {
    RunConfig cfg = load_config(flags.config);
    if (flags.out) cfg.output.dir = *flags.out;
    if (flags.grid_n) {
        if (*flags.grid_n < 3) throw ConfigError("--grid-n must be at least 3");
        cfg.problem.grid_n = *flags.grid_n;
    }
    return cfg;
}

/// Console form of a number; files keep the round-trip form.
std::string brief(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_of(const std::vector<std::pair<std::string, const SampledFunction*>>& cols) {
    std::ostringstream ss;
    write_columns_csv(ss, cols);
    return ss.str();
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const ExistenceCertificate cert = cfg.omega0 ? solve_sign_changing(cfg.problem, *cfg.omega0, cfg.iteration)
                                                 : solve_problem(cfg.problem, cfg.iteration);
    const std::filesystem::path dir = cfg.output.dir;
    if (cfg.output.json) write_file(dir, "certificate.json", certificate_json(cert, cfg.problem));
    if (cfg.output.csv) {
        write_file(dir, "sub.csv", csv_of({{"sub", &cert.pair.sub.u}}));
        write_file(dir, "super.csv", csv_of({{"super", &cert.pair.super.u}}));
        write_file(dir, "solution.csv", csv_of({{"u", &cert.solution.u}, {"uprime", &cert.solution.uprime}}));
    }
    out << "solution: sup u = " << brief(sup_norm(cert.solution.u))
        << ", iterations = " << cert.iterations << ", residual = " << brief(cert.final_residual)
        << ", positive cone = " << (cert.in_positive_cone ? "yes" : "no") << '\n';
    for (const auto& w : cert.warnings) out << "warning: " << w << '\n';
    return kExitOk;
}

int cmd_hypotheses(const RunConfig& cfg, std::ostream& out) {
    const auto reports = verify_hypotheses(cfg.problem);
    if (cfg.output.json) write_file(cfg.output.dir, "hypotheses.json", reports_json(reports));
    bool ok = true;
    for (const auto& r : reports) {
        out << to_string(r.hypothesis) << ": " << to_string(r.verdict);
        if (!r.failed_condition.empty()) out << " (" << r.failed_condition << ")";
        out << '\n';
        ok = ok && !r.violated();
    }
    return ok ? kExitOk : kExitHypothesis;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
    const ProblemSpec& s = cfg.problem;
    const GridPtr grid = Grid::uniform(s.interval, s.grid_n, s.m.breakpoints);
    const SampledFunction h = sample(s.m, grid);
    const BvpSolution sol = solve_s_phi(s.phi, h);
    const BoundEnvelope env = bound_envelope(s.phi, h);
    const BoundsSummary sum = summarize_bounds(sol, env);
    if (cfg.output.json) write_file(cfg.output.dir, "bounds.json", bounds_json(sum, env, sol));
    if (cfg.output.csv) {
        write_file(cfg.output.dir, "bounds.csv", csv_of({{"lower", &env.lower}, {"u", &sol.u}, {"upper", &env.upper}}));
    }
    out << "bounds: lower(" << brief(sum.theta_bar) << ") = " << brief(sum.lower_at_theta)
        << " <= u = " << brief(sum.u_at_theta) << " <= upper = " << brief(sum.upper_at_theta)
        << "; violations = " << sum.violations << "; " << (sum.pass ? "PASS" : "FAIL") << '\n';
    return sum.pass ? kExitOk : kExitNumerical;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    if (cfg.sweep_lambdas.empty()) throw ConfigError("sweep needs solver.sweep = l0, l1, ...");
    const auto rows = lambda_sweep(cfg.problem, cfg.sweep_lambdas, cfg.iteration);
    if (cfg.output.csv) {
        std::ostringstream ss;
        write_sweep_csv(ss, rows);
        write_file(cfg.output.dir, "sweep.csv", ss.str());
    }
    for (const auto& r : rows) {
        out << "lambda = " << brief(r.lambda) << ": sup u = " << brief(r.sup_u)
            << ", C1 = " << brief(r.c1) << ", bound " << (r.bound_holds ? "holds" : "FAILS") << '\n';
    }
    return kExitOk;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const HypothesisViolation*>(&e) || dynamic_cast<const PreconditionError*>(&e)) {
        return kExitHypothesis;
    }
    return kExitNumerical;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Positive solutions of one-dimensional phi-Laplacian boundary value problems"};
    app.require_subcommand(1);
    Flags flags;
    auto add = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "INI config file")->required();
        sub->add_option("--out", flags.out, "output directory (overrides output.dir)");
        sub->add_option("--grid-n", flags.grid_n, "number of grid nodes");
        return sub;
    };
    CLI::App* solve = add("solve", "construct sub/supersolutions and iterate to a solution");
    CLI::App* hyp = add("hypotheses", "check the structural hypotheses on phi and f");
    CLI::App* bounds = add("bounds", "verify the two-sided envelope of S(h) with h = weight_m");
    CLI::App* sweep = add("sweep", "solve along a decreasing lambda sequence");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const RunConfig cfg = resolve(flags);
        if (solve->parsed()) return cmd_solve(cfg, out);
        if (hyp->parsed()) return cmd_hypotheses(cfg, out);
        if (bounds->parsed()) return cmd_bounds(cfg, out);
        if (sweep->parsed()) return cmd_sweep(cfg, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kExitConfig;
}

}  // namespace philap
