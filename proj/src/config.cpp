#include "philap/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "philap/errors.hpp"

namespace philap {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"problem", {"a", "b", "lambda", "case", "omega0"}},
        {"phi", {"kind", "p", "p1", "p2", "expr", "derivative", "increasing"}},
        {"f", {"expr", "k1", "k2", "q", "q1", "q2", "t_bar"}},
        {"weight_m", {"pieces", "breakpoints", "left_singularity", "right_singularity"}},
        {"weight_r", {"pieces", "breakpoints", "left_singularity", "right_singularity"}},
        {"witnesses", {"psi", "psi_c", "psi_p", "t1", "t2", "M", "p", "K", "N"}},
        {"solver", {"grid_n", "max_iterations", "step_tolerance", "defect_tolerance", "sweep"}},
        {"output", {"dir", "formats"}},
        {"params", {}},  // free-form named constants
    };
    return keys;
}

/// Typed access to one config with "section.key" error messages.
class Reader {
public:
    Reader(const IniDocument& doc, ParamMap params) : doc_(doc), params_(std::move(params)) {}

    std::optional<std::string> text(const std::string& sec, const std::string& key) const {
        return doc_.get(sec, key);
    }
    std::optional<double> number(const std::string& sec, const std::string& key) const {
        auto t = text(sec, key);
        if (!t) return std::nullopt;
        return parse_number(*t, sec + "." + key);
    }
    double number_or(const std::string& sec, const std::string& key, double fallback) const {
        return number(sec, key).value_or(fallback);
    }
    double positive_or(const std::string& sec, const std::string& key, double fallback) const {
        const double v = number_or(sec, key, fallback);
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(sec + "." + key + " must be a positive number, got " + format_double(v));
        }
        return v;
    }
    double required(const std::string& sec, const std::string& key) const {
        auto v = number(sec, key);
        if (!v) throw ConfigError("missing " + sec + "." + key);
        return *v;
    }
    Expression expression(const std::string& src, const std::vector<std::string>& vars,
                          const std::string& where) const {
        try {
            return parse_expression(src, vars, params_);
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what(), e.offset());
        }
    }
    /// Expression in t, falling back to x when t does not occur.
    Expression expression_in_t(const std::string& src, const std::string& where) const {
        try {
            return parse_expression(src, {"t"}, params_);
        } catch (const ParseError&) {
            return expression(src, {"x"}, where);
        }
    }

private:
    const IniDocument& doc_;
    ParamMap params_;
};

Homeomorphism read_phi(const Reader& rd, std::string& text) {
    const std::string kind = rd.text("phi", "kind").value_or("p_laplacian");
    auto p = [&](const char* key) { return rd.positive_or("phi", key, 2.0); };
    Homeomorphism phi = Homeomorphism::p_laplacian(2.0);
    if (kind == "p_laplacian") {
        phi = Homeomorphism::p_laplacian(p("p"));
    } else if (kind == "sum_powers") {
        phi = Homeomorphism::sum_powers(p("p1"), p("p2"));
    } else if (kind == "exp_power") {
        phi = Homeomorphism::exp_power(p("p"));
    } else if (kind == "exp_minus_linear") {
        phi = Homeomorphism::exp_minus_linear();
    } else if (kind == "power_ratio") {
        phi = Homeomorphism::power_ratio(p("p1"), p("p2"));
    } else if (kind == "log_weighted") {
        phi = Homeomorphism::log_weighted();
    } else if (kind == "linear_minus_log") {
        phi = Homeomorphism::linear_minus_log();
    } else if (kind == "log_power") {
        phi = Homeomorphism::log_power(p("p"));
    } else if (kind == "custom") {
        const auto expr = rd.text("phi", "expr");
        if (!expr) throw ConfigError("phi.kind = custom needs phi.expr");
        std::optional<Expression> deriv;
        if (auto d = rd.text("phi", "derivative")) deriv = rd.expression(*d, {"x"}, "phi.derivative");
        const std::string inc = rd.text("phi", "increasing").value_or("");
        if (inc != "true") throw ConfigError("phi.kind = custom needs phi.increasing = true");
        phi = Homeomorphism::custom(rd.expression(*expr, {"x"}, "phi.expr"), deriv, true);
    } else {
        throw ConfigError("unknown phi.kind '" + kind + "'");
    }
    text = phi.name();
    return phi;
}

std::optional<PiecewiseSpec> read_weight(const Reader& rd, const IniDocument& doc, const std::string& sec) {
    if (!doc.has_section(sec)) return std::nullopt;
    PiecewiseSpec w;
    const auto pieces = rd.text(sec, "pieces");
    if (!pieces) throw ConfigError("missing " + sec + ".pieces");
    const auto parts = split(*pieces, ';');
    for (std::size_t i = 0; i < parts.size(); ++i) {
        w.pieces.push_back(rd.expression(parts[i], {"x"}, sec + ".pieces[" + std::to_string(i) + "]"));
    }
    if (auto bps = rd.text(sec, "breakpoints"); bps && !trim(*bps).empty()) {
        w.breakpoints = parse_number_list(*bps, sec + ".breakpoints");
    }
    w.left_singularity = rd.number(sec, "left_singularity");
    w.right_singularity = rd.number(sec, "right_singularity");
    return w;
}

}  // namespace

IniDocument IniDocument::parse(std::string_view text) {
    IniDocument doc;
    std::string current;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            current = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!known_keys().count(current)) throw ConfigError(where + ": unknown section [" + current + "]");
            doc.sections_[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        if (current.empty()) throw ConfigError(where + ": key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const auto& allowed = known_keys().at(current);
        if (current != "params" && !allowed.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "' in [" + current + "]");
        }
        if (!doc.sections_[current].emplace(key, value).second) {
            throw ConfigError(where + ": duplicate key '" + key + "' in [" + current + "]");
        }
    }
    return doc;
}

std::optional<std::string> IniDocument::get(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

const std::map<std::string, std::string>& IniDocument::section(const std::string& name) const {
    static const std::map<std::string, std::string> empty;
    auto s = sections_.find(name);
    return s == sections_.end() ? empty : s->second;
}

double parse_number(std::string_view text, std::string_view what) {
    const std::string s = trim(text);
    if (s.empty()) throw ConfigError(std::string(what) + ": empty number");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) {
        throw ConfigError(std::string(what) + ": not a number: '" + s + "'");
    }
    return v;
}

std::vector<double> parse_number_list(std::string_view text, std::string_view what) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_number(part, what));
    return out;
}

RunConfig parse_config(std::string_view text) {
    const IniDocument doc = IniDocument::parse(text);
    ParamMap params;
    for (const auto& [k, v] : doc.section("params")) params[k] = parse_number(v, "params." + k);
    const Reader rd(doc, params);

    RunConfig cfg;
    ProblemSpec& s = cfg.problem;

    const double a = rd.number_or("problem", "a", 0.0);
    const double b = rd.number_or("problem", "b", 1.0);
    if (!(a < b)) throw ConfigError("problem.a must be smaller than problem.b");
    s.interval = Interval(a, b);
    s.lambda = rd.positive_or("problem", "lambda", 1.0);
    const std::string c = rd.text("problem", "case").value_or("I");
    if (c == "I" || c == "1") {
        s.problem_case = ProblemCase::CaseI;
    } else if (c == "II" || c == "2") {
        s.problem_case = ProblemCase::CaseII;
    } else {
        throw ConfigError("problem.case must be I or II, got '" + c + "'");
    }
    if (auto o = rd.text("problem", "omega0")) {
        const auto ends = parse_number_list(*o, "problem.omega0");
        if (ends.size() != 2 || !(ends[0] < ends[1])) throw ConfigError("problem.omega0 must be 'lo, hi' with lo < hi");
        cfg.omega0 = Interval(ends[0], ends[1]);
    }

    s.phi = read_phi(rd, cfg.phi_text);

    const auto fexpr = rd.text("f", "expr");
    if (!fexpr) throw ConfigError("missing f.expr");
    const Expression f = rd.expression_in_t(*fexpr, "f.expr");
    s.f = [f](double t) { return f(t); };
    s.f_text = f.to_string();
    s.k1 = rd.positive_or("f", "k1", 1.0);
    s.k2 = rd.positive_or("f", "k2", 1.0);
    s.q = rd.positive_or("f", "q", 0.5);
    s.q1 = rd.positive_or("f", "q1", 0.5);
    s.q2 = rd.positive_or("f", "q2", 0.5);
    s.t_bar = rd.positive_or("f", "t_bar", 1.0);

    if (auto m = read_weight(rd, doc, "weight_m")) s.m = std::move(*m);
    s.r = read_weight(rd, doc, "weight_r");
    s.m.validate(s.interval);
    if (s.r) s.r->validate(s.interval);

    const double t1 = rd.positive_or("witnesses", "t1", 1.0);
    if (auto psi = rd.text("witnesses", "psi")) {
        if (*psi == "power") {
            s.psi = GrowthWitness::power(rd.positive_or("witnesses", "psi_c", 1.0),
                                         rd.positive_or("witnesses", "psi_p", 1.0), t1);
        } else {
            s.psi = GrowthWitness::custom(rd.expression_in_t(*psi, "witnesses.psi"), t1);
        }
    }
    if (s.problem_case == ProblemCase::CaseI && !s.psi) throw ConfigError("case I needs witnesses.psi");
    s.p = rd.positive_or("witnesses", "p", 1.0);
    if (auto k = rd.number("witnesses", "K")) s.K = rd.positive_or("witnesses", "K", *k);
    if (auto n = rd.number("witnesses", "N")) s.N = rd.positive_or("witnesses", "N", *n);
    s.t2 = rd.positive_or("witnesses", "t2", 1.0);
    s.M = rd.positive_or("witnesses", "M", 1.0);

    const double grid_n = rd.number_or("solver", "grid_n", Grid::kDefaultNodes);
    if (grid_n < 3 || grid_n != std::floor(grid_n) || grid_n > 1e7) {
        throw ConfigError("solver.grid_n must be an integer >= 3");
    }
    s.grid_n = static_cast<int>(grid_n);
    const double iters = rd.number_or("solver", "max_iterations", cfg.iteration.max_iterations);
    if (iters < 1 || iters != std::floor(iters)) throw ConfigError("solver.max_iterations must be a positive integer");
    cfg.iteration.max_iterations = static_cast<int>(iters);
    cfg.iteration.step_tolerance = rd.positive_or("solver", "step_tolerance", cfg.iteration.step_tolerance);
    cfg.iteration.defect_tolerance = rd.positive_or("solver", "defect_tolerance", cfg.iteration.defect_tolerance);
    if (auto sw = rd.text("solver", "sweep")) cfg.sweep_lambdas = parse_number_list(*sw, "solver.sweep");

    cfg.output.dir = rd.text("output", "dir").value_or(".");
    if (auto formats = rd.text("output", "formats")) {
        cfg.output.csv = cfg.output.json = false;
        for (const auto& f : split(*formats, ',')) {
            if (f == "csv") {
                cfg.output.csv = true;
            } else if (f == "json") {
                cfg.output.json = true;
            } else {
                throw ConfigError("output.formats: unknown format '" + f + "'");
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace philap
