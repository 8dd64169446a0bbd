#include "philap/funcgrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "philap/errors.hpp"

namespace philap {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Interval and Grid

Interval::Interval(double a, double b) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw ConfigError("interval requires finite a < b, got (" + format_double(a) + ", " +
                          format_double(b) + ")");
    }
}

double Interval::delta(double x) const noexcept { return std::min(x - a_, b_ - x); }

GridPtr Grid::uniform(Interval interval, int n, std::span<const double> breakpoints) {
    if (n < 3) throw ConfigError("grid needs at least 3 nodes, got " + std::to_string(n));
    std::vector<double> nodes(n);
    const double a = interval.a(), b = interval.b();
    for (int i = 0; i < n; ++i) nodes[i] = a + (b - a) * (static_cast<double>(i) / (n - 1));
    nodes.front() = a;
    nodes.back() = b;

    std::vector<char> moved(n, 0);
    for (double bp : breakpoints) {
        if (!(bp > a && bp < b)) {
            throw ConfigError("breakpoint " + format_double(bp) + " is not interior to the interval");
        }
        const double pos = (bp - a) / (b - a) * (n - 1);
        auto k = static_cast<std::size_t>(std::llround(pos));
        k = std::clamp<std::size_t>(k, 1, n - 2);
        if (moved[k] && nodes[k] != bp) {
            throw ConfigError("grid too coarse to separate breakpoints near " + format_double(bp));
        }
        nodes[k] = bp;
        moved[k] = 1;
    }
    for (int i = 1; i < n; ++i) {
        if (!(nodes[i] > nodes[i - 1])) {
            throw ConfigError("grid too coarse to separate breakpoints near " + format_double(nodes[i]));
        }
    }
    return GridPtr(new Grid(interval, std::move(nodes)));
}

GridPtr Grid::from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 3) throw ConfigError("grid needs at least 3 nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1])) throw ConfigError("grid nodes must be strictly increasing");
    }
    Interval iv(nodes.front(), nodes.back());
    return GridPtr(new Grid(iv, std::move(nodes)));
}

std::optional<std::size_t> Grid::node_index(double x) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
    if (it != nodes_.end() && *it == x) return static_cast<std::size_t>(it - nodes_.begin());
    return std::nullopt;
}

std::size_t Grid::cell_of(double x) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return std::min(i, nodes_.size() - 2);
}

GridPtr Grid::slice(std::size_t first, std::size_t last) const {
    if (last >= nodes_.size() || last < first + 2) throw ConfigError("subgrid needs at least 3 nodes");
    return from_nodes(std::vector<double>(nodes_.begin() + first, nodes_.begin() + last + 1));
}

// ---------------------------------------------------------------------------
// SampledFunction

SampledFunction::SampledFunction(GridPtr grid, std::vector<double> values, Provenance provenance)
    : grid_(std::move(grid)), left_(values), right_(std::move(values)), provenance_(provenance) {
    if (left_.size() != grid_->size()) throw ConfigError("sample count does not match grid size");
}

SampledFunction::SampledFunction(GridPtr grid, std::vector<double> left, std::vector<double> right,
                                 Provenance provenance)
    : grid_(std::move(grid)), left_(std::move(left)), right_(std::move(right)), provenance_(provenance) {
    if (left_.size() != grid_->size() || right_.size() != grid_->size()) {
        throw ConfigError("sample count does not match grid size");
    }
}

SampledFunction SampledFunction::constant(GridPtr grid, double value) {
    const std::size_t n = grid->size();
    return SampledFunction(std::move(grid), std::vector<double>(n, value), Provenance::Samples);
}

std::vector<double> SampledFunction::values() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = value(i);
    return out;
}

SampledFunction SampledFunction::with_singularities(std::optional<double> left,
                                                    std::optional<double> right) const {
    for (auto s : {left, right}) {
        if (s && !(*s > -1.0 && std::isfinite(*s))) {
            throw ConfigError("endpoint singularity exponent must exceed -1");
        }
    }
    SampledFunction out = *this;
    out.left_sigma_ = left;
    out.right_sigma_ = right;
    return out;
}

bool SampledFunction::singular_node(std::size_t i) const {
    return (i == 0 && left_sigma_) || (i + 1 == size() && right_sigma_);
}

SampledFunction SampledFunction::map(const std::function<double(double)>& fn) const {
    SampledFunction out = *this;
    out.provenance_ = Provenance::Samples;
    for (std::size_t i = 0; i < size(); ++i) {
        out.left_[i] = fn(left_[i]);
        out.right_[i] = has_jump(i) ? fn(right_[i]) : out.left_[i];
    }
    return out;
}

namespace {

void require_same_grid(const SampledFunction& f, const SampledFunction& g) {
    if (f.grid_ptr() != g.grid_ptr() && !f.grid().same_nodes(g.grid())) {
        throw ConfigError("sampled functions live on different grids");
    }
}

std::optional<double> min_sigma(std::optional<double> s, std::optional<double> t) {
    if (s && t) return std::min(*s, *t);
    return s ? s : t;
}

std::optional<double> sum_sigma(std::optional<double> s, std::optional<double> t) {
    if (!s && !t) return std::nullopt;
    const double v = s.value_or(0.0) + t.value_or(0.0);
    if (!(v > -1.0)) throw ConfigError("product of weights is not integrable at an endpoint");
    if (v == 0.0) return std::nullopt;
    return v;
}

template <class Op>
SampledFunction zip(const SampledFunction& f, const SampledFunction& g, Op op,
                    std::optional<double> ls, std::optional<double> rs) {
    require_same_grid(f, g);
    const std::size_t n = f.size();
    std::vector<double> left(n), right(n);
    for (std::size_t i = 0; i < n; ++i) {
        left[i] = op(f.left(i), g.left(i));
        right[i] = (f.has_jump(i) || g.has_jump(i)) ? op(f.right(i), g.right(i)) : left[i];
    }
    return SampledFunction(f.grid_ptr(), std::move(left), std::move(right), Provenance::Samples)
        .with_singularities(ls, rs);
}

}  // namespace

SampledFunction operator+(const SampledFunction& f, const SampledFunction& g) {
    return zip(f, g, std::plus<>(), min_sigma(f.left_singularity(), g.left_singularity()),
               min_sigma(f.right_singularity(), g.right_singularity()));
}

SampledFunction operator-(const SampledFunction& f, const SampledFunction& g) {
    return zip(f, g, std::minus<>(), min_sigma(f.left_singularity(), g.left_singularity()),
               min_sigma(f.right_singularity(), g.right_singularity()));
}

SampledFunction operator*(const SampledFunction& f, const SampledFunction& g) {
    return zip(f, g, std::multiplies<>(), sum_sigma(f.left_singularity(), g.left_singularity()),
               sum_sigma(f.right_singularity(), g.right_singularity()));
}

SampledFunction operator*(double s, const SampledFunction& f) {
    return f.map([s](double v) { return s * v; });
}

// ---------------------------------------------------------------------------
// PiecewiseSpec

PiecewiseSpec PiecewiseSpec::constant(double value) {
    return single(parse_expression(format_double(value)));
}

PiecewiseSpec PiecewiseSpec::single(Expression piece) {
    PiecewiseSpec spec;
    spec.pieces.push_back(std::move(piece));
    return spec;
}

PiecewiseSpec PiecewiseSpec::indicator(const Interval& domain, double lo, double hi, double value) {
    if (!(lo < hi) || lo < domain.a() || hi > domain.b()) {
        throw ConfigError("indicator support must be a nonempty subinterval of the domain");
    }
    const Expression zero = parse_expression("0");
    const Expression one = constant(value).pieces.front();
    PiecewiseSpec spec;
    if (lo > domain.a()) {
        spec.breakpoints.push_back(lo);
        spec.pieces.push_back(zero);
    }
    spec.pieces.push_back(one);
    if (hi < domain.b()) {
        spec.breakpoints.push_back(hi);
        spec.pieces.push_back(zero);
    }
    return spec;
}

void PiecewiseSpec::validate(const Interval& domain) const {
    if (pieces.size() != breakpoints.size() + 1) {
        throw ConfigError("piecewise weight needs exactly one more piece than breakpoints");
    }
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > domain.a() && breakpoints[i] < domain.b())) {
            throw ConfigError("breakpoint " + format_double(breakpoints[i]) + " is not interior");
        }
        if (i > 0 && !(breakpoints[i] > breakpoints[i - 1])) {
            throw ConfigError("breakpoints must be strictly increasing");
        }
    }
    for (auto s : {left_singularity, right_singularity}) {
        if (s && !(*s > -1.0 && *s < 0.0)) {
            throw ConfigError("endpoint singularity exponent must lie in (-1, 0)");
        }
    }
    for (const auto& p : pieces) {
        if (p.variables().size() != 1) throw ConfigError("weight pieces must be expressions in x");
    }
}

SampledFunction sample(const PiecewiseSpec& spec, const GridPtr& grid) {
    spec.validate(grid->interval());
    const std::size_t n = grid->size();
    const auto& bp = spec.breakpoints;
    std::vector<double> left(n), right(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (*grid)[i];
        const auto lo = static_cast<std::size_t>(std::lower_bound(bp.begin(), bp.end(), x) - bp.begin());
        const auto hi = static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), x) - bp.begin());
        left[i] = spec.pieces[lo](x);
        right[i] = lo == hi ? left[i] : spec.pieces[hi](x);
        const bool singular = (i == 0 && spec.left_singularity) ||
                              (i + 1 == n && spec.right_singularity);
        if (singular) {
            left[i] = right[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        if (!std::isfinite(left[i]) || !std::isfinite(right[i])) {
            throw ConfigError("weight is not finite at x = " + format_double(x) +
                              " and no endpoint singularity is declared there");
        }
    }
    return SampledFunction(grid, std::move(left), std::move(right), Provenance::Piecewise)
        .with_singularities(spec.left_singularity, spec.right_singularity);
}

SampledFunction sample(const Expression& expr, const GridPtr& grid) {
    std::vector<double> values(grid->size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = expr((*grid)[i]);
        if (!std::isfinite(values[i])) {
            throw ConfigError("expression is not finite at x = " + format_double((*grid)[i]));
        }
    }
    return SampledFunction(grid, std::move(values), Provenance::Expression);
}

SampledFunction sample(const std::function<double(double)>& fn, const GridPtr& grid) {
    std::vector<double> values(grid->size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn((*grid)[i]);
    return SampledFunction(grid, std::move(values), Provenance::Samples);
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

/// Integral over s in [s0, s1] of s^sigma (g0 (1 - l) + g1 l), l linear from 0 to 1.
double weighted_cell(double s0, double s1, double g0, double g1, double sigma) {
    const double e1 = sigma + 1.0, e2 = sigma + 2.0;
    const double i0 = (std::pow(s1, e1) - (s0 > 0.0 ? std::pow(s0, e1) : 0.0)) / e1;
    const double j = (std::pow(s1, e2) - (s0 > 0.0 ? std::pow(s0, e2) : 0.0)) / e2;
    const double i1 = (j - s0 * i0) / (s1 - s0);
    return g0 * (i0 - i1) + g1 * i1;
}

}  // namespace

std::vector<double> cell_integrals(const SampledFunction& h) {
    const Grid& g = h.grid();
    const std::size_t n = g.size();
    const double a = g.interval().a(), b = g.interval().b();
    const auto ls = h.left_singularity();
    const auto rs = h.right_singularity();

    // Cells left of `split` use the left weight, the others the right weight.
    std::size_t split = n - 1;
    if (ls || rs) {
        split = g.cell_of(g.interval().midpoint());
        if (!ls) split = 0;
        if (!rs) split = n - 1;
    }

    std::vector<double> out(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double x0 = g[i], x1 = g[i + 1];
        double h0 = h.right(i), h1 = h.left(i + 1);
        if (ls && i < split) {
            const double s0 = x0 - a, s1 = x1 - a;
            const double w1 = std::pow(s1, *ls);
            double g0 = i == 0 ? h1 / w1 : h0 / std::pow(s0, *ls);
            out[i] = weighted_cell(s0, s1, g0, h1 / w1, *ls);
        } else if (rs && i >= split) {
            // Mirror: s = b - x runs from b - x1 (near) to b - x0 (far).
            const double s0 = b - x1, s1 = b - x0;
            const double w1 = std::pow(s1, *rs);
            double g_near = i + 2 == n ? h0 / w1 : h1 / std::pow(s0, *rs);
            out[i] = weighted_cell(s0, s1, g_near, h0 / w1, *rs);
        } else {
            out[i] = 0.5 * (x1 - x0) * (h0 + h1);
        }
        if (!std::isfinite(out[i])) {
            throw ConfigError("non-finite integrand on cell [" + format_double(x0) + ", " +
                              format_double(x1) + "]");
        }
    }
    return out;
}

SampledFunction cumulative_integral(const SampledFunction& h) {
    const auto cells = cell_integrals(h);
    std::vector<double> acc(h.size());
    acc[0] = 0.0;
    double sum = 0.0, comp = 0.0;  // Kahan summation keeps linearity at roundoff level
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double y = cells[i] - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        acc[i + 1] = sum;
    }
    return SampledFunction(h.grid_ptr(), std::move(acc), Provenance::Samples);
}

double integrate(const SampledFunction& h) {
    const SampledFunction H = cumulative_integral(h);
    return H.value(H.size() - 1);
}

SampledFunction delta_omega(const GridPtr& grid) {
    const Interval& iv = grid->interval();
    return sample([&iv](double x) { return std::max(0.0, iv.delta(x)); }, grid);
}

SampledFunction delta_power(const GridPtr& grid, double q) {
    if (!(q > -1.0)) throw ConfigError("delta power must exceed -1");
    const Interval& iv = grid->interval();
    SampledFunction out = sample(
        [&iv, q](double x) { return std::pow(std::max(0.0, iv.delta(x)), q); }, grid);
    if (q == 0.0) return out;
    return out.with_singularities(q, q);
}

double sup_norm(const SampledFunction& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.singular_node(i)) continue;
        for (double v : {u.left(i), u.right(i)}) {
            if (std::isfinite(v)) s = std::max(s, std::abs(v));
        }
    }
    return s;
}

double c1_norm(const SampledFunction& u, const SampledFunction& uprime) {
    require_same_grid(u, uprime);
    return sup_norm(u) + sup_norm(uprime);
}

void write_csv(std::ostream& out, const SampledFunction& f, const char* column) {
    out << "x," << column << '\n';
    for (std::size_t i = 0; i < f.size(); ++i) {
        const std::string x = format_double(f.grid()[i]);
        if (f.has_jump(i)) {
            out << x << ',' << format_double(f.left(i)) << '\n';
            out << x << ',' << format_double(f.right(i)) << '\n';
        } else {
            out << x << ',' << format_double(f.value(i)) << '\n';
        }
    }
}

}  // namespace philap
