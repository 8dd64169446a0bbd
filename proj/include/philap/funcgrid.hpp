#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "philap/expression.hpp"

namespace philap {

/// Bounded open interval (a, b).
class Interval {
public:
    Interval(double a, double b);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double length() const noexcept { return b_ - a_; }
    /// Half-length; the maximum of the distance to the boundary.
    double c_omega() const noexcept { return 0.5 * (b_ - a_); }
    double midpoint() const noexcept { return 0.5 * (a_ + b_); }
    /// Distance to the boundary, min(x - a, b - x).
    double delta(double x) const noexcept;
    bool contains_closed(double x) const noexcept { return x >= a_ && x <= b_; }

    bool operator==(const Interval&) const = default;

private:
    double a_;
    double b_;
};

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Strictly increasing node set with exact endpoints and at least 3 nodes.
class Grid {
public:
    static constexpr int kDefaultNodes = 2049;

    /// Uniform grid; each breakpoint then replaces its nearest interior node.
    static GridPtr uniform(Interval interval, int n = kDefaultNodes,
                           std::span<const double> breakpoints = {});
    static GridPtr from_nodes(std::vector<double> nodes);

    const Interval& interval() const noexcept { return interval_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    double spacing(std::size_t cell) const { return nodes_[cell + 1] - nodes_[cell]; }

    /// Index of the node equal to x, if any.
    std::optional<std::size_t> node_index(double x) const;
    /// Index i of the cell [x_i, x_{i+1}] containing x (last cell for x = b).
    std::size_t cell_of(double x) const;

    /// Subgrid made of nodes first..last inclusive.
    GridPtr slice(std::size_t first, std::size_t last) const;

    bool same_nodes(const Grid& other) const { return nodes_ == other.nodes_; }

private:
    Grid(Interval interval, std::vector<double> nodes)
        : interval_(interval), nodes_(std::move(nodes)) {}

    Interval interval_;
    std::vector<double> nodes_;
};

enum class Provenance { Expression, Piecewise, Samples };

/// Node samples of a function in L1(a, b).
///
/// Each node stores a left and a right limit so that jumps located at nodes
/// integrate exactly. An endpoint may carry a power exponent sigma > -1
/// (a singularity when sigma < 0): near that endpoint the function is
/// integrated as dist^sigma times a piecewise-linear factor, and the endpoint
/// sample itself is never used.
class SampledFunction {
public:
    /// Empty placeholder without a grid; only assignment and size() are meaningful.
    SampledFunction() = default;
    SampledFunction(GridPtr grid, std::vector<double> values,
                    Provenance provenance = Provenance::Samples);
    SampledFunction(GridPtr grid, std::vector<double> left, std::vector<double> right,
                    Provenance provenance);

    static SampledFunction constant(GridPtr grid, double value);
    static SampledFunction zero(GridPtr grid) { return constant(std::move(grid), 0.0); }

    const Grid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::size_t size() const noexcept { return left_.size(); }
    Provenance provenance() const noexcept { return provenance_; }

    /// Mean of the one-sided limits at node i.
    double value(std::size_t i) const { return 0.5 * (left_[i] + right_[i]); }
    double operator[](std::size_t i) const { return value(i); }
    double left(std::size_t i) const { return left_[i]; }
    double right(std::size_t i) const { return right_[i]; }
    bool has_jump(std::size_t i) const { return left_[i] != right_[i]; }
    std::vector<double> values() const;
    const std::vector<double>& left_values() const noexcept { return left_; }
    const std::vector<double>& right_values() const noexcept { return right_; }

    std::optional<double> left_singularity() const noexcept { return left_sigma_; }
    std::optional<double> right_singularity() const noexcept { return right_sigma_; }
    SampledFunction with_singularities(std::optional<double> left,
                                       std::optional<double> right) const;
    /// True when node i is an endpoint carrying a singularity.
    bool singular_node(std::size_t i) const;

    /// Applies fn to both limits at every node; singularities are kept.
    SampledFunction map(const std::function<double(double)>& fn) const;

private:
    GridPtr grid_;
    std::vector<double> left_;
    std::vector<double> right_;
    Provenance provenance_ = Provenance::Samples;
    std::optional<double> left_sigma_;
    std::optional<double> right_sigma_;
};

SampledFunction operator+(const SampledFunction& f, const SampledFunction& g);
SampledFunction operator-(const SampledFunction& f, const SampledFunction& g);
/// Pointwise product; singularity exponents add.
SampledFunction operator*(const SampledFunction& f, const SampledFunction& g);
SampledFunction operator*(double s, const SampledFunction& f);

/// Piecewise closed-form description of a weight on (a, b).
struct PiecewiseSpec {
    std::vector<double> breakpoints;   // strictly increasing, interior
    std::vector<Expression> pieces;    // breakpoints.size() + 1 expressions in x
    std::optional<double> left_singularity;
    std::optional<double> right_singularity;

    static PiecewiseSpec constant(double value);
    /// value on (lo, hi), zero elsewhere; lo or hi may coincide with an endpoint.
    static PiecewiseSpec indicator(const Interval& domain, double lo, double hi, double value = 1.0);
    static PiecewiseSpec single(Expression piece);

    /// Throws ConfigError when the description is inconsistent with `domain`.
    void validate(const Interval& domain) const;
};

SampledFunction sample(const PiecewiseSpec& spec, const GridPtr& grid);
SampledFunction sample(const Expression& expr, const GridPtr& grid);
SampledFunction sample(const std::function<double(double)>& fn, const GridPtr& grid);

/// Integral of h over each cell, in order.
std::vector<double> cell_integrals(const SampledFunction& h);
/// H(x_i) = integral of h over (a, x_i); H(a) = 0.
SampledFunction cumulative_integral(const SampledFunction& h);
double integrate(const SampledFunction& h);

SampledFunction delta_omega(const GridPtr& grid);
/// delta^q, tagged with exponent q at both endpoints so that products with
/// smooth weights integrate exactly near the boundary.
SampledFunction delta_power(const GridPtr& grid, double q);

/// Largest finite |value| over all one-sided limits (singular endpoints skipped).
double sup_norm(const SampledFunction& u);
double c1_norm(const SampledFunction& u, const SampledFunction& uprime);

/// CSV with header `x,<column>`; nodes with a jump produce two rows.
void write_csv(std::ostream& out, const SampledFunction& f, const char* column = "value");

/// printf("%.17g") formatting used by every writer.
std::string format_double(double v);

}  // namespace philap
