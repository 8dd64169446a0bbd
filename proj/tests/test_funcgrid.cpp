#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "philap/errors.hpp"
#include "philap/funcgrid.hpp"

using namespace philap;

namespace {

const Interval kUnit(0.0, 1.0);

SampledFunction indicator(const GridPtr& g, double lo, double hi) {
    return sample(PiecewiseSpec::indicator(g->interval(), lo, hi), g);
}

}  // namespace

TEST(Interval, DeltaAndHalfLength) {
    EXPECT_DOUBLE_EQ(kUnit.delta(0.5), 0.5);
    EXPECT_DOUBLE_EQ(kUnit.delta(0.2), 0.2);
    EXPECT_DOUBLE_EQ(Interval(-1.0, 3.0).delta(2.0), 1.0);
    EXPECT_DOUBLE_EQ(Interval(-1.0, 3.0).c_omega(), 2.0);
    EXPECT_THROW(Interval(1.0, 1.0), ConfigError);
}

TEST(Grid, UniformHasExactEndpointsAndSnapsBreakpoints) {
    const std::vector<double> bp = {0.4003, 0.6};
    const auto g = Grid::uniform(kUnit, 11, bp);
    EXPECT_EQ(g->size(), 11u);
    EXPECT_EQ((*g)[0], 0.0);
    EXPECT_EQ((*g)[10], 1.0);
    EXPECT_TRUE(g->node_index(0.4003).has_value());
    EXPECT_TRUE(g->node_index(0.6).has_value());
    for (std::size_t i = 0; i + 1 < g->size(); ++i) EXPECT_LT((*g)[i], (*g)[i + 1]);
    EXPECT_THROW(Grid::uniform(kUnit, 2), ConfigError);
    EXPECT_THROW(Grid::from_nodes({0.0, 0.5, 0.5, 1.0}), ConfigError);
}

TEST(Grid, CellOfAndSlice) {
    const auto g = Grid::uniform(kUnit, 5);
    EXPECT_EQ(g->cell_of(0.0), 0u);
    EXPECT_EQ(g->cell_of(0.3), 1u);
    EXPECT_EQ(g->cell_of(1.0), 3u);
    const auto s = g->slice(1, 3);
    EXPECT_EQ(s->size(), 3u);
    EXPECT_DOUBLE_EQ(s->interval().a(), 0.25);
    EXPECT_DOUBLE_EQ(s->interval().b(), 0.75);
}

TEST(CumulativeIntegral, ConstantIsExactAtNodes) {
    const auto g = Grid::uniform(kUnit, 1001);
    const auto H = cumulative_integral(SampledFunction::constant(g, 1.0));
    for (std::size_t i = 0; i < g->size(); ++i) EXPECT_NEAR(H[i], (*g)[i], 1e-14);
}

TEST(CumulativeIntegral, Indicator) {
    const auto g = Grid::uniform(kUnit, 1001);
    const auto H = cumulative_integral(indicator(g, 0.4, 0.6));
    EXPECT_NEAR(H[*g->node_index(0.5)], 0.1, 1e-6);
    EXPECT_NEAR(H[g->size() - 1], 0.2, 1e-6);
}

TEST(CumulativeIntegral, SingularLeftEndpoint) {
    PiecewiseSpec spec = PiecewiseSpec::single(parse_expression("x^(-0.5)"));
    spec.left_singularity = -0.5;
    const auto g = Grid::uniform(kUnit, 2049);
    const auto h = sample(spec, g);
    EXPECT_NEAR(cumulative_integral(h)[g->size() - 1], 2.0, 1e-6);
    EXPECT_NEAR(integrate(h), 2.0, 1e-6);
}

TEST(CumulativeIntegral, NonFiniteUndeclaredSampleIsRejected) {
    const auto g = Grid::uniform(kUnit, 11);
    EXPECT_THROW(sample(PiecewiseSpec::single(parse_expression("x^(-0.5)")), g), ConfigError);
}

TEST(Integrate, Examples) {
    EXPECT_NEAR(integrate(SampledFunction::constant(Grid::uniform(Interval(0.0, 3.0), 101), 2.0)), 6.0, 1e-13);
    const auto g = Grid::uniform(kUnit, 2049, std::vector<double>{0.4, 0.6});
    const auto h = SampledFunction::constant(g, 1.0) * delta_power(g, 0.5);
    EXPECT_NEAR(integrate(h), 2.0 * (2.0 / 3.0) * std::pow(0.5, 1.5), 1e-6);
    EXPECT_NEAR(integrate(indicator(g, 0.4, 0.6)), 0.2, 1e-12);
}

TEST(DeltaOmega, SamplesAndMaximum) {
    const auto g = Grid::uniform(Interval(-1.0, 3.0), 9);
    const auto d = delta_omega(g);
    EXPECT_DOUBLE_EQ(d[6], 1.0);
    EXPECT_DOUBLE_EQ(sup_norm(d), 2.0);
    EXPECT_DOUBLE_EQ(d[0], 0.0);
    EXPECT_DOUBLE_EQ(d[8], 0.0);
}

TEST(Norms, ParabolaExamples) {
    const auto g = Grid::uniform(kUnit, 1001);
    const auto u = sample([](double x) { return x * (1.0 - x) / 2.0; }, g);
    const auto up = sample([](double x) { return 0.5 - x; }, g);
    EXPECT_NEAR(sup_norm(u), 0.125, 1e-15);
    EXPECT_NEAR(c1_norm(u, up), 0.625, 1e-15);
    EXPECT_EQ(sup_norm(SampledFunction::zero(g)), 0.0);
}

TEST(Properties, MonotoneForNonnegative) {
    const auto g = Grid::uniform(kUnit, 257, std::vector<double>{0.3});
    PiecewiseSpec spec;
    spec.breakpoints = {0.3};
    spec.pieces = {parse_expression("0"), parse_expression("abs(x - 0.5) * exp(-x)")};
    const auto H = cumulative_integral(sample(spec, g));
    for (std::size_t i = 0; i + 1 < g->size(); ++i) EXPECT_LE(H[i], H[i + 1]);
}

TEST(Properties, Linearity) {
    const auto g = Grid::uniform(kUnit, 513);
    const auto h1 = sample([](double x) { return std::exp(x); }, g);
    const auto h2 = indicator(g, 0.25, 0.75);
    const double alpha = 2.5, beta = -0.75;
    const auto lhs = cumulative_integral(alpha * h1 + beta * h2);
    const auto H1 = cumulative_integral(h1);
    const auto H2 = cumulative_integral(h2);
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double rhs = alpha * H1[i] + beta * H2[i];
        EXPECT_NEAR(lhs[i], rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(Properties, SecondOrderConvergenceOnSine) {
    const double exact = 1.0 - std::cos(1.0);
    double prev_err = 0.0;
    for (int n : {33, 65, 129, 257}) {
        const auto g = Grid::uniform(kUnit, n);
        const double err = std::abs(integrate(sample([](double x) { return std::sin(x); }, g)) - exact);
        if (prev_err > 0.0) EXPECT_GE(std::log2(prev_err / err), 1.9) << n;
        prev_err = err;
    }
}

TEST(SampledFunction, JumpsAtBreakpointsIntegrateExactly) {
    const auto g = Grid::uniform(kUnit, 11, std::vector<double>{0.4, 0.6});
    const auto h = indicator(g, 0.4, 0.6);
    const auto i = *g->node_index(0.4);
    EXPECT_TRUE(h.has_jump(i));
    EXPECT_EQ(h.left(i), 0.0);
    EXPECT_EQ(h.right(i), 1.0);
    EXPECT_NEAR(integrate(h), 0.2, 1e-15);
}

TEST(SampledFunction, ProductAddsSingularExponents) {
    const auto g = Grid::uniform(kUnit, 65);
    const auto p = delta_power(g, 0.5) * delta_power(g, 0.25);
    ASSERT_TRUE(p.left_singularity().has_value());
    EXPECT_DOUBLE_EQ(*p.left_singularity(), 0.75);
    EXPECT_NEAR(integrate(p), 2.0 * std::pow(0.5, 1.75) / 1.75, 1e-9);
}

TEST(Csv, JumpProducesTwoRows) {
    const auto g = Grid::uniform(kUnit, 3, std::vector<double>{0.5});
    const auto h = indicator(g, 0.5, 1.0);
    std::ostringstream ss;
    write_csv(ss, h, "m");
    EXPECT_EQ(ss.str(), "x,m\n0,0\n0.5,0\n0.5,1\n1,1\n");
}

TEST(FormatDouble, RoundTrips) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
