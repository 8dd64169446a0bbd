#include <cmath>

#include <gtest/gtest.h>

#include "philap/errors.hpp"
#include "philap/expression.hpp"

using philap::parse_expression;

TEST(Expression, LinearMinusLogAtOne) {
    const auto e = parse_expression("x - ln(x+1)");
    EXPECT_NEAR(e(1.0), 1.0 - std::log(2.0), 1e-15);
}

TEST(Expression, BoundParameters) {
    const auto e = parse_expression("x^(p1)/(1+x^(p2))", {"x"}, {{"p1", 2.0}, {"p2", 1.0}});
    EXPECT_DOUBLE_EQ(e(1.0), 0.5);
    EXPECT_DOUBLE_EQ(e(2.0), 4.0 / 3.0);
}

TEST(Expression, SyntaxErrorCarriesOffset) {
    try {
        parse_expression("2*+");
        FAIL() << "expected ParseError";
    } catch (const philap::ParseError& e) {
        EXPECT_EQ(e.offset(), 2u);
    }
}

TEST(Expression, UnknownIdentifierIsAnError) {
    EXPECT_THROW(parse_expression("y + 1"), philap::ParseError);
    EXPECT_THROW(parse_expression("foo(x)"), philap::ParseError);
}

TEST(Expression, Precedence) {
    EXPECT_DOUBLE_EQ(parse_expression("1 + 2 * 3")(0.0), 7.0);
    EXPECT_DOUBLE_EQ(parse_expression("2 ^ 3 ^ 2")(0.0), 512.0);  // right-associative
    EXPECT_DOUBLE_EQ(parse_expression("-2 ^ 2")(0.0), -4.0);      // ^ binds tighter than unary minus
    EXPECT_DOUBLE_EQ(parse_expression("(1 + 2) * 3")(0.0), 9.0);
    EXPECT_DOUBLE_EQ(parse_expression("8 / 4 / 2")(0.0), 1.0);
    EXPECT_DOUBLE_EQ(parse_expression("5 - 3 - 1")(0.0), 1.0);
}

TEST(Expression, Functions) {
    EXPECT_DOUBLE_EQ(parse_expression("min(x, 1)")(3.0), 1.0);
    EXPECT_DOUBLE_EQ(parse_expression("max(x, 1)")(3.0), 3.0);
    EXPECT_DOUBLE_EQ(parse_expression("pow(x, 3)")(2.0), 8.0);
    EXPECT_DOUBLE_EQ(parse_expression("sqrt(abs(x))")(-4.0), 2.0);
    EXPECT_NEAR(parse_expression("exp(ln(x))")(2.5), 2.5, 1e-15);
}

TEST(Expression, VariableT) {
    const auto e = parse_expression("min(t, 1)^0.3", {"t"});
    EXPECT_DOUBLE_EQ(e(5.0), 1.0);
    EXPECT_NEAR(e(0.5), std::pow(0.5, 0.3), 1e-15);
}

TEST(Expression, RoundTripIsIdentical) {
    for (const char* src : {"x - ln(x+1)", "-x^2^3 + 4*x/(1-x)", "min(x, max(2, -x)) ^ 0.5",
                            "exp(-1/x) * x", "pow(x, 1.5e-3) - -x", "((x))"}) {
        const auto e = parse_expression(src);
        const auto again = parse_expression(e.to_string());
        EXPECT_EQ(e, again) << src << " -> " << e.to_string();
        EXPECT_EQ(e.to_string(), again.to_string());
    }
}

TEST(Expression, MalformedInputs) {
    for (const char* src : {"", "(", "x +", "1 2", "min(1)", "sqrt(1, 2)", "x)", "3..2"}) {
        EXPECT_THROW(parse_expression(src), philap::ParseError) << src;
    }
}
