#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace philap {

/// Compiled arithmetic expression over a small fixed set of variables.
///
/// Grammar (highest precedence first):
///   primary := number | identifier | identifier '(' args ')' | '(' expr ')'
///   power   := primary ('^' unary)?          right-associative
///   unary   := '-' unary | power
///   term    := unary (('*' | '/') unary)*
///   expr    := term (('+' | '-') term)*
///
/// Identifiers resolve, in order, to a declared variable, a bound parameter,
/// or one of the functions exp, ln, abs, sqrt (one argument) and min, max,
/// pow (two arguments). Parameters are folded to their value but keep their
/// name so that printing and reparsing reproduce the same tree.
class Expression {
public:
    enum class Op : std::uint8_t { Number, Param, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
    enum class Func : std::uint8_t { None, Exp, Ln, Abs, Sqrt, Min, Max, Pow };

    struct Node {
        Op op = Op::Number;
        Func func = Func::None;
        double value = 0.0;      // Number, Param
        int slot = -1;           // Variable
        int lhs = -1;            // first child / first argument
        int rhs = -1;            // second child / second argument
        std::string name;        // Param, Variable, Call

        bool operator==(const Node&) const = default;
    };

    Expression() = default;

    /// Evaluates with one value per declared variable, in declaration order.
    double eval(std::span<const double> vars) const;

    /// Single-variable convenience.
    double operator()(double v) const { return eval(std::span<const double>(&v, 1)); }

    /// Fully parenthesised rendering that reparses to an identical tree.
    std::string to_string() const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<std::string>& variables() const noexcept { return variables_; }
    const std::string& source() const noexcept { return source_; }
    bool empty() const noexcept { return nodes_.empty(); }

    bool operator==(const Expression& other) const {
        return nodes_ == other.nodes_ && variables_ == other.variables_;
    }

private:
    friend class ExpressionParser;

    double eval_node(int index, std::span<const double> vars) const;
    void render(int index, std::string& out) const;

    std::vector<Node> nodes_;  // root is the last node
    std::vector<std::string> variables_;
    std::string source_;
};

using ParamMap = std::map<std::string, double, std::less<>>;

/// Parses `src`; throws ParseError carrying the byte offset of the failure.
Expression parse_expression(std::string_view src,
                            const std::vector<std::string>& variables = {"x"},
                            const ParamMap& params = {});

}  // namespace philap
