#include "philap/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "philap/errors.hpp"

namespace philap {

namespace {

struct FuncInfo {
    std::string_view name;
    Expression::Func func;
    int arity;
};

constexpr FuncInfo kFunctions[] = {
    {"exp", Expression::Func::Exp, 1},  {"ln", Expression::Func::Ln, 1},
    {"abs", Expression::Func::Abs, 1},  {"sqrt", Expression::Func::Sqrt, 1},
    {"min", Expression::Func::Min, 2},  {"max", Expression::Func::Max, 2},
    {"pow", Expression::Func::Pow, 2},
};

const FuncInfo* find_function(std::string_view name) {
    for (const auto& info : kFunctions) {
        if (info.name == name) return &info;
    }
    return nullptr;
}

const FuncInfo* find_function(Expression::Func func) {
    for (const auto& info : kFunctions) {
        if (info.func == func) return &info;
    }
    return nullptr;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

class ExpressionParser {
public:
    ExpressionParser(std::string_view src, const std::vector<std::string>& variables,
                     const ParamMap& params)
        : src_(src), variables_(variables), params_(params) {}

    Expression parse() {
        Expression result;
        out_ = &result;
        skip_space();
        if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
        parse_expr();
        skip_space();
        if (pos_ < src_.size()) {
            throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
        }
        result.variables_ = variables_;
        result.source_ = std::string(src_);
        return result;
    }

private:
    int push(Expression::Node node) {
        out_->nodes_.push_back(std::move(node));
        return static_cast<int>(out_->nodes_.size()) - 1;
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = binary(Expression::Op::Add, lhs, parse_term());
            } else if (accept('-')) {
                lhs = binary(Expression::Op::Sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = binary(Expression::Op::Mul, lhs, parse_unary());
            } else if (accept('/')) {
                lhs = binary(Expression::Op::Div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    int parse_unary() {
        if (accept('-')) {
            Expression::Node node;
            node.op = Expression::Op::Neg;
            node.lhs = parse_unary();
            return push(std::move(node));
        }
        return parse_power();
    }

    int parse_power() {
        int base = parse_primary();
        if (accept('^')) return binary(Expression::Op::Pow, base, parse_unary());
        return base;
    }

    int parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    int parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                digits();
            } else {
                pos_ = save;
            }
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (ec != std::errc() || ptr != src_.data() + pos_) throw ParseError("malformed number", start);
        Expression::Node node;
        node.op = Expression::Op::Number;
        node.value = value;
        return push(std::move(node));
    }

    int parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name(src_.substr(start, pos_ - start));

        skip_space();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            const FuncInfo* info = find_function(name);
            if (info == nullptr) throw ParseError("unknown function '" + name + "'", start);
            ++pos_;
            Expression::Node node;
            node.op = Expression::Op::Call;
            node.func = info->func;
            node.name = name;
            node.lhs = parse_expr();
            if (info->arity == 2) {
                expect(',');
                node.rhs = parse_expr();
            }
            expect(')');
            return push(std::move(node));
        }

        auto var = std::find(variables_.begin(), variables_.end(), name);
        if (var != variables_.end()) {
            Expression::Node node;
            node.op = Expression::Op::Variable;
            node.slot = static_cast<int>(var - variables_.begin());
            node.name = name;
            return push(std::move(node));
        }
        if (auto it = params_.find(name); it != params_.end()) {
            Expression::Node node;
            node.op = Expression::Op::Param;
            node.value = it->second;
            node.name = name;
            return push(std::move(node));
        }
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    int binary(Expression::Op op, int lhs, int rhs) {
        Expression::Node node;
        node.op = op;
        node.lhs = lhs;
        node.rhs = rhs;
        return push(std::move(node));
    }

    std::string_view src_;
    const std::vector<std::string>& variables_;
    const ParamMap& params_;
    std::size_t pos_ = 0;
    Expression* out_ = nullptr;
};

Expression parse_expression(std::string_view src, const std::vector<std::string>& variables,
                            const ParamMap& params) {
    return ExpressionParser(src, variables, params).parse();
}

double Expression::eval(std::span<const double> vars) const {
    if (nodes_.empty()) return 0.0;
    return eval_node(static_cast<int>(nodes_.size()) - 1, vars);
}

double Expression::eval_node(int index, std::span<const double> vars) const {
    const Node& n = nodes_[index];
    switch (n.op) {
        case Op::Number:
        case Op::Param:
            return n.value;
        case Op::Variable:
            return vars[n.slot];
        case Op::Neg:
            return -eval_node(n.lhs, vars);
        case Op::Add:
            return eval_node(n.lhs, vars) + eval_node(n.rhs, vars);
        case Op::Sub:
            return eval_node(n.lhs, vars) - eval_node(n.rhs, vars);
        case Op::Mul:
            return eval_node(n.lhs, vars) * eval_node(n.rhs, vars);
        case Op::Div:
            return eval_node(n.lhs, vars) / eval_node(n.rhs, vars);
        case Op::Pow:
            return std::pow(eval_node(n.lhs, vars), eval_node(n.rhs, vars));
        case Op::Call: {
            const double u = eval_node(n.lhs, vars);
            switch (n.func) {
                case Func::Exp: return std::exp(u);
                case Func::Ln: return std::log(u);
                case Func::Abs: return std::abs(u);
                case Func::Sqrt: return std::sqrt(u);
                case Func::Min: return std::min(u, eval_node(n.rhs, vars));
                case Func::Max: return std::max(u, eval_node(n.rhs, vars));
                case Func::Pow: return std::pow(u, eval_node(n.rhs, vars));
                case Func::None: break;
            }
            break;
        }
    }
    return std::nan("");
}

std::string Expression::to_string() const {
    std::string out;
    if (!nodes_.empty()) render(static_cast<int>(nodes_.size()) - 1, out);
    return out;
}

void Expression::render(int index, std::string& out) const {
    const Node& n = nodes_[index];
    auto infix = [&](const char* op) {
        out += '(';
        render(n.lhs, out);
        out += op;
        render(n.rhs, out);
        out += ')';
    };
    switch (n.op) {
        case Op::Number: out += format_number(n.value); break;
        case Op::Param:
        case Op::Variable: out += n.name; break;
        case Op::Neg:
            out += "(-";
            render(n.lhs, out);
            out += ')';
            break;
        case Op::Add: infix(" + "); break;
        case Op::Sub: infix(" - "); break;
        case Op::Mul: infix(" * "); break;
        case Op::Div: infix(" / "); break;
        case Op::Pow: infix("^"); break;
        case Op::Call:
            out += find_function(n.func)->name;
            out += '(';
            render(n.lhs, out);
            if (n.rhs >= 0) {
                out += ", ";
                render(n.rhs, out);
            }
            out += ')';
            break;
    }
}

}  // namespace philap
