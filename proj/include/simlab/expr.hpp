#pragma once

// Small expression language for agent and leader dynamics.
//
//   expr     := term (('+' | '-') term)*
//   term     := power (('*' | '/') power)*
//   power    := unary ('^' exponent)?
//   exponent := ('+' | '-')? INTEGER ('^' exponent)?
//   unary    := ('-' | '+') unary | primary
//   primary  := NUMBER | 'pi' | 't' | VAR | FUNC '(' expr ')' | '(' expr ')'
//
// VAR is x1..xM (own state) or x01..x0M (leader state). Unary minus binds
// tighter than '^', so -x^2 is (-x)^2. Exponents are integers folded at
// parse time; a^b^c is a^(b^c).

#include "simlab/errors.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace simlab {

enum class Func { sin, cos, tan, tanh, exp, abs, sqrt };

inline std::string_view to_string(Func f) {
    switch (f) {
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::tan: return "tan";
        case Func::tanh: return "tanh";
        case Func::exp: return "exp";
        case Func::abs: return "abs";
        case Func::sqrt: return "sqrt";
    }
    return "?";
}

inline bool func_from_name(std::string_view name, Func& out) {
    static constexpr std::pair<std::string_view, Func> table[] = {
        {"sin", Func::sin}, {"cos", Func::cos}, {"tan", Func::tan}, {"tanh", Func::tanh},
        {"exp", Func::exp}, {"abs", Func::abs}, {"sqrt", Func::sqrt},
    };
    for (const auto& [n, f] : table) {
        if (n == name) {
            out = f;
            return true;
        }
    }
    return false;
}

struct ExprNode {
    enum class Kind { number, state, leader_state, time, negate, add, sub, mul, div, pow, call };

    Kind kind = Kind::number;
    double value = 0.0;  // number
    int index = 0;       // state / leader_state, 1-based
    int exponent = 0;    // pow
    Func func = Func::sin;
    std::shared_ptr<const ExprNode> lhs;  // operand of unary nodes and calls
    std::shared_ptr<const ExprNode> rhs;
};

using ExprPtr = std::shared_ptr<const ExprNode>;

inline bool same_tree(const ExprNode* a, const ExprNode* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    using K = ExprNode::Kind;
    switch (a->kind) {
        case K::number: return a->value == b->value;
        case K::state:
        case K::leader_state: return a->index == b->index;
        case K::time: return true;
        case K::pow: return a->exponent == b->exponent && same_tree(a->lhs.get(), b->lhs.get());
        case K::call: return a->func == b->func && same_tree(a->lhs.get(), b->lhs.get());
        case K::negate: return same_tree(a->lhs.get(), b->lhs.get());
        default: return same_tree(a->lhs.get(), b->lhs.get()) && same_tree(a->rhs.get(), b->rhs.get());
    }
}

/// Whose state the plain x1..xM variables refer to.
enum class ExprScope { follower, leader };

namespace detail {

class ExprParser {
public:
    ExprParser(std::string_view src, int order, ExprScope scope) : src_(src), order_(order), scope_(scope) {}

    ExprPtr parse() {
        auto e = parse_expr();
        skip_space();
        if (pos_ != src_.size()) fail(fmt::format("unexpected '{}'", src_[pos_]));
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }
    [[noreturn]] void fail_at(std::size_t at, const std::string& msg) const {
        throw SyntaxError(fmt::format("{} at column {} in \"{}\"", msg, at + 1, src_));
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
        if (!accept(c)) fail(pos_ < src_.size() ? fmt::format("expected '{}' but found '{}'", c, src_[pos_])
                                                : fmt::format("expected '{}' but reached end of input", c));
    }

    static ExprPtr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

    static ExprPtr binary(ExprNode::Kind k, ExprPtr a, ExprPtr b) {
        ExprNode n;
        n.kind = k;
        n.lhs = std::move(a);
        n.rhs = std::move(b);
        return make(std::move(n));
    }

    ExprPtr parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = binary(ExprNode::Kind::add, lhs, parse_term());
            else if (accept('-')) lhs = binary(ExprNode::Kind::sub, lhs, parse_term());
            else return lhs;
        }
    }

    ExprPtr parse_term() {
        auto lhs = parse_power();
        for (;;) {
            if (accept('*')) lhs = binary(ExprNode::Kind::mul, lhs, parse_power());
            else if (accept('/')) lhs = binary(ExprNode::Kind::div, lhs, parse_power());
            else return lhs;
        }
    }

    ExprPtr parse_power() {
        auto base = parse_unary();
        if (!accept('^')) return base;
        ExprNode n;
        n.kind = ExprNode::Kind::pow;
        n.exponent = parse_exponent();
        n.lhs = std::move(base);
        return make(std::move(n));
    }

    int parse_exponent() {
        skip_space();
        const std::size_t start = pos_;
        int sign = 1;
        if (accept('-')) sign = -1;
        else accept('+');
        skip_space();
        const std::size_t digits = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (digits == pos_) fail_at(start, "exponent must be an integer literal");
        if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
            fail_at(start, "exponent must be an integer literal");
        long long base = std::stoll(std::string(src_.substr(digits, pos_ - digits))) * sign;
        if (accept('^')) {
            const int tail = parse_exponent();
            if (tail < 0) fail_at(start, "nested exponent must be nonnegative to stay integral");
            long long acc = 1;
            for (int i = 0; i < tail; ++i) {
                acc *= base;
                if (acc > 1'000'000 || acc < -1'000'000) fail_at(start, "exponent too large");
            }
            base = acc;
        }
        if (base > 1'000'000 || base < -1'000'000) fail_at(start, "exponent too large");
        return static_cast<int>(base);
    }

    ExprPtr parse_unary() {
        if (accept('-')) {
            ExprNode n;
            n.kind = ExprNode::Kind::negate;
            n.lhs = parse_unary();
            return make(std::move(n));
        }
        if (accept('+')) return parse_unary();
        return parse_primary();
    }

    ExprPtr parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail(fmt::format("unexpected '{}'", c));
    }

    ExprPtr parse_number() {
        char* end = nullptr;
        const std::string tmp(src_.substr(pos_));
        const double v = std::strtod(tmp.c_str(), &end);
        const auto len = static_cast<std::size_t>(end - tmp.c_str());
        if (len == 0) fail("malformed number");
        pos_ += len;
        ExprNode n;
        n.kind = ExprNode::Kind::number;
        n.value = v;
        return make(std::move(n));
    }

    ExprPtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);

        skip_space();
        const bool is_call = pos_ < src_.size() && src_[pos_] == '(';
        Func f{};
        if (is_call) {
            if (!func_from_name(name, f))
                throw UnknownFunction(fmt::format("'{}' at column {} in \"{}\"", name, start + 1, src_));
            ++pos_;
            ExprNode n;
            n.kind = ExprNode::Kind::call;
            n.func = f;
            n.lhs = parse_expr();
            expect(')');
            return make(std::move(n));
        }
        if (func_from_name(name, f)) fail_at(start, fmt::format("function '{}' needs an argument list", name));

        ExprNode n;
        if (name == "t") {
            n.kind = ExprNode::Kind::time;
            return make(std::move(n));
        }
        if (name == "pi") {
            n.kind = ExprNode::Kind::number;
            n.value = std::numbers::pi;
            return make(std::move(n));
        }
        if (name.size() >= 2 && name[0] == 'x' && all_digits(name.substr(1))) {
            const bool leader = name[1] == '0';
            const std::string_view digits = leader ? name.substr(2) : name.substr(1);
            const int idx = digits.empty() ? 0 : std::stoi(std::string(digits));
            if (idx < 1 || idx > order_)
                throw UnknownVariable(fmt::format("'{}' at column {} in \"{}\" (order is {})", name, start + 1,
                                                  src_, order_));
            n.kind = (leader && scope_ == ExprScope::follower) ? ExprNode::Kind::leader_state : ExprNode::Kind::state;
            n.index = idx;
            return make(std::move(n));
        }
        throw UnknownVariable(fmt::format("'{}' at column {} in \"{}\"", name, start + 1, src_));
    }

    static bool all_digits(std::string_view s) {
        if (s.empty()) return false;
        for (char ch : s)
            if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
        return true;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int order_;
    ExprScope scope_;
};

inline void print_node(const ExprNode& n, std::string& out) {
    using K = ExprNode::Kind;
    switch (n.kind) {
        case K::number: out += fmt::format("{}", n.value); return;
        case K::state: out += fmt::format("x{}", n.index); return;
        case K::leader_state: out += fmt::format("x0{}", n.index); return;
        case K::time: out += "t"; return;
        case K::negate:
            out += "(-";
            print_node(*n.lhs, out);
            out += ")";
            return;
        case K::call:
            out += to_string(n.func);
            out += "(";
            print_node(*n.lhs, out);
            out += ")";
            return;
        case K::pow:
            out += "(";
            print_node(*n.lhs, out);
            out += fmt::format(")^{}", n.exponent);
            return;
        default: break;
    }
    const char op = n.kind == K::add ? '+' : n.kind == K::sub ? '-' : n.kind == K::mul ? '*' : '/';
    out += "(";
    print_node(*n.lhs, out);
    out += fmt::format(" {} ", op);
    print_node(*n.rhs, out);
    out += ")";
}

inline double int_pow(double base, int exponent) {
    if (exponent < 0) {
        if (base == 0.0) throw EvalError("zero raised to a negative power");
        return 1.0 / int_pow(base, -exponent);
    }
    double result = 1.0;
    double b = base;
    unsigned e = static_cast<unsigned>(exponent);
    while (e) {
        if (e & 1u) result *= b;
        e >>= 1u;
        if (e) b *= b;
    }
    return result;
}

struct EvalContext {
    std::span<const double> x;
    std::span<const double> x0;
    double t;
};

inline double eval_node(const ExprNode& n, const EvalContext& ctx) {
    using K = ExprNode::Kind;
    switch (n.kind) {
        case K::number: return n.value;
        case K::state: return ctx.x[static_cast<std::size_t>(n.index - 1)];
        case K::leader_state:
            if (ctx.x0.size() < static_cast<std::size_t>(n.index))
                throw EvalError(fmt::format("x0{} referenced but no leader state supplied", n.index));
            return ctx.x0[static_cast<std::size_t>(n.index - 1)];
        case K::time: return ctx.t;
        case K::negate: return -eval_node(*n.lhs, ctx);
        case K::add: return eval_node(*n.lhs, ctx) + eval_node(*n.rhs, ctx);
        case K::sub: return eval_node(*n.lhs, ctx) - eval_node(*n.rhs, ctx);
        case K::mul: return eval_node(*n.lhs, ctx) * eval_node(*n.rhs, ctx);
        case K::div: {
            const double num = eval_node(*n.lhs, ctx);
            const double den = eval_node(*n.rhs, ctx);
            if (den == 0.0) throw EvalError("division by zero");
            return num / den;
        }
        case K::pow: return int_pow(eval_node(*n.lhs, ctx), n.exponent);
        case K::call: {
            const double a = eval_node(*n.lhs, ctx);
            switch (n.func) {
                case Func::sin: return std::sin(a);
                case Func::cos: return std::cos(a);
                case Func::tan: return std::tan(a);
                case Func::tanh: return std::tanh(a);
                case Func::exp: return std::exp(a);
                case Func::abs: return std::abs(a);
                case Func::sqrt:
                    if (a < 0.0) throw EvalError(fmt::format("sqrt of negative value {}", a));
                    return std::sqrt(a);
            }
        }
    }
    return 0.0;
}

inline bool references(const ExprNode& n, ExprNode::Kind kind) {
    if (n.kind == kind) return true;
    return (n.lhs && references(*n.lhs, kind)) || (n.rhs && references(*n.rhs, kind));
}

}  // namespace detail

/// A parsed, immutable dynamics expression.
class DynamicsExpr {
public:
    DynamicsExpr() = default;

    static DynamicsExpr parse(std::string_view source, int order, ExprScope scope = ExprScope::follower) {
        DynamicsExpr e;
        e.source_ = std::string(source);
        e.order_ = order;
        e.scope_ = scope;
        e.root_ = detail::ExprParser(e.source_, order, scope).parse();
        return e;
    }

    const std::string& source() const { return source_; }
    int order() const { return order_; }
    ExprScope scope() const { return scope_; }
    const ExprNode& root() const { return *root_; }
    bool valid() const { return static_cast<bool>(root_); }

    bool uses_leader_state() const { return root_ && detail::references(*root_, ExprNode::Kind::leader_state); }

    /// Fully parenthesized text that parses back to the same tree.
    std::string to_string() const {
        std::string out;
        if (root_) detail::print_node(*root_, out);
        return out;
    }

    double eval(std::span<const double> x, double t, std::span<const double> x0 = {}) const {
        if (static_cast<int>(x.size()) < order_)
            throw DimensionMismatch(fmt::format("expression needs {} states, got {}", order_, x.size()));
        return detail::eval_node(*root_, detail::EvalContext{x, x0, t});
    }

    bool same_ast(const DynamicsExpr& other) const { return same_tree(root_.get(), other.root_.get()); }

    bool operator==(const DynamicsExpr& other) const {
        return source_ == other.source_ && order_ == other.order_ && scope_ == other.scope_ && same_ast(other);
    }

private:
    std::string source_;
    int order_ = 0;
    ExprScope scope_ = ExprScope::follower;
    ExprPtr root_;
};

/// Convenience for tests and callers that have Eigen vectors.
inline DynamicsExpr parse_dynamics(std::string_view source, int order) {
    return DynamicsExpr::parse(source, order, ExprScope::follower);
}

}  // namespace simlab
