#pragma once

// Minimal arithmetic expression language for scalar fields (psi, phi, u0,
// chi components).  Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
// Identifiers: x, y, r, theta, t, pi, e.  Functions: sin, cos, exp, log,
// sqrt, abs.  '^' associates right.

#include <cmath>
#include <cctype>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace khflow {

struct ExprError : std::runtime_error {
    std::size_t offset;
    ExprError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (at byte " + std::to_string(off) + ")"),
          offset(off) {}
};

// Evaluation point.  Polar and Cartesian coordinates are both available;
// samplers keep them consistent (x = r cos theta, y = r sin theta).
struct EvalContext {
    double x = 0.0, y = 0.0, r = 0.0, theta = 0.0, t = 0.0;
    bool allow_t = false;
};

class Expression {
  public:
    enum class Kind { Number, Var, Unary, Binary, Call };

    struct Node {
        Kind kind;
        double number = 0.0;
        char op = 0;       // '+','-','*','/','^', or '-' for unary
        int var = 0;       // index into variable table
        int func = 0;      // index into function table
        std::size_t offset = 0;
        std::shared_ptr<Node> lhs, rhs;
    };

    Expression() = default;

    static Expression parse(const std::string& text) {
        Parser p(text);
        Expression e;
        e.text_ = text;
        e.root_ = p.parse_expr();
        p.skip_ws();
        if (!p.at_end())
            throw ExprError("unexpected trailing input", p.pos());
        return e;
    }

    double eval(const EvalContext& ctx) const {
        if (!root_) throw std::logic_error("empty expression");
        return eval_node(*root_, ctx);
    }

    bool empty() const { return !root_; }
    const std::string& text() const { return text_; }

  private:
    std::shared_ptr<Node> root_;
    std::string text_;

    static constexpr const char* kVars[] = {"x", "y", "r", "theta", "t", "pi", "e"};
    static constexpr const char* kFuncs[] = {"sin", "cos", "exp", "log", "sqrt", "abs"};

    static double eval_node(const Node& n, const EvalContext& ctx) {
        switch (n.kind) {
            case Kind::Number:
                return n.number;
            case Kind::Var:
                switch (n.var) {
                    case 0: return ctx.x;
                    case 1: return ctx.y;
                    case 2: return ctx.r;
                    case 3: return ctx.theta;
                    case 4:
                        if (!ctx.allow_t)
                            throw ExprError("identifier 't' not permitted here", n.offset);
                        return ctx.t;
                    case 5: return M_PI;
                    default: return M_E;
                }
            case Kind::Unary:
                return -eval_node(*n.lhs, ctx);
            case Kind::Binary: {
                const double a = eval_node(*n.lhs, ctx);
                const double b = eval_node(*n.rhs, ctx);
                switch (n.op) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    case '/':
                        if (b == 0.0) throw ExprError("division by zero", n.offset);
                        return a / b;
                    default: {
                        const double v = std::pow(a, b);
                        if (!std::isfinite(v))
                            throw ExprError("non-finite power result", n.offset);
                        return v;
                    }
                }
            }
            case Kind::Call: {
                const double a = eval_node(*n.lhs, ctx);
                switch (n.func) {
                    case 0: return std::sin(a);
                    case 1: return std::cos(a);
                    case 2: return std::exp(a);
                    case 3:
                        if (a <= 0.0) throw ExprError("log of nonpositive value", n.offset);
                        return std::log(a);
                    case 4:
                        if (a < 0.0) throw ExprError("sqrt of negative value", n.offset);
                        return std::sqrt(a);
                    default: return std::abs(a);
                }
            }
        }
        throw std::logic_error("unreachable");
    }

    class Parser {
      public:
        explicit Parser(const std::string& s) : s_(s) {}

        std::shared_ptr<Node> parse_expr() {
            auto lhs = parse_term();
            skip_ws();
            while (peek() == '+' || peek() == '-') {
                const char op = advance();
                auto n = make(Kind::Binary);
                n->op = op;
                n->lhs = std::move(lhs);
                n->rhs = parse_term();
                lhs = std::move(n);
                skip_ws();
            }
            return lhs;
        }

        void skip_ws() {
            while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
        }
        bool at_end() const { return i_ >= s_.size(); }
        std::size_t pos() const { return i_; }

      private:
        const std::string& s_;
        std::size_t i_ = 0;

        char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
        char advance() { return s_[i_++]; }

        std::shared_ptr<Node> make(Kind k) {
            auto n = std::make_shared<Node>();
            n->kind = k;
            n->offset = i_;
            return n;
        }

        std::shared_ptr<Node> parse_term() {
            auto lhs = parse_factor();
            skip_ws();
            while (peek() == '*' || peek() == '/') {
                const char op = advance();
                auto n = make(Kind::Binary);
                n->op = op;
                n->lhs = std::move(lhs);
                n->rhs = parse_factor();
                lhs = std::move(n);
                skip_ws();
            }
            return lhs;
        }

        std::shared_ptr<Node> parse_factor() {
            skip_ws();
            if (peek() == '-') {
                advance();
                auto n = make(Kind::Unary);
                n->op = '-';
                n->lhs = parse_factor();
                return n;
            }
            return parse_power();
        }

        std::shared_ptr<Node> parse_power() {
            auto base = parse_atom();
            skip_ws();
            if (peek() == '^') {
                advance();
                auto n = make(Kind::Binary);
                n->op = '^';
                n->lhs = std::move(base);
                n->rhs = parse_factor();  // right associative
                return n;
            }
            return base;
        }

        std::shared_ptr<Node> parse_atom() {
            skip_ws();
            const std::size_t start = i_;
            const char c = peek();
            if (c == '(') {
                advance();
                auto e = parse_expr();
                skip_ws();
                if (peek() != ')') throw ExprError("expected ')'", i_);
                advance();
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t consumed = 0;
                double v;
                try {
                    v = std::stod(s_.substr(i_), &consumed);
                } catch (const std::exception&) {
                    throw ExprError("malformed number", i_);
                }
                i_ += consumed;
                auto n = make(Kind::Number);
                n->number = v;
                n->offset = start;
                return n;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::string name;
                while (i_ < s_.size() &&
                       (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
                    name += s_[i_++];
                skip_ws();
                if (peek() == '(') {
                    int fi = -1;
                    for (int f = 0; f < 6; ++f)
                        if (name == kFuncs[f]) fi = f;
                    if (fi < 0) throw ExprError("unknown function '" + name + "'", start);
                    advance();
                    auto n = make(Kind::Call);
                    n->func = fi;
                    n->offset = start;
                    n->lhs = parse_expr();
                    skip_ws();
                    if (peek() != ')') throw ExprError("expected ')'", i_);
                    advance();
                    return n;
                }
                int vi = -1;
                for (int v = 0; v < 7; ++v)
                    if (name == kVars[v]) vi = v;
                if (vi < 0) throw ExprError("unknown identifier '" + name + "'", start);
                auto n = make(Kind::Var);
                n->var = vi;
                n->offset = start;
                return n;
            }
            throw ExprError("expected value", i_);
        }
    };
};

}  // namespace khflow
