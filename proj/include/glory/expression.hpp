#pragma once

// Small arithmetic expression grammar for configuration-supplied fields:
// identifiers t, x, y; operators + - * / ^; functions sin, cos, exp;
// constants pi and L (the domain half-width, bound at evaluation time).
// Supports symbolic differentiation with respect to t for manufactured
// amplitudes and time-dependent test functions.

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "glory/errors.hpp"

namespace glory::expr {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };
enum class Var { T, X, Y, L };

struct Node {
    Op op;
    double value = 0.0;  // Const
    Var var = Var::T;    // Var
    NodePtr a, b;
};

inline NodePtr make_const(double v) {
    return std::make_shared<Node>(Node{Op::Const, v, Var::T, nullptr, nullptr});
}
inline NodePtr make_var(Var v) {
    return std::make_shared<Node>(Node{Op::Var, 0.0, v, nullptr, nullptr});
}
inline NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr) {
    return std::make_shared<Node>(Node{op, 0.0, Var::T, std::move(a), std::move(b)});
}

class Parser {
  public:
    explicit Parser(std::string src) : src_(std::move(src)) {}

    NodePtr parse() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != src_.size()) fail("trailing characters");
        return e;
    }

  private:
    std::string src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw UnsupportedExpression("parse error at offset " + std::to_string(pos_) + ": " + why +
                                    " in '" + src_ + "'");
    }
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr expression() {
        NodePtr e = term();
        for (;;) {
            if (consume('+'))
                e = make_node(Op::Add, e, term());
            else if (consume('-'))
                e = make_node(Op::Sub, e, term());
            else
                return e;
        }
    }
    NodePtr term() {
        NodePtr e = unary();
        for (;;) {
            if (consume('*'))
                e = make_node(Op::Mul, e, unary());
            else if (consume('/'))
                e = make_node(Op::Div, e, unary());
            else
                return e;
        }
    }
    NodePtr unary() {
        if (consume('-')) return make_node(Op::Neg, unary());
        if (consume('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = atom();
        if (consume('^')) return make_node(Op::Pow, base, unary());  // right associative
        return base;
    }
    NodePtr atom() {
        skip_ws();
        if (consume('(')) {
            NodePtr e = expression();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        const char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("expected number, identifier or '('");
    }
    NodePtr number() {
        std::size_t end = pos_;
        while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) ||
                                     src_[end] == '.' || src_[end] == 'e' || src_[end] == 'E' ||
                                     ((src_[end] == '+' || src_[end] == '-') && end > pos_ &&
                                      (src_[end - 1] == 'e' || src_[end - 1] == 'E'))))
            ++end;
        try {
            std::size_t used = 0;
            const double v = std::stod(src_.substr(pos_, end - pos_), &used);
            pos_ += used;
            return make_const(v);
        } catch (const std::exception&) {
            fail("bad numeric literal");
        }
    }
    NodePtr identifier() {
        std::size_t end = pos_;
        while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
            ++end;
        const std::string name = src_.substr(pos_, end - pos_);
        pos_ = end;
        if (name == "pi") return make_const(std::numbers::pi);
        if (name == "L") return make_var(Var::L);
        if (name == "t") return make_var(Var::T);
        if (name == "x") return make_var(Var::X);
        if (name == "y") return make_var(Var::Y);
        if (name == "sin" || name == "cos" || name == "exp") {
            if (!consume('(')) fail("expected '(' after function name");
            NodePtr arg = expression();
            if (!consume(')')) fail("expected ')'");
            if (name == "sin") return make_node(Op::Sin, arg);
            if (name == "cos") return make_node(Op::Cos, arg);
            return make_node(Op::Exp, arg);
        }
        fail("unknown identifier '" + name + "'");
    }
};

struct Bindings {
    double t = 0.0, x = 0.0, y = 0.0, L = 1.0;
};

inline double eval(const NodePtr& n, const Bindings& b) {
    switch (n->op) {
        case Op::Const: return n->value;
        case Op::Var:
            switch (n->var) {
                case Var::T: return b.t;
                case Var::X: return b.x;
                case Var::Y: return b.y;
                case Var::L: return b.L;
            }
            return 0.0;
        case Op::Add: return eval(n->a, b) + eval(n->b, b);
        case Op::Sub: return eval(n->a, b) - eval(n->b, b);
        case Op::Mul: return eval(n->a, b) * eval(n->b, b);
        case Op::Div: return eval(n->a, b) / eval(n->b, b);
        case Op::Pow: return std::pow(eval(n->a, b), eval(n->b, b));
        case Op::Neg: return -eval(n->a, b);
        case Op::Sin: return std::sin(eval(n->a, b));
        case Op::Cos: return std::cos(eval(n->a, b));
        case Op::Exp: return std::exp(eval(n->a, b));
    }
    return 0.0;
}

inline bool depends_on(const NodePtr& n, Var v) {
    switch (n->op) {
        case Op::Const: return false;
        case Op::Var: return n->var == v;
        default:
            return (n->a && depends_on(n->a, v)) || (n->b && depends_on(n->b, v));
    }
}

/// d/dt. Powers require a t-independent exponent.
inline NodePtr diff_t(const NodePtr& n) {
    switch (n->op) {
        case Op::Const: return make_const(0.0);
        case Op::Var: return make_const(n->var == Var::T ? 1.0 : 0.0);
        case Op::Add: return make_node(Op::Add, diff_t(n->a), diff_t(n->b));
        case Op::Sub: return make_node(Op::Sub, diff_t(n->a), diff_t(n->b));
        case Op::Mul:
            return make_node(Op::Add, make_node(Op::Mul, diff_t(n->a), n->b),
                             make_node(Op::Mul, n->a, diff_t(n->b)));
        case Op::Div:
            return make_node(
                Op::Div,
                make_node(Op::Sub, make_node(Op::Mul, diff_t(n->a), n->b),
                          make_node(Op::Mul, n->a, diff_t(n->b))),
                make_node(Op::Mul, n->b, n->b));
        case Op::Pow: {
            if (depends_on(n->b, Var::T))
                throw UnsupportedExpression("cannot differentiate power with t-dependent exponent");
            // d/dt f^c = c f^(c-1) f'
            NodePtr fpow = make_node(Op::Pow, n->a, make_node(Op::Sub, n->b, make_const(1.0)));
            return make_node(Op::Mul, make_node(Op::Mul, n->b, fpow), diff_t(n->a));
        }
        case Op::Neg: return make_node(Op::Neg, diff_t(n->a));
        case Op::Sin: return make_node(Op::Mul, make_node(Op::Cos, n->a), diff_t(n->a));
        case Op::Cos:
            return make_node(Op::Neg, make_node(Op::Mul, make_node(Op::Sin, n->a), diff_t(n->a)));
        case Op::Exp: return make_node(Op::Mul, make_node(Op::Exp, n->a), diff_t(n->a));
    }
    return make_const(0.0);
}

inline NodePtr parse(const std::string& src) { return Parser(src).parse(); }

}  // namespace glory::expr
