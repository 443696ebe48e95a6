#include "contactkit/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace contactkit {

struct Expr::Node {
    enum Kind { kConst, kSym, kAdd, kSub, kMul, kDiv, kNeg, kPow, kExp, kLn, kSqrt };
    Kind kind;
    double value = 0.0;  // kConst
    int slot = -1;       // kSym
    int exponent = 0;    // kPow
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Expr::Expr() : node_() {}

bool Expr::is_zero() const {
    return !node_ || (node_->kind == Node::kConst && node_->value == 0.0);
}

namespace {

bool is_const(const NodePtr& n, double* out = nullptr) {
    if (n && n->kind == Expr::Node::kConst) {
        if (out) *out = n->value;
        return true;
    }
    return false;
}

}  // namespace

Expr Expr::constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::kConst;
    n->value = v;
    return Expr(std::move(n));
}

Expr Expr::symbol(int slot) {
    auto n = std::make_shared<Node>();
    n->kind = Node::kSym;
    n->slot = slot;
    return Expr(std::move(n));
}

Expr Expr::add(const Expr& a, const Expr& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    double va, vb;
    if (is_const(a.node_, &va) && is_const(b.node_, &vb) && finite(va + vb))
        return constant(va + vb);
    auto n = std::make_shared<Node>();
    n->kind = Node::kAdd;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr Expr::sub(const Expr& a, const Expr& b) {
    if (b.is_zero()) return a;
    if (a.node_ == b.node_) return Expr();  // shared subtree: exactly zero
    if (a.is_zero()) return neg(b);
    double va, vb;
    if (is_const(a.node_, &va) && is_const(b.node_, &vb) && finite(va - vb))
        return constant(va - vb);
    auto n = std::make_shared<Node>();
    n->kind = Node::kSub;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr Expr::mul(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return Expr();
    double va, vb;
    const bool ca = is_const(a.node_, &va), cb = is_const(b.node_, &vb);
    if (ca && cb && finite(va * vb)) return constant(va * vb);
    if (ca && va == 1.0) return b;
    if (cb && vb == 1.0) return a;
    if (ca && va == -1.0) return neg(b);
    if (cb && vb == -1.0) return neg(a);
    auto n = std::make_shared<Node>();
    n->kind = Node::kMul;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr Expr::div(const Expr& a, const Expr& b) {
    if (a.is_zero()) return Expr();
    double va, vb;
    if (is_const(b.node_, &vb)) {
        if (vb == 1.0) return a;
        if (is_const(a.node_, &va) && vb != 0.0 && finite(va / vb)) return constant(va / vb);
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::kDiv;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

Expr Expr::neg(const Expr& a) {
    if (a.is_zero()) return Expr();
    double va;
    if (is_const(a.node_, &va)) return constant(-va);
    if (a.node_->kind == Node::kNeg) return Expr(a.node_->a);
    auto n = std::make_shared<Node>();
    n->kind = Node::kNeg;
    n->a = a.node_;
    return Expr(std::move(n));
}

Expr Expr::ipow(const Expr& a, int k) {
    if (k == 0) return constant(1.0);
    if (k == 1) return a;
    double va;
    if (is_const(a.node_, &va) && finite(std::pow(va, k))) return constant(std::pow(va, k));
    auto n = std::make_shared<Node>();
    n->kind = Node::kPow;
    n->exponent = k;
    n->a = a.node_;
    return Expr(std::move(n));
}

Expr Expr::exp(const Expr& a) {
    double va;
    if (is_const(a.node_, &va) && finite(std::exp(va))) return constant(std::exp(va));
    auto n = std::make_shared<Node>();
    n->kind = Node::kExp;
    n->a = a.node_;
    return Expr(std::move(n));
}

Expr Expr::ln(const Expr& a) {
    double va;
    if (is_const(a.node_, &va) && va > 0.0) return constant(std::log(va));
    auto n = std::make_shared<Node>();
    n->kind = Node::kLn;
    n->a = a.node_;
    return Expr(std::move(n));
}

Expr Expr::sqrt(const Expr& a) {
    double va;
    if (is_const(a.node_, &va) && va >= 0.0) return constant(std::sqrt(va));
    auto n = std::make_shared<Node>();
    n->kind = Node::kSqrt;
    n->a = a.node_;
    return Expr(std::move(n));
}

namespace {

double eval_node(const NodePtr& n, const std::vector<double>& s) {
    if (!n) return 0.0;
    switch (n->kind) {
        case Expr::Node::kConst: return n->value;
        case Expr::Node::kSym: return s[static_cast<size_t>(n->slot)];
        case Expr::Node::kAdd: return eval_node(n->a, s) + eval_node(n->b, s);
        case Expr::Node::kSub: return eval_node(n->a, s) - eval_node(n->b, s);
        case Expr::Node::kMul: return eval_node(n->a, s) * eval_node(n->b, s);
        case Expr::Node::kDiv: return eval_node(n->a, s) / eval_node(n->b, s);
        case Expr::Node::kNeg: return -eval_node(n->a, s);
        case Expr::Node::kPow: return std::pow(eval_node(n->a, s), n->exponent);
        case Expr::Node::kExp: return std::exp(eval_node(n->a, s));
        case Expr::Node::kLn: return std::log(eval_node(n->a, s));
        case Expr::Node::kSqrt: return std::sqrt(eval_node(n->a, s));
    }
    return 0.0;
}

}  // namespace

double Expr::eval(const std::vector<double>& slots) const { return eval_node(node_, slots); }

Expr Expr::derivative(int slot) const {
    if (!node_) return Expr();
    const Expr a = node_->a ? Expr(node_->a) : Expr();
    const Expr b = node_->b ? Expr(node_->b) : Expr();
    switch (node_->kind) {
        case Node::kConst: return Expr();
        case Node::kSym: return node_->slot == slot ? constant(1.0) : Expr();
        case Node::kAdd: return add(a.derivative(slot), b.derivative(slot));
        case Node::kSub: return sub(a.derivative(slot), b.derivative(slot));
        case Node::kMul:
            return add(mul(a.derivative(slot), b), mul(a, b.derivative(slot)));
        case Node::kDiv:
            // (u/v)' = u'/v - u v'/v^2
            return sub(div(a.derivative(slot), b),
                       div(mul(a, b.derivative(slot)), ipow(b, 2)));
        case Node::kNeg: return neg(a.derivative(slot));
        case Node::kPow:
            return mul(mul(constant(node_->exponent), ipow(a, node_->exponent - 1)),
                       a.derivative(slot));
        case Node::kExp: return mul(exp(a), a.derivative(slot));
        case Node::kLn: return div(a.derivative(slot), a);
        case Node::kSqrt:
            return div(a.derivative(slot), mul(constant(2.0), sqrt(a)));
    }
    return Expr();
}

// ------------------------------------------------------------------ parser

namespace {

struct Parser {
    const std::string& text;
    const std::map<std::string, int>& symbols;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << what << " at column " << (pos + 1) << " in \"" << text << "\"";
        throw ModelParseError(msg.str());
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool peek(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }

    bool consume(char c) {
        if (peek(c)) {
            ++pos;
            return true;
        }
        return false;
    }

    Expr parse() {
        Expr e = sum();
        skip_ws();
        if (pos != text.size()) fail("unexpected trailing input");
        return e;
    }

    Expr sum() {
        Expr e = product();
        while (true) {
            if (consume('+')) e = Expr::add(e, product());
            else if (consume('-')) e = Expr::sub(e, product());
            else return e;
        }
    }

    Expr product() {
        Expr e = unary();
        while (true) {
            if (consume('*')) e = Expr::mul(e, unary());
            else if (consume('/')) e = Expr::div(e, unary());
            else return e;
        }
    }

    Expr unary() {
        if (consume('-')) return Expr::neg(unary());
        if (consume('+')) return unary();
        return postfix();
    }

    Expr postfix() {
        Expr e = primary();
        while (consume('^')) e = Expr::ipow(e, exponent());
        return e;
    }

    int exponent() {
        skip_ws();
        const size_t start = pos;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
        size_t digits = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            ++pos;
            ++digits;
        }
        if (digits == 0) fail("exponent must be an integer literal");
        return std::atoi(text.substr(start, pos - start).c_str());
    }

    Expr primary() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of expression");
        const char c = text[pos];
        if (c == '(') {
            ++pos;
            Expr e = sum();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected character");
    }

    Expr number() {
        const char* begin = text.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos += static_cast<size_t>(end - begin);
        return Expr::constant(v);
    }

    Expr identifier() {
        const size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        const std::string name = text.substr(start, pos - start);
        if (name == "exp" || name == "ln" || name == "sqrt") {
            if (!consume('(')) fail("expected '(' after function name");
            Expr arg = sum();
            if (!consume(')')) fail("expected ')'");
            if (name == "exp") return Expr::exp(arg);
            if (name == "ln") return Expr::ln(arg);
            return Expr::sqrt(arg);
        }
        const auto it = symbols.find(name);
        if (it == symbols.end()) {
            pos = start;
            fail("unknown identifier '" + name + "'");
        }
        return Expr::symbol(it->second);
    }
};

}  // namespace

Expr parse_expression(const std::string& text, const std::map<std::string, int>& symbols) {
    Parser p{text, symbols};
    return p.parse();
}

}  // namespace contactkit
