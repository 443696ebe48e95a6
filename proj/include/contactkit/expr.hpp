#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "contactkit/errors.hpp"

namespace contactkit {

// A small arithmetic expression language for user-defined models: the binary
// operators + - * /, integer powers written `base^k` (k may be negative),
// the functions exp, ln, sqrt, numeric literals, and named symbols bound to
// slot indices. Expressions are immutable trees with value semantics.
// Differentiation is symbolic, so the derivative tensors of a parsed model
// are analytic rather than finite-differenced.
class Expr {
  public:
    struct Node;  // opaque tree node; defined in the implementation file

    Expr();  // the constant 0

    static Expr constant(double v);
    static Expr symbol(int slot);

    static Expr add(const Expr& a, const Expr& b);
    static Expr sub(const Expr& a, const Expr& b);
    static Expr mul(const Expr& a, const Expr& b);
    static Expr div(const Expr& a, const Expr& b);
    static Expr neg(const Expr& a);
    static Expr ipow(const Expr& a, int k);
    static Expr exp(const Expr& a);
    static Expr ln(const Expr& a);
    static Expr sqrt(const Expr& a);

    double eval(const std::vector<double>& slots) const;
    Expr derivative(int slot) const;

    // True iff the tree is literally the constant 0 (after the structural
    // simplifications applied by the smart constructors).
    bool is_zero() const;

  private:
    std::shared_ptr<const Node> node_;
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
};

// Parses `text` against a symbol table mapping identifiers to slot indices.
// Throws ModelParseError (with a column position) on syntax errors, unknown
// identifiers, or non-integer exponents.
Expr parse_expression(const std::string& text, const std::map<std::string, int>& symbols);

}  // namespace contactkit
