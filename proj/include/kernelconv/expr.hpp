#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "kernelconv/errors.hpp"

namespace kernelconv {

/// Variables understood by the expression language. r and s are profile
/// coordinates; samplers bind them as aliases of x and y.
enum class Var : std::uint8_t { X = 0, Y, R, S, J };

constexpr const char* var_name(Var v) {
  switch (v) {
    case Var::X: return "x";
    case Var::Y: return "y";
    case Var::R: return "r";
    case Var::S: return "s";
    case Var::J: return "j";
  }
  return "?";
}

/// Bit set of variables, indexed by Var.
class VarSet {
 public:
  VarSet() = default;
  void add(Var v) { bits_ |= mask(v); }
  bool contains(Var v) const { return bits_ & mask(v); }
  bool subset_of(VarSet other) const { return (bits_ & ~other.bits_) == 0; }
  bool empty() const { return bits_ == 0; }
  VarSet& operator|=(VarSet other) { bits_ |= other.bits_; return *this; }
  std::string str() const;

  static VarSet of(std::initializer_list<Var> vs) {
    VarSet s;
    for (Var v : vs) s.add(v);
    return s;
  }

 private:
  static std::uint8_t mask(Var v) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v)); }
  std::uint8_t bits_ = 0;
};

/// Variable bindings for evaluation. Unbound variables raise EvalError.
struct EvalEnv {
  double vals[5] = {0, 0, 0, 0, 0};
  std::uint8_t bound = 0;

  EvalEnv& bind(Var v, double value) {
    vals[static_cast<unsigned>(v)] = value;
    bound |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(v));
    return *this;
  }
  bool has(Var v) const { return bound & (1u << static_cast<unsigned>(v)); }
  double get(Var v) const { return vals[static_cast<unsigned>(v)]; }

  /// Grid point binding: x/r take the first coordinate, y/s the second.
  static EvalEnv at_point(double x, double y) {
    EvalEnv e;
    e.bind(Var::X, x).bind(Var::R, x).bind(Var::Y, y).bind(Var::S, y);
    return e;
  }
  static EvalEnv at_point(double x, double y, double j) {
    EvalEnv e = at_point(x, y);
    e.bind(Var::J, j);
    return e;
  }
  static EvalEnv at_index(double j) {
    EvalEnv e;
    e.bind(Var::J, j);
    return e;
  }
};

namespace detail {
struct Node;
}

/// Immutable arithmetic expression.
///
/// Grammar (precedence low to high: + -, * /, ^ right-associative, unary minus
/// binding tightest, so "-x^2" means "(-x)^2"):
///
///   expr    := term (('+' | '-') term)*
///   term    := power (('*' | '/') power)*
///   power   := unary ('^' power)?
///   unary   := '-' unary | primary
///   primary := number | variable | function '(' expr (',' expr)? ')' | '(' expr ')'
///
/// Functions: abs sqrt log exp sin cos (unary), min max (binary). log is
/// natural; log(0) evaluates to -infinity, which propagates (-inf + finite =
/// -inf, exp(-inf) = 0, c*(-inf) = -inf for c > 0). Results of NaN or
/// +infinity raise EvalError.
class Expr {
 public:
  Expr() = default;

  /// Parses `text`; ParseError carries the byte offset of the failure.
  static Expr parse(std::string_view text);

  static Expr constant(double value);

  double eval(const EvalEnv& env) const;
  VarSet free_vars() const;

  /// Canonical printed form; parse(str()) reproduces the same tree.
  std::string str() const;

  bool valid() const { return root_ != nullptr; }

 private:
  explicit Expr(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const detail::Node> root_;
};

/// Throws SpecError unless the expression's free variables are within
/// `allowed`; `what` names the expression's role in the message.
void require_free_vars(const Expr& e, VarSet allowed, const std::string& what);

}  // namespace kernelconv
