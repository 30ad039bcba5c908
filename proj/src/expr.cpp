#include "kernelconv/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <utility>

namespace kernelconv {
namespace detail {

enum class Func : std::uint8_t { Abs, Sqrt, Log, Exp, Sin, Cos, Min, Max };

constexpr const char* func_name(Func f) {
  switch (f) {
    case Func::Abs: return "abs";
    case Func::Sqrt: return "sqrt";
    case Func::Log: return "log";
    case Func::Exp: return "exp";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Min: return "min";
    case Func::Max: return "max";
  }
  return "?";
}

constexpr int func_arity(Func f) { return (f == Func::Min || f == Func::Max) ? 2 : 1; }

struct Node {
  enum class Kind : std::uint8_t { Num, Variable, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
  double value = 0;
  Var var = Var::X;
  Func func = Func::Abs;
  std::shared_ptr<const Node> a, b;
};

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_num(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Num;
  n->value = v;
  return n;
}

NodePtr make_var(Var v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Variable;
  n->var = v;
  return n;
}

NodePtr make_unary(Node::Kind kind, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = std::move(a);
  return n;
}

NodePtr make_bin(Node::Kind kind, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_call(Func f, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Call;
  n->func = f;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail(pos_, "unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& msg) { throw ParseError(at, msg); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr left = term();
    for (;;) {
      if (eat('+')) {
        left = make_bin(Node::Kind::Add, left, term());
      } else if (eat('-')) {
        left = make_bin(Node::Kind::Sub, left, term());
      } else {
        return left;
      }
    }
  }

  NodePtr term() {
    NodePtr left = power();
    for (;;) {
      if (eat('*')) {
        left = make_bin(Node::Kind::Mul, left, power());
      } else if (eat('/')) {
        left = make_bin(Node::Kind::Div, left, power());
      } else {
        return left;
      }
    }
  }

  // '^' is right-associative and binds less tightly than unary minus:
  // "-x^2" is "(-x)^2" and "2^-3" has a unary-minus exponent.
  NodePtr power() {
    NodePtr base = unary();
    if (eat('^')) return make_bin(Node::Kind::Pow, base, power());
    return base;
  }

  NodePtr unary() {
    if (eat('-')) return make_unary(Node::Kind::Neg, unary());
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail(pos_, "unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) fail(pos_, "expected ')'");
      return e;
    }
    fail(pos_, std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    std::size_t start = pos_;
    std::size_t p = pos_;
    while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
    if (p < text_.size() && text_[p] == '.') {
      ++p;
      while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
    }
    if (p == start || (p == start + 1 && text_[start] == '.')) fail(start, "malformed number");
    if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
      std::size_t digits = q;
      while (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) ++q;
      if (q == digits) fail(p, "malformed exponent");
      p = q;
    }
    double value = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + p, value);
    if (res.ec != std::errc() || res.ptr != text_.data() + p) fail(start, "malformed number");
    pos_ = p;
    return make_num(value);
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);

    static constexpr std::array<std::pair<std::string_view, Var>, 5> vars{
        {{"x", Var::X}, {"y", Var::Y}, {"r", Var::R}, {"s", Var::S}, {"j", Var::J}}};
    for (auto [n, v] : vars) {
      if (name == n) return make_var(v);
    }

    static constexpr std::array<std::pair<std::string_view, Func>, 8> funcs{
        {{"abs", Func::Abs},
         {"sqrt", Func::Sqrt},
         {"log", Func::Log},
         {"exp", Func::Exp},
         {"sin", Func::Sin},
         {"cos", Func::Cos},
         {"min", Func::Min},
         {"max", Func::Max}}};
    for (auto [n, f] : funcs) {
      if (name != n) continue;
      if (!eat('(')) fail(pos_, std::string("expected '(' after '") + std::string(name) + "'");
      NodePtr a = expr();
      NodePtr b;
      if (func_arity(f) == 2) {
        if (!eat(',')) fail(pos_, std::string(name) + " takes two arguments");
        b = expr();
      } else if (peek() == ',') {
        fail(pos_, std::string(name) + " takes one argument");
      }
      if (!eat(')')) fail(pos_, "expected ')'");
      return make_call(f, std::move(a), std::move(b));
    }
    fail(start, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
  if (std::isnan(v)) throw EvalError(std::string(what) + ": indeterminate result");
  if (v == std::numeric_limits<double>::infinity())
    throw EvalError(std::string(what) + ": +infinity is not representable");
  return v;
}

double eval_node(const Node& n, const EvalEnv& env) {
  switch (n.kind) {
    case Node::Kind::Num:
      return n.value;
    case Node::Kind::Variable:
      if (!env.has(n.var)) throw EvalError(std::string("unbound variable '") + var_name(n.var) + "'");
      return env.get(n.var);
    case Node::Kind::Neg:
      return checked(-eval_node(*n.a, env), "negation");
    case Node::Kind::Add:
      return checked(eval_node(*n.a, env) + eval_node(*n.b, env), "addition");
    case Node::Kind::Sub:
      return checked(eval_node(*n.a, env) - eval_node(*n.b, env), "subtraction");
    case Node::Kind::Mul:
      return checked(eval_node(*n.a, env) * eval_node(*n.b, env), "multiplication");
    case Node::Kind::Div:
      return checked(eval_node(*n.a, env) / eval_node(*n.b, env), "division");
    case Node::Kind::Pow:
      return checked(std::pow(eval_node(*n.a, env), eval_node(*n.b, env)), "power");
    case Node::Kind::Call: {
      double a = eval_node(*n.a, env);
      switch (n.func) {
        case Func::Abs: return checked(std::fabs(a), "abs");
        case Func::Sqrt: return checked(std::sqrt(a), "sqrt");
        case Func::Log:
          // log(0) is -infinity by convention; negative arguments are errors.
          if (a < 0) throw EvalError("log of negative argument");
          return a == 0 ? neg_inf : checked(std::log(a), "log");
        case Func::Exp: return checked(std::exp(a), "exp");
        case Func::Sin: return checked(std::sin(a), "sin");
        case Func::Cos: return checked(std::cos(a), "cos");
        case Func::Min: return checked(std::fmin(a, eval_node(*n.b, env)), "min");
        case Func::Max: return checked(std::fmax(a, eval_node(*n.b, env)), "max");
      }
      throw InternalError("unhandled function");
    }
  }
  throw InternalError("unhandled expression node");
}

void collect_vars(const Node& n, VarSet& out) {
  if (n.kind == Node::Kind::Variable) out.add(n.var);
  if (n.a) collect_vars(*n.a, out);
  if (n.b) collect_vars(*n.b, out);
}

std::string format_number(double v) {
  char buf[64];
  if (v < 0) {
    buf[0] = '-';
    auto res = std::to_chars(buf + 1, buf + sizeof(buf), -v);
    return std::string(buf, res.ptr);
  }
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool is_binary(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Add:
    case Node::Kind::Sub:
    case Node::Kind::Mul:
    case Node::Kind::Div:
    case Node::Kind::Pow:
      return true;
    default:
      return false;
  }
}

int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Add:
    case Node::Kind::Sub:
      return 1;
    case Node::Kind::Mul:
    case Node::Kind::Div:
      return 2;
    case Node::Kind::Pow:
      return 3;
    default:
      return 5;
  }
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, std::string& out, bool parens) {
  if (parens) out += '(';
  print_node(child, out);
  if (parens) out += ')';
}

// Parentheses are emitted exactly where reparsing would otherwise change the
// tree, so printed forms are canonical and stable under parse/print cycles.
void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::Num:
      out += format_number(n.value);
      return;
    case Node::Kind::Variable:
      out += var_name(n.var);
      return;
    case Node::Kind::Neg:
      out += '-';
      print_child(*n.a, out, is_binary(*n.a));
      return;
    case Node::Kind::Add:
    case Node::Kind::Sub:
      print_child(*n.a, out, false);
      out += (n.kind == Node::Kind::Add) ? '+' : '-';
      print_child(*n.b, out, precedence(*n.b) <= 1);
      return;
    case Node::Kind::Mul:
    case Node::Kind::Div:
      print_child(*n.a, out, precedence(*n.a) < 2);
      out += (n.kind == Node::Kind::Mul) ? '*' : '/';
      print_child(*n.b, out, precedence(*n.b) <= 2);
      return;
    case Node::Kind::Pow:
      print_child(*n.a, out, is_binary(*n.a));
      out += '^';
      print_child(*n.b, out, precedence(*n.b) < 3);
      return;
    case Node::Kind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.a, out);
      if (n.b) {
        out += ", ";
        print_node(*n.b, out);
      }
      out += ')';
      return;
  }
}

}  // namespace
}  // namespace detail

std::string VarSet::str() const {
  std::string out;
  for (Var v : {Var::X, Var::Y, Var::R, Var::S, Var::J}) {
    if (!contains(v)) continue;
    if (!out.empty()) out += ',';
    out += var_name(v);
  }
  return out;
}

Expr Expr::parse(std::string_view text) { return Expr(detail::Parser(text).run()); }

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw SpecError("constant expression must be finite");
  return Expr(detail::make_num(value));
}

double Expr::eval(const EvalEnv& env) const {
  if (!root_) throw EvalError("empty expression");
  return detail::eval_node(*root_, env);
}

VarSet Expr::free_vars() const {
  VarSet out;
  if (root_) detail::collect_vars(*root_, out);
  return out;
}

std::string Expr::str() const {
  if (!root_) return "";
  std::string out;
  detail::print_node(*root_, out);
  return out;
}

void require_free_vars(const Expr& e, VarSet allowed, const std::string& what) {
  if (!e.valid()) throw SpecError(what + ": missing expression");
  if (!e.free_vars().subset_of(allowed))
    throw SpecError(what + ": free variables {" + e.free_vars().str() + "} not within {" +
                    allowed.str() + "}");
}

}  // namespace kernelconv
