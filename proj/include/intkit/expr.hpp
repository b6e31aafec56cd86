#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intkit/error.hpp"

namespace intkit {

using Complex = std::complex<double>;

enum class NodeKind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class Function { Sin, Cos, Tan, Atan, Exp, Ln, Sqrt, Sinh, Cosh, Tanh, Abs, Re, Im, Conj };

std::string_view function_name(Function f);
/// Looks a name up in the fixed function catalog; false if absent.
bool lookup_function(std::string_view name, Function& out);

class Expr;

struct Node {
  NodeKind kind;
  Complex value{};      // Constant
  std::string name;     // Variable name, or the reserved symbol (pi, e, i) of a Constant
  Function fn{};        // Call
  std::vector<Expr> children;
};

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  Expr();  // the zero constant
  Expr(double v);  // NOLINT(google-explicit-constructor)
  Expr(Complex v);  // NOLINT(google-explicit-constructor)

  static Expr constant(Complex v);
  static Expr symbol_constant(std::string_view symbol);  // pi, e, i
  static Expr variable(std::string name);

  /// Raw node construction without folding; the parser uses these.
  static Expr make_unary(NodeKind kind, Expr operand);
  static Expr make_binary(NodeKind kind, Expr lhs, Expr rhs);
  static Expr make_call(Function fn, Expr arg);

  const Node& node() const noexcept { return *node_; }
  NodeKind kind() const noexcept { return node_->kind; }
  const Node* id() const noexcept { return node_.get(); }

  bool is_constant() const noexcept { return node_->kind == NodeKind::Constant; }
  bool is_constant(double v) const noexcept;
  bool is_variable(std::string_view name) const noexcept;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Folding builders: constant folding plus 0/1 identities, nothing deeper.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr call(Function fn, const Expr& arg);

Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr tan(const Expr& a);
Expr atan(const Expr& a);
Expr exp(const Expr& a);
Expr ln(const Expr& a);
Expr sqrt(const Expr& a);
Expr sinh(const Expr& a);
Expr cosh(const Expr& a);
Expr tanh(const Expr& a);

/// Structural equality (kind, payload, children).
bool structurally_equal(const Expr& a, const Expr& b);

/// Parses the toolkit expression grammar. Throws SyntaxError / UnknownFunction.
Expr parse(std::string_view source);

/// Renders back to grammar text; parse(render(e)) is structurally equal to e
/// for every tree produced by parse.
std::string render(const Expr& e);

/// Free variable names.
std::set<std::string> variables(const Expr& e);
bool depends_on(const Expr& e, std::string_view var);

/// Node count of the fully expanded tree (shared subtrees counted per use),
/// saturating at SIZE_MAX.
std::size_t tree_size(const Expr& e);

/// Exact symbolic partial derivative.
Expr diff(const Expr& e, std::string_view var);

/// Simultaneous substitution of variables by expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements);

/// Variable bindings; lookups of unknown names throw UnboundVariable.
class Bindings {
 public:
  Bindings() = default;
  Bindings(std::initializer_list<std::pair<const std::string, Complex>> init) : values_(init) {}

  void set(const std::string& name, Complex v) { values_[name] = v; }
  Complex at(std::string_view name) const;
  bool contains(std::string_view name) const { return values_.find(name) != values_.end(); }

 private:
  std::map<std::string, Complex, std::less<>> values_;
};

Complex eval(const Expr& e, const Bindings& b);

/// Expression compiled against a fixed ordered variable list.
/// Shared subtrees are evaluated once per call.
class Program {
 public:
  Program() = default;
  Program(const Expr& e, std::span<const std::string> vars);

  Complex operator()(std::span<const Complex> args) const;
  /// Evaluates with real arguments and requires a real result
  /// (|imag| <= 1e-12 * max(1, |real|)), otherwise DomainError.
  double real(std::span<const double> args) const;

  std::size_t arity() const noexcept { return arity_; }

 private:
  struct Instr {
    NodeKind kind = NodeKind::Constant;
    Function fn{};
    int a = -1;
    int b = -1;
    int slot = -1;
    bool euler_base = false;
    Complex value{};
    Expr origin;
  };
  std::vector<Instr> code_;
  std::size_t arity_ = 0;
  Expr root_;

  Complex run(std::span<const Complex> args) const;
};

/// Compiles every expression against the same variable list.
class ProgramSet {
 public:
  ProgramSet() = default;
  ProgramSet(std::span<const Expr> exprs, std::span<const std::string> vars);

  void real(std::span<const double> args, std::span<double> out) const;
  std::size_t size() const noexcept { return programs_.size(); }
  const Program& operator[](std::size_t i) const { return programs_[i]; }

 private:
  std::vector<Program> programs_;
};

/// Rejects a complex result whose imaginary part is not negligible.
double require_real(Complex v, std::string_view context);

/// Polynomial coefficients (ascending powers) of e in var, if e is a polynomial
/// with constant coefficients built from +, -, *, non-negative integer powers.
bool as_polynomial(const Expr& e, std::string_view var, std::vector<Complex>& coeffs);

}  // namespace intkit
