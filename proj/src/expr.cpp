#include "intkit/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

namespace intkit {

namespace {

constexpr std::array<std::pair<std::string_view, Function>, 14> kCatalog{{
    {"sin", Function::Sin},   {"cos", Function::Cos},   {"tan", Function::Tan},
    {"atan", Function::Atan}, {"exp", Function::Exp},   {"ln", Function::Ln},
    {"sqrt", Function::Sqrt}, {"sinh", Function::Sinh}, {"cosh", Function::Cosh},
    {"tanh", Function::Tanh}, {"abs", Function::Abs},   {"re", Function::Re},
    {"im", Function::Im},     {"conj", Function::Conj},
}};

bool is_reserved(std::string_view name) { return name == "pi" || name == "e" || name == "i"; }

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

std::string_view function_name(Function f) {
  for (const auto& [name, fn] : kCatalog)
    if (fn == f) return name;
  return "?";
}

bool lookup_function(std::string_view name, Function& out) {
  for (const auto& [n, fn] : kCatalog) {
    if (n == name) {
      out = fn;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Construction

namespace {
std::shared_ptr<const Node> make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }
}  // namespace

Expr::Expr() : Expr(Complex{0.0, 0.0}) {}
Expr::Expr(double v) : Expr(Complex{v, 0.0}) {}
Expr::Expr(Complex v) : node_(make_node(Node{NodeKind::Constant, v, {}, {}, {}})) {}

Expr Expr::constant(Complex v) { return Expr(v); }

Expr Expr::symbol_constant(std::string_view symbol) {
  Complex v;
  if (symbol == "pi") {
    v = std::numbers::pi;
  } else if (symbol == "e") {
    v = std::numbers::e;
  } else if (symbol == "i") {
    v = Complex{0.0, 1.0};
  } else {
    throw Error("not a reserved constant: " + std::string(symbol));
  }
  return Expr(make_node(Node{NodeKind::Constant, v, std::string(symbol), {}, {}}));
}

Expr Expr::variable(std::string name) {
  return Expr(make_node(Node{NodeKind::Variable, {}, std::move(name), {}, {}}));
}

Expr Expr::make_unary(NodeKind kind, Expr operand) {
  return Expr(make_node(Node{kind, {}, {}, {}, {std::move(operand)}}));
}

Expr Expr::make_binary(NodeKind kind, Expr lhs, Expr rhs) {
  return Expr(make_node(Node{kind, {}, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Expr Expr::make_call(Function fn, Expr arg) {
  return Expr(make_node(Node{NodeKind::Call, {}, {}, fn, {std::move(arg)}}));
}

bool Expr::is_constant(double v) const noexcept {
  return node_->kind == NodeKind::Constant && node_->value == Complex{v, 0.0};
}

bool Expr::is_variable(std::string_view name) const noexcept {
  return node_->kind == NodeKind::Variable && node_->name == name;
}

// ---------------------------------------------------------------------------
// Scalar kernels shared by evaluation and folding

namespace {

Complex integer_power(Complex base, long n) {
  Complex result{1.0, 0.0};
  Complex b = base;
  unsigned long k = static_cast<unsigned long>(n < 0 ? -n : n);
  while (k) {
    if (k & 1UL) result *= b;
    b *= b;
    k >>= 1;
  }
  return n < 0 ? Complex{1.0, 0.0} / result : result;
}

// Returns false on a domain violation.
bool power_kernel(Complex base, Complex ex, bool euler_base, Complex& out) {
  if (euler_base) {
    out = ex.imag() == 0.0 ? Complex{std::exp(ex.real()), 0.0} : std::exp(ex);
    return true;
  }
  if (ex.imag() == 0.0) {
    const double n = ex.real();
    if (n == std::floor(n) && std::fabs(n) <= 1024.0) {
      if (n < 0 && base == Complex{}) return false;
      if (base.imag() == 0.0) {
        out = Complex{std::pow(base.real(), n), 0.0};
        return true;
      }
      out = integer_power(base, static_cast<long>(n));
      return true;
    }
    if (base.imag() == 0.0 && base.real() > 0.0) {
      out = Complex{std::pow(base.real(), n), 0.0};
      return true;
    }
  }
  if (base == Complex{}) {
    if (ex.real() > 0.0) {
      out = Complex{};
      return true;
    }
    return false;
  }
  out = std::exp(ex * std::log(base));
  return true;
}

// Returns false on a domain violation.
bool function_kernel(Function fn, Complex a, Complex& out) {
  const bool real = a.imag() == 0.0;
  const double x = a.real();
  switch (fn) {
    case Function::Sin: out = real ? Complex{std::sin(x)} : std::sin(a); return true;
    case Function::Cos: out = real ? Complex{std::cos(x)} : std::cos(a); return true;
    case Function::Tan: out = real ? Complex{std::tan(x)} : std::tan(a); return true;
    case Function::Atan: out = real ? Complex{std::atan(x)} : std::atan(a); return true;
    case Function::Exp: out = real ? Complex{std::exp(x)} : std::exp(a); return true;
    case Function::Ln:
      if (a == Complex{}) return false;
      out = (real && x > 0) ? Complex{std::log(x)} : std::log(a);
      return true;
    case Function::Sqrt: out = (real && x >= 0) ? Complex{std::sqrt(x)} : std::sqrt(a); return true;
    case Function::Sinh: out = real ? Complex{std::sinh(x)} : std::sinh(a); return true;
    case Function::Cosh: out = real ? Complex{std::cosh(x)} : std::cosh(a); return true;
    case Function::Tanh: out = real ? Complex{std::tanh(x)} : std::tanh(a); return true;
    case Function::Abs: out = Complex{std::abs(a)}; return true;
    case Function::Re: out = Complex{a.real()}; return true;
    case Function::Im: out = Complex{a.imag()}; return true;
    case Function::Conj: out = std::conj(a); return true;
  }
  return false;
}

bool finite(Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

bool is_euler(const Expr& e) { return e.is_constant() && e.node().name == "e"; }

}  // namespace

// ---------------------------------------------------------------------------
// Folding builders

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (a.is_constant() && b.is_constant()) return Expr(a.node().value + b.node().value);
  return Expr::make_binary(NodeKind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  if (a.is_constant() && b.is_constant()) return Expr(a.node().value - b.node().value);
  return Expr::make_binary(NodeKind::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant() && b.is_constant()) return Expr(a.node().value * b.node().value);
  return Expr::make_binary(NodeKind::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr(0.0);
  if (a.is_constant() && b.is_constant() && b.node().value != Complex{})
    return Expr(a.node().value / b.node().value);
  return Expr::make_binary(NodeKind::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.node().value);
  if (a.kind() == NodeKind::Negate) return a.node().children[0];
  return Expr::make_unary(NodeKind::Negate, a);
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_constant(0.0)) return Expr(1.0);
  if (exponent.is_constant(1.0)) return base;
  if (base.is_constant(1.0)) return Expr(1.0);
  if (base.is_constant() && exponent.is_constant()) {
    Complex out;
    if (power_kernel(base.node().value, exponent.node().value, is_euler(base), out) && finite(out))
      return Expr(out);
  }
  return Expr::make_binary(NodeKind::Pow, base, exponent);
}

Expr call(Function fn, const Expr& arg) {
  if (arg.is_constant() && fn != Function::Abs && fn != Function::Re && fn != Function::Im &&
      fn != Function::Conj) {
    Complex out;
    if (function_kernel(fn, arg.node().value, out) && finite(out)) return Expr(out);
  }
  return Expr::make_call(fn, arg);
}

Expr sin(const Expr& a) { return call(Function::Sin, a); }
Expr cos(const Expr& a) { return call(Function::Cos, a); }
Expr tan(const Expr& a) { return call(Function::Tan, a); }
Expr atan(const Expr& a) { return call(Function::Atan, a); }
Expr exp(const Expr& a) { return call(Function::Exp, a); }
Expr ln(const Expr& a) { return call(Function::Ln, a); }
Expr sqrt(const Expr& a) { return call(Function::Sqrt, a); }
Expr sinh(const Expr& a) { return call(Function::Sinh, a); }
Expr cosh(const Expr& a) { return call(Function::Cosh, a); }
Expr tanh(const Expr& a) { return call(Function::Tanh, a); }

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return true;
  const Node& x = a.node();
  const Node& y = b.node();
  if (x.kind != y.kind || x.children.size() != y.children.size()) return false;
  switch (x.kind) {
    case NodeKind::Constant:
      if (x.value != y.value || x.name != y.name) return false;
      break;
    case NodeKind::Variable:
      if (x.name != y.name) return false;
      break;
    case NodeKind::Call:
      if (x.fn != y.fn) return false;
      break;
    default:
      break;
  }
  for (std::size_t k = 0; k < x.children.size(); ++k)
    if (!structurally_equal(x.children[k], y.children[k])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) throw SyntaxError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::make_binary(NodeKind::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = Expr::make_binary(NodeKind::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::make_binary(NodeKind::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::make_binary(NodeKind::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::make_unary(NodeKind::Negate, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return Expr::make_binary(NodeKind::Pow, base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw SyntaxError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t from = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - from;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw SyntaxError("malformed number", start);
    // Scientific suffix only when digits follow, so that "2e" is not swallowed.
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        digits();
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    return Expr::constant(Complex{std::strtod(text.c_str(), nullptr), 0.0});
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      Function fn;
      if (!lookup_function(name, fn)) throw UnknownFunction(name, start);
      ++pos_;
      Expr arg = parse_sum();
      if (accept(',')) throw SyntaxError("function '" + name + "' takes one argument", pos_ - 1);
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return Expr::make_call(fn, arg);
    }
    if (is_reserved(name)) return Expr::symbol_constant(name);
    return Expr::variable(name);
  }
};

}  // namespace

Expr parse(std::string_view source) { return Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Rendering

namespace {

constexpr int kAtom = 5;

int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Negate: return 3;
    case NodeKind::Pow: return 4;
    default: return kAtom;
  }
}

void render_into(const Expr& e, std::string& out);

void render_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  render_into(e, out);
  if (wrap) out += ')';
}

void render_constant(const Node& n, std::string& out) {
  if (!n.name.empty()) {
    out += n.name;
    return;
  }
  const double re = n.value.real();
  const double im = n.value.imag();
  if (im == 0.0) {
    if (re >= 0.0 && !std::signbit(re)) {
      out += format_double(re);
    } else {
      out += "(-" + format_double(-re) + ")";
    }
    return;
  }
  out += "(";
  if (re != 0.0) out += format_double(re) + (im < 0 ? " - " : " + ");
  else if (im < 0) out += "-";
  out += format_double(std::fabs(im)) + "*i)";
}

void render_into(const Expr& e, std::string& out) {
  const Node& n = e.node();
  switch (n.kind) {
    case NodeKind::Constant: render_constant(n, out); return;
    case NodeKind::Variable: out += n.name; return;
    case NodeKind::Negate:
      out += '-';
      render_wrapped(n.children[0], precedence(n.children[0]) < 3, out);
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
      render_wrapped(n.children[0], precedence(n.children[0]) < 1, out);
      out += n.kind == NodeKind::Add ? " + " : " - ";
      render_wrapped(n.children[1], precedence(n.children[1]) <= 1, out);
      return;
    case NodeKind::Mul:
    case NodeKind::Div:
      render_wrapped(n.children[0], precedence(n.children[0]) < 2, out);
      out += n.kind == NodeKind::Mul ? "*" : "/";
      render_wrapped(n.children[1], precedence(n.children[1]) <= 2, out);
      return;
    case NodeKind::Pow:
      render_wrapped(n.children[0], precedence(n.children[0]) < kAtom, out);
      out += '^';
      render_wrapped(n.children[1], precedence(n.children[1]) < 3, out);
      return;
    case NodeKind::Call:
      out += function_name(n.fn);
      out += '(';
      render_into(n.children[0], out);
      out += ')';
      return;
  }
}

}  // namespace

std::string render(const Expr& e) {
  std::string out;
  render_into(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Queries

std::set<std::string> variables(const Expr& e) {
  std::set<std::string> names;
  std::unordered_set<const Node*> seen;
  std::vector<const Expr*> stack{&e};
  while (!stack.empty()) {
    const Expr* cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur->id()).second) continue;
    if (cur->kind() == NodeKind::Variable) names.insert(cur->node().name);
    for (const Expr& c : cur->node().children) stack.push_back(&c);
  }
  return names;
}

namespace {

class DependsMemo {
 public:
  explicit DependsMemo(std::string_view var) : var_(var) {}
  bool operator()(const Expr& e) {
    auto it = memo_.find(e.id());
    if (it != memo_.end()) return it->second;
    bool dep = e.is_variable(var_);
    for (const Expr& c : e.node().children) {
      if (dep) break;
      dep = (*this)(c);
    }
    memo_.emplace(e.id(), dep);
    return dep;
  }

 private:
  std::string_view var_;
  std::unordered_map<const Node*, bool> memo_;
};

}  // namespace

bool depends_on(const Expr& e, std::string_view var) { return DependsMemo(var)(e); }

std::size_t tree_size(const Expr& e) {
  std::unordered_map<const Node*, std::size_t> memo;
  auto rec = [&](auto&& self, const Expr& x) -> std::size_t {
    auto it = memo.find(x.id());
    if (it != memo.end()) return it->second;
    std::size_t total = 1;
    for (const Expr& c : x.node().children) {
      const std::size_t s = self(self, c);
      total = (total > std::numeric_limits<std::size_t>::max() - s) ? std::numeric_limits<std::size_t>::max()
                                                                     : total + s;
    }
    memo.emplace(x.id(), total);
    return total;
  };
  return rec(rec, e);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

class Differentiator {
 public:
  explicit Differentiator(std::string_view var) : var_(var), depends_(var) {}

  Expr operator()(const Expr& e) {
    if (!depends_(e)) return Expr(0.0);
    auto it = memo_.find(e.id());
    if (it != memo_.end()) return it->second;
    Expr d = compute(e);
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  std::string_view var_;
  DependsMemo depends_;
  std::unordered_map<const Node*, Expr> memo_;

  Expr compute(const Expr& e) {
    const Node& n = e.node();
    switch (n.kind) {
      case NodeKind::Constant: return Expr(0.0);
      case NodeKind::Variable: return Expr(1.0);
      case NodeKind::Negate: return -(*this)(n.children[0]);
      case NodeKind::Add: return (*this)(n.children[0]) + (*this)(n.children[1]);
      case NodeKind::Sub: return (*this)(n.children[0]) - (*this)(n.children[1]);
      case NodeKind::Mul: {
        const Expr& a = n.children[0];
        const Expr& b = n.children[1];
        return (*this)(a) * b + a * (*this)(b);
      }
      case NodeKind::Div: {
        const Expr& a = n.children[0];
        const Expr& b = n.children[1];
        const Expr db = (*this)(b);
        if (db.is_constant(0.0)) return (*this)(a) / b;
        return ((*this)(a) * b - a * db) / pow(b, Expr(2.0));
      }
      case NodeKind::Pow: {
        const Expr& a = n.children[0];
        const Expr& b = n.children[1];
        if (!depends_(b)) {
          const Expr reduced = b.is_constant() ? Expr(b.node().value - 1.0) : b - Expr(1.0);
          return b * pow(a, reduced) * (*this)(a);
        }
        if (!depends_(a)) {
          if (is_euler(a)) return e * (*this)(b);
          return e * ln(a) * (*this)(b);
        }
        return e * ((*this)(b) * ln(a) + b * (*this)(a) / a);
      }
      case NodeKind::Call: {
        const Expr& a = n.children[0];
        const Expr da = (*this)(a);
        switch (n.fn) {
          case Function::Sin: return cos(a) * da;
          case Function::Cos: return -sin(a) * da;
          case Function::Tan: return da / pow(cos(a), Expr(2.0));
          case Function::Atan: return da / (Expr(1.0) + pow(a, Expr(2.0)));
          case Function::Exp: return e * da;
          case Function::Ln: return da / a;
          case Function::Sqrt: return da / (Expr(2.0) * e);
          case Function::Sinh: return cosh(a) * da;
          case Function::Cosh: return sinh(a) * da;
          case Function::Tanh: return da / pow(cosh(a), Expr(2.0));
          case Function::Abs:
          case Function::Re:
          case Function::Im:
          case Function::Conj:
            throw NotDifferentiable(std::string(function_name(n.fn)) + " is not differentiable");
        }
      }
    }
    throw Error("corrupt expression node");
  }
};

}  // namespace

Expr diff(const Expr& e, std::string_view var) { return Differentiator(var)(e); }

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements) {
  std::unordered_map<const Node*, Expr> memo;
  auto rec = [&](auto&& self, const Expr& x) -> Expr {
    auto it = memo.find(x.id());
    if (it != memo.end()) return it->second;
    const Node& n = x.node();
    Expr out = x;
    switch (n.kind) {
      case NodeKind::Constant: break;
      case NodeKind::Variable: {
        auto r = replacements.find(n.name);
        if (r != replacements.end()) out = r->second;
        break;
      }
      case NodeKind::Negate: out = -self(self, n.children[0]); break;
      case NodeKind::Add: out = self(self, n.children[0]) + self(self, n.children[1]); break;
      case NodeKind::Sub: out = self(self, n.children[0]) - self(self, n.children[1]); break;
      case NodeKind::Mul: out = self(self, n.children[0]) * self(self, n.children[1]); break;
      case NodeKind::Div: out = self(self, n.children[0]) / self(self, n.children[1]); break;
      case NodeKind::Pow: out = pow(self(self, n.children[0]), self(self, n.children[1])); break;
      case NodeKind::Call: out = call(n.fn, self(self, n.children[0])); break;
    }
    memo.emplace(x.id(), out);
    return out;
  };
  return rec(rec, e);
}

// ---------------------------------------------------------------------------
// Evaluation

Complex Bindings::at(std::string_view name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw UnboundVariable(std::string(name));
  return it->second;
}

Program::Program(const Expr& e, std::span<const std::string> vars) : arity_(vars.size()), root_(e) {
  std::unordered_map<const Node*, int> index;
  auto emit = [&](auto&& self, const Expr& x) -> int {
    auto it = index.find(x.id());
    if (it != index.end()) return it->second;
    const Node& n = x.node();
    Instr ins;
    ins.kind = n.kind;
    ins.origin = x;
    switch (n.kind) {
      case NodeKind::Constant: ins.value = n.value; break;
      case NodeKind::Variable: {
        auto v = std::find(vars.begin(), vars.end(), n.name);
        if (v == vars.end()) throw UnboundVariable(n.name);
        ins.slot = static_cast<int>(v - vars.begin());
        break;
      }
      case NodeKind::Negate:
      case NodeKind::Call: ins.a = self(self, n.children[0]); ins.fn = n.fn; break;
      default:
        ins.a = self(self, n.children[0]);
        ins.b = self(self, n.children[1]);
        ins.euler_base = n.kind == NodeKind::Pow && is_euler(n.children[0]);
        break;
    }
    code_.push_back(ins);
    const int id = static_cast<int>(code_.size()) - 1;
    index.emplace(x.id(), id);
    return id;
  };
  emit(emit, e);
}

namespace {

[[noreturn]] void domain_failure(const char* what, const Expr& origin) {
  throw DomainError(what, render(origin));
}

}  // namespace

Complex Program::run(std::span<const Complex> args) const {
  if (args.size() != arity_) throw Error("program arity mismatch");
  thread_local std::vector<Complex> regs;
  regs.resize(code_.size());
  for (std::size_t k = 0; k < code_.size(); ++k) {
    const Instr& ins = code_[k];
    Complex r;
    switch (ins.kind) {
      case NodeKind::Constant: r = ins.value; break;
      case NodeKind::Variable: r = args[static_cast<std::size_t>(ins.slot)]; break;
      case NodeKind::Negate: r = -regs[ins.a]; break;
      case NodeKind::Add: r = regs[ins.a] + regs[ins.b]; break;
      case NodeKind::Sub: r = regs[ins.a] - regs[ins.b]; break;
      case NodeKind::Mul: {
        const Complex& x = regs[ins.a];
        const Complex& y = regs[ins.b];
        r = (x.imag() == 0.0 && y.imag() == 0.0) ? Complex{x.real() * y.real()} : x * y;
        break;
      }
      case NodeKind::Div: {
        const Complex& y = regs[ins.b];
        if (y == Complex{}) domain_failure("division by zero", ins.origin);
        const Complex& x = regs[ins.a];
        r = (x.imag() == 0.0 && y.imag() == 0.0) ? Complex{x.real() / y.real()} : x / y;
        break;
      }
      case NodeKind::Pow:
        if (!power_kernel(regs[ins.a], regs[ins.b], ins.euler_base, r))
          domain_failure("zero raised to a non-positive power", ins.origin);
        break;
      case NodeKind::Call:
        if (!function_kernel(ins.fn, regs[ins.a], r)) domain_failure("logarithm of zero", ins.origin);
        break;
    }
    if (!finite(r)) domain_failure("non-finite value", ins.origin);
    regs[k] = r;
  }
  return regs.back();
}

Complex Program::operator()(std::span<const Complex> args) const { return run(args); }

double Program::real(std::span<const double> args) const {
  thread_local std::vector<Complex> buf;
  buf.assign(args.begin(), args.end());
  const Complex v = run(buf);
  if (std::fabs(v.imag()) > 1e-12 * std::max(1.0, std::fabs(v.real())))
    throw DomainError("complex value in a real context", render(root_));
  return v.real();
}

ProgramSet::ProgramSet(std::span<const Expr> exprs, std::span<const std::string> vars) {
  programs_.reserve(exprs.size());
  for (const Expr& e : exprs) programs_.emplace_back(e, vars);
}

void ProgramSet::real(std::span<const double> args, std::span<double> out) const {
  for (std::size_t k = 0; k < programs_.size(); ++k) out[k] = programs_[k].real(args);
}

Complex eval(const Expr& e, const Bindings& b) {
  const std::set<std::string> names = variables(e);
  std::vector<std::string> vars(names.begin(), names.end());
  std::vector<Complex> args;
  args.reserve(vars.size());
  for (const auto& v : vars) args.push_back(b.at(v));
  return Program(e, vars)(args);
}

double require_real(Complex v, std::string_view context) {
  if (std::fabs(v.imag()) > 1e-12 * std::max(1.0, std::fabs(v.real())))
    throw DomainError("complex value in a real context", std::string(context));
  return v.real();
}

// ---------------------------------------------------------------------------
// Polynomial extraction

namespace {

std::vector<Complex> poly_mul(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  std::vector<Complex> out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<Complex> poly_add(std::vector<Complex> a, const std::vector<Complex>& b, double sign) {
  if (a.size() < b.size()) a.resize(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) a[j] += sign * b[j];
  return a;
}

bool poly_rec(const Expr& e, std::string_view var, std::vector<Complex>& out) {
  const Node& n = e.node();
  if (variables(e).empty()) {
    try {
      out = {eval(e, {})};
      return true;
    } catch (const Error&) {
      return false;
    }
  }
  std::vector<Complex> a, b;
  switch (n.kind) {
    case NodeKind::Variable:
      if (n.name != var) return false;
      out = {0.0, 1.0};
      return true;
    case NodeKind::Negate:
      if (!poly_rec(n.children[0], var, a)) return false;
      for (auto& c : a) c = -c;
      out = a;
      return true;
    case NodeKind::Add:
    case NodeKind::Sub:
      if (!poly_rec(n.children[0], var, a) || !poly_rec(n.children[1], var, b)) return false;
      out = poly_add(a, b, n.kind == NodeKind::Add ? 1.0 : -1.0);
      return true;
    case NodeKind::Mul:
      if (!poly_rec(n.children[0], var, a) || !poly_rec(n.children[1], var, b)) return false;
      out = poly_mul(a, b);
      return true;
    case NodeKind::Div:
      if (!poly_rec(n.children[0], var, a) || !poly_rec(n.children[1], var, b)) return false;
      if (b.size() != 1 || b[0] == Complex{}) return false;
      for (auto& c : a) c /= b[0];
      out = a;
      return true;
    case NodeKind::Pow: {
      if (!poly_rec(n.children[0], var, a) || !poly_rec(n.children[1], var, b)) return false;
      if (b.size() != 1 || b[0].imag() != 0.0) return false;
      const double k = b[0].real();
      if (k < 0 || k != std::floor(k) || k > 64) return false;
      out = {1.0};
      for (int j = 0; j < static_cast<int>(k); ++j) out = poly_mul(out, a);
      return true;
    }
    default: return false;
  }
}

}  // namespace

bool as_polynomial(const Expr& e, std::string_view var, std::vector<Complex>& coeffs) {
  std::vector<Complex> out;
  if (!poly_rec(e, var, out)) return false;
  while (out.size() > 1 && out.back() == Complex{}) out.pop_back();
  coeffs = std::move(out);
  return true;
}

}  // namespace intkit
