#pragma once

// Random smooth expressions for property tests.

#include <random>
#include <string>
#include <vector>

#include "intkit/expr.hpp"

namespace intkit::testing {

class RandomExprGen {
 public:
  RandomExprGen(std::vector<std::string> vars, std::uint64_t seed) : vars_(std::move(vars)), rng_(seed) {}

  Expr operator()(int depth = 4) { return build(depth); }

 private:
  std::vector<std::string> vars_;
  std::mt19937_64 rng_;

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  double coeff() { return std::uniform_real_distribution<double>(-2.0, 2.0)(rng_); }

  Expr leaf() {
    if (pick(3) == 0) return Expr(coeff());
    return Expr::variable(vars_[static_cast<std::size_t>(pick(static_cast<int>(vars_.size())))]);
  }

  Expr build(int depth) {
    if (depth <= 0) return leaf();
    const Expr a = build(depth - 1);
    switch (pick(11)) {
      case 0: return Expr::make_binary(NodeKind::Add, a, build(depth - 1));
      case 1: return Expr::make_binary(NodeKind::Sub, a, build(depth - 1));
      case 2: return Expr::make_binary(NodeKind::Mul, a, build(depth - 1));
      // bounded-away-from-zero denominators keep partials bounded
      case 3:
        return Expr::make_binary(NodeKind::Div, a,
                                 Expr::make_binary(NodeKind::Add, Expr(2.5),
                                                   Expr::make_call(Function::Sin, build(depth - 1))));
      case 4: return Expr::make_binary(NodeKind::Pow, a, Expr(static_cast<double>(2 + pick(2))));
      case 5: return Expr::make_call(Function::Sin, a);
      case 6: return Expr::make_call(Function::Cos, a);
      case 7: return Expr::make_call(Function::Atan, a);
      case 8: return Expr::make_call(Function::Exp, Expr::make_call(Function::Tanh, a));
      case 9: return Expr::make_call(Function::Sqrt, Expr::make_binary(NodeKind::Add, Expr(1.0),
                                                                         Expr::make_binary(NodeKind::Pow, a, Expr(2.0))));
      default: return Expr::make_unary(NodeKind::Negate, a);
    }
  }
};

}  // namespace intkit::testing
