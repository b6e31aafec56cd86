#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "intkit/expr.hpp"
#include "support/random_expr.hpp"

using namespace intkit;

namespace {

double re(const std::string& src, const Bindings& b) { return eval(parse(src), b).real(); }

double central_difference(const Expr& e, const std::vector<std::string>& vars, std::vector<double> p,
                          std::size_t axis, double h) {
  Program prog(e, vars);
  p[axis] += h;
  const double fwd = prog.real(p);
  p[axis] -= 2 * h;
  const double bwd = prog.real(p);
  return (fwd - bwd) / (2 * h);
}

}  // namespace

TEST_CASE("parse builds the grammar's tree shape") {
  const Expr e = parse("x + e^y");
  REQUIRE(e.kind() == NodeKind::Add);
  CHECK(e.node().children[0].is_variable("x"));
  const Expr& p = e.node().children[1];
  REQUIRE(p.kind() == NodeKind::Pow);
  CHECK(p.node().children[0].is_constant());
  CHECK(p.node().children[0].node().name == "e");
  CHECK(p.node().children[1].is_variable("y"));
}

TEST_CASE("precedence and associativity") {
  CHECK(re("-x^2", {{"x", 3}}) == doctest::Approx(-9));
  CHECK(re("2^3^2", {}) == doctest::Approx(512));
  CHECK(re("8/2/2", {}) == doctest::Approx(2));
  CHECK(re("1-2-3", {}) == doctest::Approx(-4));
  CHECK(re("2*-3", {}) == doctest::Approx(-6));
  CHECK(re("2^-1", {}) == doctest::Approx(0.5));
  CHECK(re("1.5e2 + 2", {}) == doctest::Approx(152));
  CHECK(eval(parse("i*i"), {}) == Complex(-1, 0));
  CHECK(re("pi", {}) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("worked formula components evaluate") {
  CHECK(re("(x+y+z)*(1)", {{"x", 1}, {"y", 1}, {"z", 1}}) == 3);
  CHECK(re("-y/(x^2+y^2)", {{"x", 0}, {"y", 1}}) == -1);
  CHECK(re("x*y", {{"x", 2}, {"y", 3}}) == 6);
  CHECK(re("x^2/2 + x*e^y - y^2", {{"x", 0}, {"y", 1}}) == -1);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(eval(parse("1/(z-2)"), {{"z", 2}}), DomainError);
  CHECK_THROWS_AS(eval(parse("ln(x)"), {{"x", 0}}), DomainError);
  CHECK_THROWS_AS(eval(parse("x + y"), {{"x", 1}}), UnboundVariable);
  try {
    eval(parse("3 + 1/(z-2)"), {{"z", 2}});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.subtree() == "1/(z - 2)");
  }
}

TEST_CASE("syntax errors carry offsets") {
  try {
    parse("x + * y");
    FAIL("expected syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse("foo(x)"), UnknownFunction);
  CHECK_THROWS_AS(parse("(x + 1"), SyntaxError);
  CHECK_THROWS_AS(parse("sin(x, y)"), SyntaxError);
  CHECK_THROWS_AS(parse(""), SyntaxError);
}

TEST_CASE("diff examples") {
  const Expr d = diff(parse("x + e^y"), "y");
  CHECK(re(render(d), {{"y", 0.7}}) == doctest::Approx(std::exp(0.7)));
  CHECK(variables(d) == std::set<std::string>{"y"});
  CHECK(diff(parse("c"), "x").is_constant(0.0));
  CHECK(diff(parse("sin(y)"), "x").is_constant(0.0));
  CHECK_THROWS_AS(diff(parse("abs(x)"), "x"), NotDifferentiable);
  // non-differentiable functions are fine when they do not involve the variable
  CHECK(diff(parse("abs(y)*x"), "x").kind() == NodeKind::Call);
}

TEST_CASE("mixed partials of x^2*y^3 agree at 100 random points") {
  const Expr e = parse("x^2*y^3");
  const Expr xy = diff(diff(e, "x"), "y");
  const Expr yx = diff(diff(e, "y"), "x");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  const std::vector<std::string> vars{"x", "y"};
  const Expr f_y = diff(e, "y");
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> p{u(rng), u(rng)};
    const double a = Program(xy, vars).real(p);
    const double b = Program(yx, vars).real(p);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    // finite-difference oracle: d/dx of the symbolic d/dy
    CHECK(std::fabs(a - central_difference(f_y, vars, p, 0, 1e-5)) <= 1e-6 * (1 + std::fabs(a)));
  }
}

TEST_CASE("property: symbolic derivative matches central differences") {
  const std::vector<std::string> vars{"x", "y", "z"};
  testing::RandomExprGen gen(vars, 2024);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    const Expr e = gen(4);
    const std::vector<double> p{u(rng), u(rng), u(rng)};
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const double d = Program(diff(e, vars[axis]), vars).real(p);
      const double fd = central_difference(e, vars, p, axis, 1e-6);
      CHECK_MESSAGE(std::fabs(d - fd) <= 1e-5 * (1 + std::fabs(d)), render(e));
      ++checked;
    }
  }
  CHECK(checked == 600);
}

TEST_CASE("property: mixed-partial symmetry for random smooth expressions") {
  const std::vector<std::string> vars{"x", "y"};
  testing::RandomExprGen gen(vars, 31337);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 100; ++k) {
    const Expr e = gen(3);
    const std::vector<double> p{u(rng), u(rng)};
    const double a = Program(diff(diff(e, "x"), "y"), vars).real(p);
    const double b = Program(diff(diff(e, "y"), "x"), vars).real(p);
    CHECK_MESSAGE(std::fabs(a - b) <= 1e-9 * (1 + std::fabs(a)), render(e));
  }
}

TEST_CASE("property: render/parse fixpoint") {
  testing::RandomExprGen gen({"x", "y", "u_x"}, 11);
  for (int k = 0; k < 200; ++k) {
    const Expr e = parse(render(gen(4)));
    const Expr again = parse(render(e));
    CHECK_MESSAGE(structurally_equal(e, again), render(e));
  }
  for (const char* s : {"x + e^y", "-x^2", "(-x)^2", "a-(b-c)", "a/(b*c)", "-(a*b)", "2^-x", "(a^b)^c",
                        "--x", "sin(-x)*cos(x)^2", "1e-05*x", "x - -y"}) {
    const Expr e = parse(s);
    CHECK_MESSAGE(structurally_equal(e, parse(render(e))), s);
  }
}

TEST_CASE("substitution and tree size") {
  const Expr e = parse("y*y1");
  const Expr s = substitute(e, {{"y", parse("x^2")}, {"y1", parse("2*x")}});
  CHECK(re(render(s), {{"x", 3}}) == doctest::Approx(54));
  CHECK(tree_size(parse("x + y")) == 3);
}

TEST_CASE("polynomial extraction") {
  std::vector<Complex> c;
  REQUIRE(as_polynomial(parse("3*x^2 - x/2 + 1"), "x", c));
  REQUIRE(c.size() == 3);
  CHECK(c[0].real() == 1);
  CHECK(c[1].real() == -0.5);
  CHECK(c[2].real() == 3);
  CHECK_FALSE(as_polynomial(parse("sin(x)"), "x", c));
  CHECK_FALSE(as_polynomial(parse("1/x"), "x", c));
}

TEST_CASE("real context rejects complex results") {
  const std::vector<std::string> vars{"x"};
  const double p[1] = {-4};
  CHECK_THROWS_AS(Program(parse("sqrt(x)"), vars).real(p), DomainError);
  CHECK(Program(parse("x^2"), vars).real(p) == 16);
}
