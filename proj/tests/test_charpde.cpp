#include <cmath>
#include <random>

#include "doctest.h"
#include "intkit/charpde.hpp"

using namespace intkit;
using namespace intkit::charpde;

namespace {

const QuasilinearPDE ex1 = QuasilinearPDE::parse("1", "1", "1");
const QuasilinearPDE ex2 = QuasilinearPDE::parse("-y", "x", "0");
const QuasilinearPDE ex3 = QuasilinearPDE::parse("x", "y", "z");

double eval_xyz(const std::string& src, std::span<const double> p) {
  const std::vector<std::string> names{"x", "y", "z"};
  return Program(parse(src), names).real(p);
}

}  // namespace

TEST_CASE("characteristic traces") {
  const auto line = characteristic_trace(ex1, {0, 0, 0}, 2.0, 0.01);
  for (const auto& p : line.states) {
    CHECK(std::fabs(p[0] - p[1]) <= 1e-13);
    CHECK(std::fabs(p[2] - p[0]) <= 1e-13);
  }
  CHECK(line.final_state()[0] == doctest::Approx(2.0));

  const auto circle = characteristic_trace(ex2, {1, 0, 5}, 2 * std::acos(-1.0), 1e-3);
  for (const auto& p : circle.states) {
    CHECK(std::fabs(p[0] * p[0] + p[1] * p[1] - 1) <= 1e-10);
    CHECK(p[2] == 5.0);
  }

  const auto none = characteristic_trace(ex3, {1, 2, 3}, 0.0);
  REQUIRE(none.size() == 1);
  CHECK(none.states[0] == std::vector<double>{1, 2, 3});

  CHECK_THROWS_AS(characteristic_trace(QuasilinearPDE::parse("x^2", "0", "0"), {1, 0, 0}, 2.0, 1e-3), NumericError);
}

TEST_CASE("solve_cauchy examples") {
  const auto a = solve_cauchy(ex1, InitialCurve::parse("s", "0", "sin(s)", -3, 3), {{1.0, 0.3}});
  CHECK(a.z[0] == doctest::Approx(0.3 + std::sin(0.7)).epsilon(1e-10));
  CHECK(a.t[0] == doctest::Approx(0.3));

  const auto b = solve_cauchy(ex2, InitialCurve::parse("s", "0", "s^2", 0.1, 3), {{0.6, 0.8}});
  CHECK(b.z[0] == doctest::Approx(1.0).epsilon(1e-8));

  const auto c = solve_cauchy(ex3, InitialCurve::parse("s", "1", "s", 0.2, 4), {{2.0, 2.0}});
  CHECK(c.z[0] == doctest::Approx(2.0).epsilon(1e-8));

  // data along a characteristic
  CHECK_THROWS_AS(solve_cauchy(ex1, InitialCurve::parse("s", "s", "0", 0, 1), {{0.5, 0.2}}), PreconditionError);
  // unreachable: the characteristics of ex2 from s in [0.1, 3] never reach r > 3
  CHECK_THROWS_AS(solve_cauchy(ex2, InitialCurve::parse("s", "0", "s^2", 0.1, 3), {{5.0, 1.0}}), ConvergenceError);
}

TEST_CASE("pde residuals of the solution families") {
  const Region r({"x", "y"}, {{-2, 2}, {-2, 2}});
  const Region pos({"x", "y"}, {{0.5, 2}, {0.5, 2}});
  CHECK(pde_residual(ex1, parse("x + sin(x-y) - (x-y)"), r, 1e-12).passed);
  CHECK(pde_residual(ex1, parse("x + (x-y)^2"), r, 1e-12).passed);
  CHECK(pde_residual(ex1, parse("x"), r).max_residual == 0.0);
  CHECK(pde_residual(ex2, parse("x^2+y^2"), r).max_residual == 0.0);
  CHECK(pde_residual(ex2, parse("exp(-(x^2+y^2))"), r, 1e-12).passed);
  CHECK(pde_residual(ex3, parse("x*cos(x/y)"), pos, 1e-12).passed);
  CHECK(pde_residual(ex3, parse("x*(x/y)^3"), pos, 1e-12).passed);
  CHECK_FALSE(pde_residual(ex1, parse("x*y"), r).passed);
  CHECK_THROWS_AS(pde_residual(ex1, parse("x"), Region({"u", "v"}, {{0, 1}, {0, 1}})), PreconditionError);
}

TEST_CASE("homogeneous solutions are compositions of first integrals") {
  const Region r({"x", "y"}, {{-1.5, 1.5}, {-1.5, 1.5}});
  CHECK(homogeneous_solution_check(ex2, parse("x^2+y^2"), parse("w^3"), r).passed);
  const auto transport = QuasilinearPDE::parse("1", "1", "0");
  CHECK(homogeneous_solution_check(transport, parse("x-y"), parse("exp(w)"), r).passed);
  CHECK_FALSE(homogeneous_solution_check(ex2, parse("x"), parse("w"), r).passed);
  CHECK_THROWS_AS(homogeneous_solution_check(ex1, parse("x-y"), parse("w"), r), PreconditionError);
  CHECK_FALSE(QuasilinearPDE::parse("z", "1", "0").homogeneous_linear());
}

TEST_CASE("normal surfaces") {
  const Region cube({"x", "y", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}});
  CHECK(normal_surface_check(VectorField::parse({"x", "y", "z"}, {"x", "y", "z"}), parse("(x^2+y^2+z^2)/2"), cube).passed);
  const auto coulomb = VectorField::parse({"x", "y", "z"}, {"x/(x^2+y^2+z^2)^(3/2)", "y/(x^2+y^2+z^2)^(3/2)",
                                                            "z/(x^2+y^2+z^2)^(3/2)"});
  const Region shell({"x", "y", "z"}, {{0.5, 1.1}, {0.5, 1.1}, {0.5, 1.1}});
  CHECK(normal_surface_check(coulomb, parse("-1/sqrt(x^2+y^2+z^2)"), shell).passed);
  CHECK_FALSE(normal_surface_check(coulomb, parse("1/sqrt(x^2+y^2+z^2)"), shell).passed);
  CHECK_THROWS_AS(normal_surface_check(VectorField::parse({"x", "y", "z"}, {"y", "-x", "0"}), parse("x"), cube),
                  PreconditionError);
}

TEST_CASE("property: first integrals are constant along characteristics") {
  struct Case {
    const QuasilinearPDE* pde;
    std::array<double, 3> start;
    const char* psi1;
    const char* psi2;
  };
  const Case cases[] = {{&ex1, {0.3, -0.5, 1.2}, "x-y", "z-x"},
                        {&ex2, {0.8, 0.4, -2}, "z", "x^2+y^2"},
                        {&ex3, {0.7, 1.3, 0.9}, "x/y", "z/x"}};
  for (const auto& c : cases) {
    const auto tr = characteristic_trace(*c.pde, c.start, 2.0, 1e-3);
    const double a0 = eval_xyz(c.psi1, c.start), b0 = eval_xyz(c.psi2, c.start);
    for (const auto& p : tr.states) {
      CHECK(std::fabs(eval_xyz(c.psi1, p) - a0) <= 1e-8);
      CHECK(std::fabs(eval_xyz(c.psi2, p) - b0) <= 1e-8);
    }
  }
}

TEST_CASE("property: solve_cauchy output satisfies the PDE by finite differences") {
  const auto ic = InitialCurve::parse("s", "1", "s", 0.2, 4);
  const double h = 1e-3;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.8, 2.5);
  for (int k = 0; k < 5; ++k) {
    const double x = u(rng), y = u(rng);
    const auto sol = solve_cauchy(ex3, ic, {{x, y}, {x + h, y}, {x - h, y}, {x, y + h}, {x, y - h}});
    const double zx = (sol.z[1] - sol.z[2]) / (2 * h), zy = (sol.z[3] - sol.z[4]) / (2 * h);
    CHECK(std::fabs(x * zx + y * zy - sol.z[0]) <= 1e-4);
  }
}

TEST_CASE("property: characteristics stay on solution surfaces") {
  const Region r({"x", "y"}, {{-2, 2}, {-2, 2}});
  const auto f = parse("y + sin(x-y)");
  REQUIRE(pde_residual(ex1, f, r, 1e-12).passed);
  const std::vector<std::string> xy{"x", "y"};
  const Program fp(f, xy);
  for (double x0 : {-1.0, 0.2, 1.4}) {
    const double p0[] = {x0, 0.5};
    const auto tr = characteristic_trace(ex1, {x0, 0.5, fp.real(p0)}, 1.0, 1e-3);
    for (const auto& p : tr.states) CHECK(std::fabs(fp.real(std::span<const double>(p.data(), 2)) - p[2]) <= 1e-6);
  }
}
