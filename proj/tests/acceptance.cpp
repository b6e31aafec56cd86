// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "intkit/btlax.hpp"
#include "intkit/charpde.hpp"
#include "intkit/cplx.hpp"
#include "intkit/flow.hpp"
#include "intkit/odekit.hpp"
#include "intkit/odesys.hpp"
#include "intkit/realfield.hpp"
#include "support/random_expr.hpp"

using namespace intkit;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex I(0, 1);

struct Outcome {
  bool pass = true;
  std::string detail;

  // records a measured value against its bound
  void bound(const char* what, double got, double tol) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s %.3g (<= %.3g)", detail.empty() ? "" : "; ", what, got, tol);
    detail += buf;
    if (!(got <= tol)) pass = false;
  }
  void require(const char* what, bool ok) {
    detail += (detail.empty() ? "" : "; ") + std::string(what) + (ok ? " ok" : " FAILED");
    if (!ok) pass = false;
  }
};

int failures = 0;

void criterion(int id, const char* name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + "exception: " + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

using odesys::Matrix;

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Expr X(const char* n) { return Expr::variable(n); }

// Symbolic u_xt - rhs(u) on a grid: an oracle that shares no code with the BT machinery.
double pde_xt_residual(const Expr& u, const Expr& rhs_of_u, const Region& r, std::size_t grid) {
  const Expr res = diff(diff(u, "x"), "t") - substitute(rhs_of_u, {{"u", u}});
  const Program p(res, r.variables);
  double worst = 0;
  for_each_grid_point(r, grid, [&](std::span<const double> q) { worst = std::max(worst, std::fabs(p.real(q))); });
  return worst;
}

}  // namespace

int main() {
  criterion(1, "contour identity", [](Outcome& o) {
    const Complex a(1, 2);
    double at_one = 0, others = 0;
    for (int k = -2; k <= 5; ++k) {
      const auto f = cplx::ComplexFunction::from_z(pow(X("z") - Expr(a), Expr(-static_cast<double>(k))));
      const Complex got = cplx::contour_integral(f, cplx::Contour::circle(a, 0.7), 256);
      if (k == 1)
        at_one = std::abs(got - 2 * kPi * I);
      else
        others = std::max(others, std::abs(got));
    }
    o.bound("|I_1 - 2 pi i|", at_one, 1e-12);
    o.bound("max_{k!=1} |I_k|", others, 1e-10);
  });

  criterion(2, "exact ODE constant", [](Outcome& o) {
    const Region r({"x", "y"}, {{-2, 2}, {-2, 2}});
    const auto sol = odekit::exact_solve(odekit::ExactODE::parse("x+y+1", "x-y^2+3"), 0, 1, r);
    o.bound("|C0 - 8/3|", std::fabs(sol.C0() - 8.0 / 3.0), 1e-9);
    o.bound("|u(0,0)|", std::fabs(sol.u(0, 0)), 1e-12);
  });

  criterion(3, "eigenvalues 5, -1", [](Outcome& o) {
    const auto e = odesys::eigen_solve(mat({{1, 2}, {4, 3}}));
    if (e.size() != 2) throw std::runtime_error("expected two eigenvalues");
    const auto& five = std::abs(e[0].value - 5.0) < std::abs(e[1].value - 5.0) ? e[0] : e[1];
    const auto& minus = &five == &e[0] ? e[1] : e[0];
    o.bound("|k1 - 5|", std::abs(five.value - 5.0), 1e-10);
    o.bound("|k2 + 1|", std::abs(minus.value + 1.0), 1e-10);
    o.bound("|beta/alpha - 2|", std::abs(five.eigenvectors[0](1) / five.eigenvectors[0](0) - 2.0), 1e-8);
    o.bound("|delta/gamma + 1|", std::abs(minus.eigenvectors[0](1) / minus.eigenvectors[0](0) + 1.0), 1e-8);
  });

  criterion(4, "double root k = 2", [](Outcome& o) {
    const Matrix a = mat({{1, -1}, {1, 3}});
    const auto e = odesys::eigen_solve(a);
    o.require("single cluster of multiplicity 2 at 2",
              e.size() == 1 && e[0].multiplicity == 2 && std::abs(e[0].value - 2.0) < 1e-10);
    std::vector<double> ts;
    for (int k = 0; k <= 20; ++k) ts.push_back(k / 20.0);
    const double x0[] = {1, -2};
    const auto s = odesys::linear_solve(a, x0, ts);
    o.bound("fit residual", s.fit_residual, 1e-8);
    // closed form (c1 + c2 t) e^(2t), c1 = c2 = 1
    double worst = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double t = ts[k];
      worst = std::max(worst, std::fabs(s.trajectory.states[k][0] - (1 + t) * std::exp(2 * t)));
      worst = std::max(worst, std::fabs(s.trajectory.states[k][1] + (2 + t) * std::exp(2 * t)));
    }
    o.bound("|x - closed form|", worst, 1e-8);
  });

  criterion(5, "matrix exponential", [](Outcome& o) {
    const Matrix gen = mat({{0, 1}, {-1, 0}});
    const Matrix q = odesys::matrix_exp(gen, kPi / 2);
    Matrix series = Matrix::Identity(2, 2), term = series;
    for (int k = 1; k <= 40; ++k) {
      term = term * (kPi / 2 * gen) / static_cast<double>(k);
      series += term;
    }
    o.bound("|e^(pi/2 A) - A|", max_abs(q - gen), 1e-12);
    o.bound("|e^(pi/2 A) - series40|", max_abs(q - series), 1e-12);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1), st(-2, 2);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      Matrix m(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
      const double s = st(rng), t = st(rng);
      worst = std::max(worst, max_abs(odesys::matrix_exp(m, s + t) - odesys::matrix_exp(m, s) * odesys::matrix_exp(m, t)));
    }
    o.bound("semigroup, 20 random 3x3", worst, 1e-10);
  });

  criterion(6, "first-integral drifts", [](Outcome& o) {
    using odesys::AutonomousSystem;
    const auto hyper = AutonomousSystem::parse({"x", "y"}, {"y", "x"});
    const auto rot = AutonomousSystem::parse({"x", "y"}, {"y", "-x"});
    const auto three = AutonomousSystem::parse({"x", "y", "z"}, {"y-z", "z-x", "x-y"});
    const double a[] = {1, 0.5}, p0[] = {1, 0}, q0[] = {1, 0.5, -0.3};
    struct Case {
      const char* phi;
      const AutonomousSystem* sys;
      const double* x0;
      std::size_t n;
      double period;
    };
    const Case cases[] = {{"(x+y)*e^(-t)", &hyper, a, 2, 0},     {"(x-y)*e^t", &hyper, a, 2, 0},
                          {"x^2+y^2", &rot, p0, 2, 0},            {"t+atan(y/x)", &rot, p0, 2, kPi},
                          {"x+y+z", &three, q0, 3, 0},            {"x^2+y^2+z^2", &three, q0, 3, 0}};
    double worst = 0;
    for (const auto& c : cases) {
      odesys::DriftOptions opt;
      opt.tol = 1e-7;
      opt.period = c.period;
      const auto r = odesys::first_integral_drift(parse(c.phi), *c.sys, {c.x0, c.n}, 10, 1e-3, opt);
      worst = std::max(worst, r.max_residual);
    }
    o.bound("max drift of 6 integrals, T=10", worst, 1e-7);
  });

  criterion(7, "Lie series", [](Outcome& o) {
    const double x0[] = {1, 0};
    const VectorField scaling({"x", "y"}, {X("x"), Expr(2.0)});
    const auto s = flow::lie_series_flow(scaling, x0, 0.5);
    o.bound("scaling", std::hypot(s.point[0] - std::exp(0.5), s.point[1] - 1.0), 1e-8);
    const auto r = flow::lie_series_flow(VectorField::parse({"x", "y"}, {"y", "-x"}), x0, 0.3);
    o.bound("rotation", std::max(std::fabs(r.point[0] - std::cos(0.3)), std::fabs(r.point[1] + std::sin(0.3))), 1e-9);
  });

  criterion(8, "harmonic conjugate of xy", [](Outcome& o) {
    const std::vector<double> base{0, 0};
    const auto h = cplx::harmonic_conjugate(parse("x*y"), base, Region({"x", "y"}, {{-1, 1}, {-1, 1}}));
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t j = 0; j < h.u.counts[1]; ++j)
      for (std::size_t i = 0; i < h.u.counts[0]; ++i) {
        const double x = h.u.coordinate(0, i), y = h.u.coordinate(1, j);
        const std::size_t idx[2] = {i, j};
        const double d = h.u.at(idx) - (x * x - y * y) / 2;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    o.bound("spread of u - (x^2-y^2)/2", hi - lo, 1e-8);
  });

  criterion(9, "antiderivative of z^2", [](Outcome& o) {
    const Complex want = Complex(1, -1) / 3.0;
    const Expr f = parse("z^2");
    const auto detour = cplx::Contour::general(Path::polyline({{-1, 0}, {-1, 1}, {0, 1}}));
    // unit-circle arc from -1 clockwise to i
    const Expr t = X("t");
    const auto arc = cplx::Contour::general(
        Path{{ParametricCurve({cos(t), sin(t)}, kPi / 2, kPi).reversed()}});
    double worst = std::abs(cplx::antiderivative_eval(f, -1, I) - want);
    worst = std::max(worst, std::abs(cplx::antiderivative_eval(f, -1, I, detour) - want));
    worst = std::max(worst, std::abs(cplx::antiderivative_eval(f, -1, I, arc) - want));
    o.bound("max over 3 paths", worst, 1e-11);
  });

  criterion(10, "Laurent 1/(z(z-1))", [](Outcome& o) {
    const Expr f = parse("1/(z*(z-1))");
    const auto a = cplx::laurent_coeffs(f, 0, 0.3, -3, 4);
    const auto b = cplx::laurent_coeffs(f, 0, 0.5, -3, 4);
    double oracle = 0, radius = 0;
    for (int n = -3; n <= 4; ++n) {
      const Complex want = n >= -1 ? -1.0 : 0.0;  // -1/z * sum z^k
      const auto k = static_cast<std::size_t>(n + 3);
      if (n >= -1 && n <= 1) oracle = std::max({oracle, std::abs(a[k] - want), std::abs(b[k] - want)});
      radius = std::max(radius, std::abs(a[k] - b[k]));
    }
    o.bound("a_-1, a_0, a_1 vs -1", oracle, 1e-10);
    o.bound("rho 0.3 vs 0.5", radius, 1e-9);
  });

  criterion(11, "energy method, constant F", [](Outcome& o) {
    // F = m a with m = 1: x = x0 + v0 t + a t^2 / 2
    struct Case {
      double a, v0;
    };
    double worst = 0;
    for (const Case c : {Case{2.0, 1.0}, Case{-2.0, -1.0}, Case{0.5, 3.0}, Case{-0.4, -2.0}}) {
      odekit::EnergyProblem p;
      p.force = Expr(c.a);
      p.v0 = c.v0;
      const odekit::EnergySolver s(p);
      for (int k = 1; k <= 20; ++k) {
        const double t = 0.1 * k;
        worst = std::max(worst, std::fabs(s.position_at(t) - (c.v0 * t + 0.5 * c.a * t * t)));
      }
    }
    o.bound("max |x(t) - closed form|, v0 > 0 and v0 < 0", worst, 1e-8);
  });

  criterion(12, "characteristics", [](Outcome& o) {
    using charpde::QuasilinearPDE;
    const Region r({"x", "y"}, {{-2, 2}, {-2, 2}});
    const Region pos({"x", "y"}, {{0.5, 2}, {0.5, 2}});
    const auto ex1 = QuasilinearPDE::parse("1", "1", "1");
    const auto ex2 = QuasilinearPDE::parse("-y", "x", "0");
    const auto ex3 = QuasilinearPDE::parse("x", "y", "z");
    double worst = 0;
    for (const char* z : {"x + sin(x-y)", "x + (x-y)^2"})
      worst = std::max(worst, charpde::pde_residual(ex1, parse(z), r, 1e-12).max_residual);
    for (const char* z : {"exp(-(x^2+y^2))", "cos(x^2+y^2)"})
      worst = std::max(worst, charpde::pde_residual(ex2, parse(z), r, 1e-12).max_residual);
    for (const char* z : {"x*cos(y/x)", "x*(y/x)^3"})
      worst = std::max(worst, charpde::pde_residual(ex3, parse(z), pos, 1e-12).max_residual);
    o.bound("pde_residual, 3 families x 2 F", worst, 1e-12);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<std::array<double, 2>> q;
    for (int k = 0; k < 50; ++k) q.push_back({u(rng), u(rng)});
    const auto sol = charpde::solve_cauchy(ex1, charpde::InitialCurve::parse("s", "0", "sin(s)", -3, 3), q);
    double err = 0;
    for (std::size_t k = 0; k < q.size(); ++k)
      err = std::max(err, std::fabs(sol.z[k] - (q[k][1] + std::sin(q[k][0] - q[k][1]))));
    o.bound("solve_cauchy vs y + sin(x-y), 50 points", err, 1e-6);
  });

  criterion(13, "sine-Gordon kink", [](Outcome& o) {
    const Region sq({"x", "t"}, {{-2, 2}, {-2, 2}});
    double pde = 0, bt = 0;
    for (double a : {0.5, 1.0, 2.0}) {
      const auto u = btlax::sine_gordon_kink(a);
      pde = std::max(pde, pde_xt_residual(u, sin(X("u")), sq, 41));
      bt = std::max(bt, btlax::bt_residual(btlax::sine_gordon_bt(a), u, Expr(0.0), sq, 1e-9, 41).max_residual);
    }
    o.bound("u_xt - sin u", pde, 1e-10);
    o.bound("BT with v = 0", bt, 1e-9);
  });

  criterion(14, "Liouville, C = 5", [](Outcome& o) {
    const Region sq({"x", "t"}, {{-2, 2}, {-2, 2}});
    const auto u = btlax::liouville_solution(5.0);
    o.bound("u_xt - e^u", pde_xt_residual(u, exp(X("u")), sq, 41), 1e-10);
    o.bound("BT with v = 0", btlax::bt_residual(btlax::liouville_bt(), u, Expr(0.0), sq, 1e-10, 41).max_residual,
            1e-10);
  });

  criterion(15, "Maxwell plane wave", [](Outcome& o) {
    const Region st({"x", "y", "z", "t"}, {{-1, 1}, {-1, 1}, {-1, 1}, {0, 2}});
    btlax::PlaneWaveSpec spec;
    const double n = 1 / std::sqrt(3.0);
    spec.k_dir = {n, n, n};
    spec.wavelength = 1.5;
    spec.e0 = 0.8;
    spec.alpha = 0.4;
    spec.eps0mu0 = 0.5;
    const auto w = btlax::maxwell_plane_wave(spec);
    const auto mr = btlax::maxwell_residual(w.E, w.B, w.eps0mu0, st, 1e-10, 5);
    o.require("625 samples", mr.samples_used == 625);
    o.bound("4 Maxwell residuals", mr.max_residual, 1e-10);

    const std::vector<std::string> vars{"x", "y", "z", "t"};
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3, 3);
    double ratio = 0;
    for (int k = 0; k < 100; ++k) {
      const double p[] = {u(rng), u(rng), u(rng), u(rng)};
      double e2 = 0, b2 = 0;
      for (int i = 0; i < 3; ++i) {
        e2 += std::pow(Program(w.E[i], vars).real(p), 2);
        b2 += std::pow(Program(w.B[i], vars).real(p), 2);
      }
      ratio = std::max(ratio, std::fabs(std::sqrt(e2) - w.c * std::sqrt(b2)));
    }
    o.bound("| |E| - c|B| |, 100 points", ratio, 1e-12);

    const Expr phase = Expr(w.k[0]) * X("x") + Expr(w.k[1]) * X("y") + Expr(w.k[2]) * X("z") -
                       Expr(1.1 * w.omega) * X("t") + Expr(w.alpha);
    const btlax::ExprVec3 detuned{Expr(w.e0[0]) * cos(phase), Expr(w.e0[1]) * cos(phase), Expr(w.e0[2]) * cos(phase)};
    const auto wr = btlax::wave_equation_residual(detuned, w.eps0mu0, st, 1e-10, 5);
    o.require("detuned omega fails the wave equation", !wr.passed);
  });

  criterion(16, "KdV Lax pair", [](Outcome& o) {
    const Region sq({"x", "t"}, {{-2, 2}, {-2, 2}});
    const auto u = btlax::kdv_soliton(1.0);
    o.bound("KdV residual", btlax::kdv_residual(u, sq, 1e-10).max_residual, 1e-10);
    btlax::LaxOptions a, b;
    a.dx = a.dt = 0.2;
    b.dx = b.dt = 0.1;
    const double d1 = btlax::lax_commuting_flow(u, a).deviation;
    const double d2 = btlax::lax_commuting_flow(u, b).deviation;
    o.bound("deviation at 0.2", d1, 1e-5);
    o.bound("1/shrink on halving", d2 / d1, 1.0 / 8);
    btlax::LaxOptions c;
    c.x0 = 1.0;
    const double dx = btlax::lax_commuting_flow(parse("x"), c).deviation;
    o.require("u = x deviation > 1e-2", dx > 1e-2);
  });

  criterion(17, "matrix identities", [](Outcome& o) {
    const Region sq({"x", "y"}, {{-1, 1}, {-1, 1}});
    double worst = 0;
    for (const char* m : {"1+x^2, y; 0, 1", "e^(x*y), 0; x, 1"})
      worst = std::max(worst, odesys::matrix_identity_check(odesys::parse_matrix(m), sq).max_residual);
    o.bound("identity residual, 2 matrices", worst, 1e-8);

    const Matrix a = mat({{0.2, 1, 0}, {-1, 0.1, 0.5}, {0.3, 0, -0.4}});
    const Matrix u0 = mat({{1, 2, 0}, {0, -1, 1}, {0.5, 0, 0}});
    auto residual = [&](double h) {
      const Matrix u = odesys::commutator_flow(a, u0, 0.6);
      const Matrix fd = (odesys::commutator_flow(a, u0, 0.6 + h) - odesys::commutator_flow(a, u0, 0.6 - h)) / (2 * h);
      return max_abs(fd - (u * a - a * u));
    };
    const double r = residual(2e-2) / residual(1e-2);
    o.bound("|order - 2| from residual ratio", std::fabs(std::log2(r) - 2), 0.1);
    o.bound("residual at h = 1e-3", residual(1e-3), 1e-5);
  });

  criterion(18, "property suites", [](Outcome& o) {
    using namespace realfield;
    const std::vector<std::string> xy{"x", "y"};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);

    const auto f = VectorField::parse(xy, {"sin(x*y) + y^2", "cos(x) - x*y^3"});
    const Expr t = X("t");
    double anti = 0;
    for (int k = 0; k < 20; ++k) {
      const ParametricCurve c({Expr(u(rng)) + Expr(u(rng)) * t + Expr(u(rng)) * sin(Expr(3.0) * t),
                               Expr(u(rng)) * t * t + Expr(u(rng)) * cos(t)},
                              0.0, 1.5);
      anti = std::max(anti, std::fabs(line_integral(f, c).value + line_integral(f, c.reversed()).value));
    }
    o.bound("orientation antisymmetry", anti, 1e-10);

    const std::vector<double> a{0, 0}, b{1, 1};
    const auto paths = standard_probe_paths(a, b);
    o.require("probe passes on (y, x)", path_independence_probe(VectorField::parse(xy, {"y", "x"}), a, b, paths, 1e-10).passed);
    o.require("probe fails on (y, -x)", !path_independence_probe(VectorField::parse(xy, {"y", "-x"}), a, b, paths, 1e-10).passed);

    const auto omega = VectorField::parse(xy, {"-y/(x^2+y^2)", "x/(x^2+y^2)"});
    double wind = 0;
    for (double r : {0.5, 1.0, 3.0})
      wind = std::max(wind, std::fabs(line_integral(omega, ParametricCurve::circle(0, 0, r)).value - 2 * kPi));
    o.bound("omega winding - 2 pi", wind, 1e-8);

    const auto sys = odesys::AutonomousSystem::parse(xy, {"y", "-x"});
    const double x0[] = {1, 0};
    auto err = [&](double h) {
      const auto end = odesys::integrate_rk4(sys, x0, 0, 2, h).final_state();
      return std::hypot(end[0] - std::cos(2.0), end[1] + std::sin(2.0));
    };
    o.bound("|RK4 order - 4|", std::fabs(std::log2(err(0.1) / err(0.05)) - 4), 0.2);

    const std::vector<std::string> vars{"x", "y", "z"};
    testing::RandomExprGen gen(vars, 2024);
    double diffmax = 0;
    for (int k = 0; k < 200; ++k) {
      const Expr e = gen(4);
      const Program p(e, vars);
      std::vector<double> q{u(rng), u(rng), u(rng)};
      for (std::size_t axis = 0; axis < 3; ++axis) {
        const double d = Program(diff(e, vars[axis]), vars).real(q);
        auto qp = q, qm = q;
        qp[axis] += 1e-6;
        qm[axis] -= 1e-6;
        const double fd = (p.real(qp) - p.real(qm)) / 2e-6;
        diffmax = std::max(diffmax, std::fabs(d - fd) / (1 + std::fabs(d)));
      }
    }
    o.bound("diff vs FD, 200 random expressions", diffmax, 1e-5);
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
