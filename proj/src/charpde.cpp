#include "intkit/charpde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "intkit/realfield.hpp"

namespace intkit::charpde {

namespace {

constexpr double kBlowUp = 1e12;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

RhsFunction characteristic_rhs(const QuasilinearPDE& pde) {
  const std::vector<Expr> comps{pde.P, pde.Q, pde.R};
  auto progs = std::make_shared<ProgramSet>(comps, pde.names());
  return [progs](double, std::span<const double> x, std::span<double> dx) { progs->real(x, dx); };
}

class CharacteristicMap {
 public:
  CharacteristicMap(const QuasilinearPDE& pde, const InitialCurve& ic, double h)
      : rhs_(characteristic_rhs(pde)), h_(h) {
    const std::vector<std::string> s{ic.parameter};
    const std::vector<Expr> data{ic.x0, ic.y0, ic.z0, diff(ic.x0, ic.parameter), diff(ic.y0, ic.parameter)};
    curve_ = ProgramSet(data, s);
    const std::vector<Expr> pq{pde.P, pde.Q};
    pq_ = ProgramSet(pq, pde.names());
  }

  /// (x0, y0, z0, x0', y0') at s.
  std::array<double, 5> data(double s) const {
    std::array<double, 5> out{};
    const double arg[1] = {s};
    curve_.real(arg, out);
    return out;
  }

  std::array<double, 2> pq(std::span<const double> p) const {
    std::array<double, 2> out{};
    pq_.real(p, out);
    return out;
  }

  std::vector<double> operator()(double s, double t) const {
    const auto d = data(s);
    std::vector<double> start{d[0], d[1], d[2]};
    if (t == 0.0) return start;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(std::fabs(t) / h_)));
    return rk4_endpoint(rhs_, 0.0, start, t, steps, kBlowUp);
  }

  const RhsFunction& rhs() const { return rhs_; }

 private:
  RhsFunction rhs_;
  double h_;
  ProgramSet curve_, pq_;
};

struct FanSample {
  double x, y, s, t;
};

std::vector<FanSample> build_fan(const CharacteristicMap& map, const InitialCurve& ic, double t_max) {
  constexpr int kS = 21, kT = 41;
  constexpr int kHalf = (kT - 1) / 2;
  constexpr std::size_t kSub = 5;
  std::vector<FanSample> fan;
  for (int i = 0; i < kS; ++i) {
    const double s = ic.s_a + (ic.s_b - ic.s_a) * i / (kS - 1);
    const auto d = map.data(s);
    fan.push_back({d[0], d[1], s, 0.0});
    for (double dir : {1.0, -1.0}) {
      std::vector<double> x{d[0], d[1], d[2]};
      double t = 0.0;
      for (int j = 1; j <= kHalf; ++j) {
        const double next = dir * t_max * j / kHalf;
        try {
          x = rk4_endpoint(map.rhs(), t, x, next, kSub, kBlowUp);
        } catch (const Error&) {
          break;  // the fan ends where the characteristic leaves the domain
        }
        t = next;
        fan.push_back({x[0], x[1], s, t});
      }
    }
  }
  return fan;
}

std::string fmt_query(const std::array<double, 2>& q) { return "(" + fmt(q[0]) + ", " + fmt(q[1]) + ")"; }

}  // namespace

QuasilinearPDE QuasilinearPDE::parse(std::string_view p, std::string_view q, std::string_view r) {
  QuasilinearPDE pde;
  pde.P = intkit::parse(p);
  pde.Q = intkit::parse(q);
  pde.R = intkit::parse(r);
  return pde;
}

bool QuasilinearPDE::homogeneous_linear() const {
  return R.is_constant(0.0) && !depends_on(P, z) && !depends_on(Q, z);
}

InitialCurve InitialCurve::parse(std::string_view x0, std::string_view y0, std::string_view z0, double s_a,
                                 double s_b, std::string parameter) {
  InitialCurve ic;
  ic.parameter = std::move(parameter);
  ic.x0 = intkit::parse(x0);
  ic.y0 = intkit::parse(y0);
  ic.z0 = intkit::parse(z0);
  ic.s_a = s_a;
  ic.s_b = s_b;
  return ic;
}

Trajectory characteristic_trace(const QuasilinearPDE& pde, const std::array<double, 3>& start, double t_end,
                                double h) {
  if (t_end == 0.0) {
    Trajectory tr;
    tr.method = "rk4";
    tr.step = h;
    tr.times.push_back(0.0);
    tr.states.emplace_back(start.begin(), start.end());
    return tr;
  }
  return rk4_integrate(characteristic_rhs(pde), 0.0, start, t_end, h, kBlowUp);
}

CauchySolution solve_cauchy(const QuasilinearPDE& pde, const InitialCurve& ic,
                            const std::vector<std::array<double, 2>>& queries, const CauchyOptions& opts) {
  if (!(ic.s_b > ic.s_a)) throw PreconditionError("initial curve interval is empty");
  if (!(opts.h > 0) || !(opts.t_max > 0)) throw PreconditionError("step and T_max must be positive");
  const CharacteristicMap map(pde, ic, opts.h);

  // transversality: P y0' - Q x0' must stay away from 0 on the data
  constexpr int kTransversal = 33;
  for (int k = 0; k < kTransversal; ++k) {
    const double s = ic.s_a + (ic.s_b - ic.s_a) * k / (kTransversal - 1);
    const auto d = map.data(s);
    const auto pq = map.pq(std::span<const double>(d.data(), 3));
    const double j = pq[0] * d[4] - pq[1] * d[3];
    if (!(std::fabs(j) >= 1e-8))
      throw PreconditionError("initial curve is characteristic (P y0' - Q x0' = " + fmt(j) + ") at s = " + fmt(s));
  }

  const auto fan = build_fan(map, ic, opts.t_max);
  const double ds = 1e-6 * std::max(1.0, ic.s_b - ic.s_a);
  CauchySolution out;
  for (const auto& q : queries) {
    const FanSample* best = &fan.front();
    double best_d = INFINITY;
    for (const auto& f : fan) {
      const double d = std::hypot(f.x - q[0], f.y - q[1]);
      if (d < best_d) {
        best_d = d;
        best = &f;
      }
    }
    double s = best->s, t = best->t;
    auto misfit = [&](const std::vector<double>& p) { return std::hypot(p[0] - q[0], p[1] - q[1]); };
    std::vector<double> p = map(s, t);
    double r = misfit(p);
    int it = 0;
    const double goal = opts.newton_tol * (1.0 + std::hypot(q[0], q[1]));
    for (; r > goal; ++it) {
      if (it == opts.max_iterations)
        throw ConvergenceError("characteristic Newton did not converge for query " + fmt_query(q) +
                               " (outside the characteristic fan?)");
      const auto pq = map.pq(p);
      const auto plus = map(s + ds, t), minus = map(s - ds, t);
      const double xs = (plus[0] - minus[0]) / (2 * ds), ys = (plus[1] - minus[1]) / (2 * ds);
      const double det = xs * pq[1] - ys * pq[0];
      if (!(std::fabs(det) > 1e-14))
        throw ConvergenceError("characteristic map is singular near query " + fmt_query(q));
      const double fx = p[0] - q[0], fy = p[1] - q[1];
      const double step_s = -(pq[1] * fx - pq[0] * fy) / det;
      const double step_t = -(-ys * fx + xs * fy) / det;
      double lambda = 1.0;
      for (int halving = 0;; ++halving) {
        const double s2 = s + lambda * step_s, t2 = t + lambda * step_t;
        std::vector<double> p2;
        bool ok = std::fabs(t2) <= 2 * opts.t_max;
        if (ok) {
          try {
            p2 = map(s2, t2);
          } catch (const Error&) {
            ok = false;
          }
        }
        if (ok && (misfit(p2) < r || halving == 30)) {
          s = s2;
          t = t2;
          p = std::move(p2);
          r = misfit(p);
          break;
        }
        if (halving == 30)
          throw ConvergenceError("characteristic Newton stalled for query " + fmt_query(q));
        lambda *= 0.5;
      }
    }
    const double slack = 1e-9 * (ic.s_b - ic.s_a);
    if (s < ic.s_a - slack || s > ic.s_b + slack)
      throw ConvergenceError("query " + fmt_query(q) + " lies outside the characteristic fan (s = " + fmt(s) +
                             " is off the initial curve)");
    if (std::fabs(t) > opts.t_max)
      throw ConvergenceError("query " + fmt_query(q) + " needs |t| = " + fmt(std::fabs(t)) + " > T_max");
    out.z.push_back(p[2]);
    out.s.push_back(s);
    out.t.push_back(t);
    out.iterations.push_back(it);
    out.max_xy_residual = std::max(out.max_xy_residual, r);
  }
  return out;
}

CheckReport pde_residual(const QuasilinearPDE& pde, const Expr& z, const Region& region, double tol,
                         std::size_t grid) {
  if (region.dimension() != 2 || region.variables[0] != pde.x || region.variables[1] != pde.y)
    throw PreconditionError("region must be over (" + pde.x + ", " + pde.y + ")");
  const std::map<std::string, Expr, std::less<>> sub{{pde.z, z}};
  const Expr residual = substitute(pde.P, sub) * diff(z, pde.x) + substitute(pde.Q, sub) * diff(z, pde.y) -
                        substitute(pde.R, sub);
  const Program prog(residual, region.variables);
  ResidualTracker tracker;
  for_each_grid_point(region, grid, [&](std::span<const double> p) { tracker.observe(std::fabs(prog.real(p)), p); });
  return tracker.report(tol);
}

CheckReport homogeneous_solution_check(const QuasilinearPDE& pde, const Expr& psi, const Expr& g,
                                       const Region& region, double tol, std::size_t grid, std::string_view w) {
  if (!pde.homogeneous_linear()) throw PreconditionError("PDE is not homogeneous linear (needs R = 0, P and Q free of z)");
  const std::map<std::string, Expr, std::less<>> sub{{std::string(w), psi}};
  return pde_residual(pde, substitute(g, sub), region, tol, grid);
}

CheckReport normal_surface_check(const VectorField& v, const Expr& u, const Region& region, double tol,
                                 std::size_t grid) {
  if (v.dimension() != 3) throw PreconditionError("normal-surface check needs a field on R^3");
  const CheckReport curl = realfield::exactness_check(v, region, grid, tol);
  if (!curl.passed) {
    std::ostringstream os;
    os.precision(6);
    os << "field is not a potential field: curl residual " << curl.max_residual << " exceeds " << tol;
    throw PreconditionError(os.str());
  }
  std::vector<Expr> exprs;
  for (std::size_t i = 0; i < 3; ++i) exprs.push_back(diff(u, v.variables[i]) - v.components[i]);
  const ProgramSet progs(exprs, v.variables);
  ResidualTracker tracker;
  double out[3];
  for_each_grid_point(region, grid, [&](std::span<const double> p) {
    progs.real(p, out);
    tracker.observe(std::max({std::fabs(out[0]), std::fabs(out[1]), std::fabs(out[2])}), p);
  });
  return tracker.report(tol);
}

}  // namespace intkit::charpde
