#include "intkit/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <Eigen/Dense>

namespace intkit::flow {

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::isfinite(x) ? std::fabs(x) : INFINITY);
  return m;
}

std::string fmt_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
  os << ')';
  return os.str();
}

// Distinct nodes of the DAG; compiled programs evaluate shared subtrees once.
std::size_t dag_size(const Expr& root) {
  std::unordered_set<const Node*> seen;
  std::vector<const Expr*> stack{&root};
  while (!stack.empty()) {
    const Expr* e = stack.back();
    stack.pop_back();
    if (!seen.insert(e->id()).second) continue;
    for (const auto& c : e->node().children) stack.push_back(&c);
  }
  return seen.size();
}

void require_dimension(const VectorField& v, std::span<const double> x) {
  if (x.size() != v.dimension()) throw PreconditionError("point has the wrong dimension");
}

}  // namespace

Expr lie_derivative_expr(const VectorField& v, const Expr& f) {
  Expr s = 0.0;
  for (std::size_t i = 0; i < v.dimension(); ++i) s = s + v.components[i] * diff(f, v.variables[i]);
  return s;
}

double lie_derivative(const VectorField& v, const Expr& f, std::span<const double> p) {
  require_dimension(v, p);
  return Program(lie_derivative_expr(v, f), v.variables).real(p);
}

LieSeries::LieSeries(VectorField v, LieSeriesConfig cfg) : v_(std::move(v)), cfg_(cfg) {
  if (cfg_.order < 1 || cfg_.order > 12) throw PreconditionError("Lie series order must be between 1 and 12");
  std::vector<Expr> level;
  for (const auto& name : v_.variables) level.push_back(Expr::variable(name));
  terms_.push_back(level);
  programs_.emplace_back(level, v_.variables);
  for (int l = 1; l <= cfg_.order; ++l) {
    std::vector<Expr> next;
    for (const auto& e : terms_.back()) {
      Expr d = lie_derivative_expr(v_, e);
      if (dag_size(d) > cfg_.max_nodes) {
        std::ostringstream os;
        os << "Lie series term of order " << l << " exceeds " << cfg_.max_nodes
           << " nodes; integrate numerically (integrate_rk4) instead";
        throw PreconditionError(os.str());
      }
      next.push_back(std::move(d));
    }
    programs_.emplace_back(next, v_.variables);
    terms_.push_back(std::move(next));
  }
}

LieSeriesResult LieSeries::operator()(std::span<const double> x0, double t) const {
  require_dimension(v_, x0);
  const std::size_t n = v_.dimension();
  LieSeriesResult out;
  out.point.assign(x0.begin(), x0.end());
  if (t == 0.0) return out;
  std::vector<double> vals(n);
  double coef = 1.0;
  for (int l = 1; l <= cfg_.order; ++l) {
    coef *= t / l;
    programs_[static_cast<std::size_t>(l)].real(x0, vals);
    for (std::size_t i = 0; i < n; ++i) out.point[i] += coef * vals[i];
    if (l == cfg_.order) out.tail = coef * inf_norm(vals);
  }
  out.tail = std::fabs(out.tail);
  return out;
}

LieSeriesResult lie_series_flow(const VectorField& v, std::span<const double> x0, double t,
                                const LieSeriesConfig& cfg) {
  return LieSeries(v, cfg)(x0, t);
}

std::vector<double> infinitesimal_transform(const VectorField& v, std::span<const double> x0, double t) {
  require_dimension(v, x0);
  std::vector<double> out(x0.begin(), x0.end());
  if (t == 0.0) return out;
  std::vector<double> vel(v.dimension());
  ProgramSet(v.components, v.variables).real(x0, vel);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * vel[i];
  return out;
}

double transform_function(const VectorField& v, const Expr& f, std::span<const double> x0, double t,
                          const LieSeriesConfig& cfg) {
  const auto moved = lie_series_flow(v, x0, t, cfg);
  return Program(f, v.variables).real(moved.point);
}

std::vector<double> equilibrium_find(const VectorField& v, std::span<const double> seed, double tol,
                                     int max_iterations) {
  require_dimension(v, seed);
  const std::size_t n = v.dimension();
  std::vector<Expr> jac;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) jac.push_back(diff(v.components[i], v.variables[j]));
  const ProgramSet fp(v.components, v.variables), jp(jac, v.variables);

  std::vector<double> x(seed.begin(), seed.end()), r(n), trial(n), rt(n), jv(n * n);
  const auto N = static_cast<Eigen::Index>(n);
  fp.real(x, r);
  for (int it = 0; it <= max_iterations; ++it) {
    const double rn = inf_norm(r);
    if (rn <= tol) return x;
    if (it == max_iterations) break;
    jp.real(x, jv);
    Eigen::MatrixXd J(N, N);
    Eigen::VectorXd rhs(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      rhs(i) = -r[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < N; ++j) J(i, j) = jv[static_cast<std::size_t>(i * N + j)];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible())
      throw ConvergenceError("Newton for an equilibrium met a singular Jacobian at " + fmt_point(x) +
                             " (the field may have no equilibrium)");
    const Eigen::VectorXd dx = lu.solve(rhs);
    double lambda = 1.0;
    for (int halving = 0;; ++halving) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + lambda * dx(static_cast<Eigen::Index>(i));
      fp.real(trial, rt);
      if (inf_norm(rt) < rn || halving == 30) break;
      lambda *= 0.5;
    }
    x = trial;
    r = rt;
  }
  throw ConvergenceError("Newton for an equilibrium did not converge in " + std::to_string(max_iterations) +
                         " iterations (last point " + fmt_point(x) + ")");
}

CheckReport level_surface_membership(const Expr& phi, const odesys::AutonomousSystem& sys,
                                     std::span<const double> x0, double T, double h, double tol) {
  for (const auto& name : variables(phi))
    if (std::find(sys.field.variables.begin(), sys.field.variables.end(), name) == sys.field.variables.end())
      throw UnboundVariable(name);
  odesys::DriftOptions opts;
  opts.tol = tol;
  CheckReport rep = odesys::first_integral_drift(phi, sys, x0, T, h, opts);
  for (auto& [name, value] : rep.components)
    if (name == "phi0") name = "C";
  return rep;
}

}  // namespace intkit::flow
