#include "intkit/odekit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "intkit/quadrature.hpp"

namespace intkit::odekit {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ExactODE ExactODE::parse(const std::string& m, const std::string& n) {
  return ExactODE{intkit::parse(m), intkit::parse(n)};
}

VectorField ExactODE::field() const { return VectorField({x, y}, {M, N}); }

CheckReport exact_check(const ExactODE& ode, const Region& region, std::size_t grid, double tol) {
  return realfield::exactness_check(ode.field(), region, grid, tol);
}

ExactSolution::ExactSolution(ExactODE ode, Region region, std::vector<double> base, double x0, double y0)
    : ode_(std::move(ode)), region_(std::move(region)), field_(ode_.field()), base_(std::move(base)), x0_(x0),
      y0_(y0) {
  const std::vector<std::string> vars{ode_.x, ode_.y};
  m_ = Program(ode_.M, vars);
  n_ = Program(ode_.N, vars);
  c0_ = u(x0_, y0_);
}

double ExactSolution::u(double x, double y) const {
  const double p[2] = {x, y};
  return realfield::potential_reconstruct(field_, base_, p, &region_);
}

double ExactSolution::solve_y(double x, double y_guess) const {
  double y = y_guess;
  for (int it = 0; it < 50; ++it) {
    const double p[2] = {x, y};
    const double uy = n_.real(p);
    if (!(std::fabs(uy) > 1e-14)) throw ConvergenceError("level curve is vertical (N = 0) at x = " + fmt(x));
    const double dy = (u(x, y) - c0_) / uy;
    y -= dy;
    if (std::fabs(dy) <= 1e-14 * (1.0 + std::fabs(y))) return y;
  }
  throw ConvergenceError("Newton on the level curve did not converge at x = " + fmt(x));
}

std::vector<std::pair<double, double>> ExactSolution::trace(double x_end, std::size_t steps) const {
  if (steps == 0) throw PreconditionError("trace needs at least one step");
  std::vector<std::pair<double, double>> out{{x0_, y0_}};
  const double h = (x_end - x0_) / static_cast<double>(steps);
  double x = x0_, y = y0_;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double p[2] = {x, y};
    const double slope = -m_.real(p) / n_.real(p);
    x = x0_ + h * static_cast<double>(k);
    y = solve_y(x, y + h * slope);
    out.emplace_back(x, y);
  }
  return out;
}

ExactSolution exact_solve(const ExactODE& ode, double x0, double y0, const Region& region,
                          std::optional<std::vector<double>> base, std::size_t grid, double tol) {
  const double start[2] = {x0, y0};
  if (!region.contains(start)) throw PreconditionError("initial point lies outside the region");
  const CheckReport rep = exact_check(ode, region, grid, tol);
  if (!rep.passed)
    throw PreconditionError("equation is not exact on the region (max residual " + fmt(rep.max_residual) + ")");
  std::vector<double> b;
  if (base) {
    b = *base;
  } else {
    const double origin[2] = {0.0, 0.0};
    b = region.contains(origin) ? std::vector<double>{0.0, 0.0}
                                : std::vector<double>{region.bounds[0].lo, region.bounds[1].lo};
  }
  if (b.size() != 2 || !region.contains(b)) throw PreconditionError("base point lies outside the region");
  return ExactSolution(ode, region, std::move(b), x0, y0);
}

IntegratingFactorResult integrating_factor_apply(const ExactODE& ode, const Expr& mu, const Region& region,
                                                 std::size_t grid, double tol) {
  const std::vector<std::string> vars{ode.x, ode.y};
  const Program m(mu, vars);
  std::size_t near_zero = 0, total = 0;
  double largest = 0.0;
  for_each_grid_point(region, grid, [&](std::span<const double> p) {
    const double v = std::fabs(m.real(p));
    largest = std::max(largest, v);
    if (v < 1e-12) ++near_zero;
    ++total;
  });
  if (!(largest > 1e-300)) throw PreconditionError("integrating factor vanishes on the whole grid");
  IntegratingFactorResult out;
  out.transformed = ExactODE{mu * ode.M, mu * ode.N, ode.x, ode.y};
  out.report = exact_check(out.transformed, region, grid, tol);
  if (near_zero > 0)
    out.report.warnings.push_back("integrating factor is near zero at " + std::to_string(near_zero) + " of " +
                                  std::to_string(total) + " samples");
  return out;
}

namespace {

// Index k of a derivative name y{k}; 0 for y itself, npos for anything else.
std::size_t derivative_index(const std::string& name, const std::string& y) {
  if (name == y) return 0;
  if (name.size() <= y.size() || name.compare(0, y.size(), y) != 0) return std::string::npos;
  const std::string digits = name.substr(y.size());
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) || digits[0] == '0')
    return std::string::npos;
  return static_cast<std::size_t>(std::stoul(digits));
}

}  // namespace

CheckReport reduction_residual(const Expr& phi, const Expr& candidate, Interval range, double tol,
                               std::size_t order, std::size_t samples, const std::string& x, const std::string& y) {
  if (samples < 2) throw PreconditionError("need at least two samples");
  if (!(range.lo < range.hi)) throw PreconditionError("empty x interval");
  for (const auto& name : variables(candidate))
    if (name != x) throw UnboundVariable(name);
  std::size_t highest = 0;
  bool uses_y = false;
  for (const auto& name : variables(phi)) {
    if (name == x) continue;
    const std::size_t k = derivative_index(name, y);
    if (k == std::string::npos) throw UnboundVariable(name);
    uses_y = true;
    highest = std::max(highest, k);
  }
  if (order == 0) order = uses_y ? highest + 1 : 1;
  if (uses_y && highest + 1 > order)
    throw PreconditionError("order mismatch: Phi uses " + y + std::to_string(highest) + " but the equation has order " +
                            std::to_string(order));
  std::map<std::string, Expr, std::less<>> subs;
  Expr d = candidate;
  for (std::size_t k = 0; k < order; ++k) {
    subs.emplace(k == 0 ? y : y + std::to_string(k), d);
    d = diff(d, x);
  }
  const Expr total = diff(substitute(phi, subs), x);
  const std::string names[1] = {x};
  const Program prog(total, names);
  ResidualTracker t;
  for (std::size_t k = 0; k < samples; ++k) {
    const double p[1] = {range.lo + (range.hi - range.lo) * static_cast<double>(k) / static_cast<double>(samples - 1)};
    t.observe(std::fabs(prog.real(p)), p);
  }
  return t.report(tol);
}

EnergySolver::EnergySolver(EnergyProblem p) : p_(std::move(p)) {
  if (!(p_.mass > 0)) throw PreconditionError("mass must be positive");
  if (p_.v0 == 0.0) throw PreconditionError("v0 = 0 starts at a turning point; the quadrature needs v0 != 0");
  for (const auto& name : variables(p_.force))
    if (name != p_.variable) throw UnboundVariable(name);
  const std::string names[1] = {p_.variable};
  force_ = Program(p_.force, names);
  std::vector<Complex> c;
  if (as_polynomial(p_.force, p_.variable, c) &&
      std::all_of(c.begin(), c.end(), [](Complex v) { return v.imag() == 0.0; })) {
    // U = -int F from x_ref
    std::vector<double> u(c.size() + 1, 0.0);
    double at_ref = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      u[k + 1] = -c[k].real() / static_cast<double>(k + 1);
      at_ref += u[k + 1] * std::pow(p_.x_ref, static_cast<double>(k + 1));
    }
    u[0] = -at_ref;
    poly_ = std::move(u);
  }
  sign_ = p_.v0 > 0 ? 1.0 : -1.0;
  energy_ = 0.5 * p_.mass * p_.v0 * p_.v0 + potential(p_.x0);
}

double EnergySolver::potential(double x) const {
  if (poly_) {
    double s = 0.0;
    for (auto it = poly_->rbegin(); it != poly_->rend(); ++it) s = s * x + *it;
    return s;
  }
  auto f = [&](double s) {
    const double a[1] = {s};
    return force_.real(a);
  };
  return -quad::adaptive_gl5(f, p_.x_ref, x, 1e-14 * (1.0 + std::fabs(x - p_.x_ref)));
}

double EnergySolver::turning_margin() const { return 1e-9 * (1.0 + std::fabs(energy_)); }

double EnergySolver::velocity(double x) const {
  const double k = energy_ - potential(x);
  if (!(k > turning_margin())) throw PreconditionError("turning point: E - U(x) vanishes near x = " + fmt(x));
  return sign_ * std::sqrt(2.0 * k / p_.mass);
}

std::optional<double> EnergySolver::turning_boundary(double from, double to) const {
  constexpr int n = 64;
  double good = from;
  for (int k = 1; k <= n; ++k) {
    const double x = from + (to - from) * k / n;
    if (energy_ - potential(x) > turning_margin()) {
      good = x;
      continue;
    }
    // bisect to the edge of the admissible branch, returning its good side
    double bad = x;
    for (int it = 0; it < 200 && std::fabs(bad - good) > 1e-15 * (1.0 + std::fabs(good)); ++it) {
      const double mid = 0.5 * (good + bad);
      (energy_ - potential(mid) > turning_margin() ? good : bad) = mid;
    }
    return good;
  }
  return std::nullopt;
}

void EnergySolver::require_branch(double from, double to) const {
  if (const auto edge = turning_boundary(from, to))
    throw PreconditionError("turning point at x = " + fmt(*edge) + " (E - U(x) <= " + fmt(turning_margin()) + ")");
}

double EnergySolver::time_at(double x) const {
  if (x == p_.x0) return p_.t0;
  require_branch(p_.x0, x);
  // x(w) = x0 + d (1 - w^2) clusters nodes at the far end, where a nearby
  // turning point makes 1/v blow up like 1/sqrt(x_turn - x).
  const double d = x - p_.x0;
  auto inv = [&](double w) { return 2.0 * d * w / velocity(p_.x0 + d * (1.0 - w * w)); };
  return p_.t0 + quad::adaptive_gl5(inv, 0.0, 1.0, 1e-14 * (1.0 + std::fabs(d)));
}

double EnergySolver::position_at(double t) const {
  if (t == p_.t0) return p_.x0;
  const double dir = sign_ * (t > p_.t0 ? 1.0 : -1.0);
  const double want = std::fabs(t - p_.t0);
  // Expand a bracket [x0, x0 + dir*span] until it contains the target time.
  double span = std::max(std::fabs(p_.v0) * want, 1e-12);
  double hi = p_.x0 + dir * span;
  for (int it = 0;; ++it) {
    if (it > 200) throw ConvergenceError("could not bracket t = " + fmt(t));
    hi = p_.x0 + dir * span;
    if (const auto edge = turning_boundary(p_.x0, hi)) {
      hi = *edge;
      if (std::fabs(time_at(hi) - p_.t0) >= want) break;
      throw PreconditionError("turning point at x = " + fmt(hi) + " is reached before t = " + fmt(t));
    }
    if (std::fabs(time_at(hi) - p_.t0) >= want) break;
    span *= 2.0;
  }
  // Safeguarded Newton on t(x) - t, with dt/dx = 1 / v.
  double a = p_.x0, b = hi;
  double x = p_.x0 + p_.v0 * (t - p_.t0);
  if ((x - a) * (x - b) > 0) x = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const double g = time_at(x) - t;
    if (std::fabs(g) <= 1e-15 * (1.0 + std::fabs(t))) return x;
    // keep a as the side with t(a) < t in the direction of travel
    if ((g < 0) == (t > p_.t0)) a = x; else b = x;
    double next = x - g * velocity(x);
    if ((next - a) * (next - b) > 0 || !std::isfinite(next)) next = 0.5 * (a + b);
    if (std::fabs(next - x) <= 1e-15 * (1.0 + std::fabs(x))) return next;
    x = next;
  }
  throw ConvergenceError("inverting t(x) did not converge for t = " + fmt(t));
}

EnergyResult energy_solve(const EnergyProblem& p, EnergyTarget target, std::size_t samples) {
  const EnergySolver solver(p);
  if (samples < 2) throw PreconditionError("need at least two samples");
  EnergyResult out;
  out.energy = solver.energy();
  Trajectory& tr = out.trajectory;
  tr.method = "energy-quadrature";
  std::vector<std::pair<double, double>> tx;
  if (target.kind == EnergyTarget::Kind::Position) {
    if (target.value == p.x0) throw PreconditionError("target position equals x0");
    for (std::size_t k = 0; k < samples; ++k) {
      const double x = p.x0 + (target.value - p.x0) * static_cast<double>(k) / static_cast<double>(samples - 1);
      tx.emplace_back(solver.time_at(x), x);
    }
  } else {
    if (target.value == p.t0) throw PreconditionError("target time equals t0");
    for (std::size_t k = 0; k < samples; ++k) {
      const double t = p.t0 + (target.value - p.t0) * static_cast<double>(k) / static_cast<double>(samples - 1);
      tx.emplace_back(t, solver.position_at(t));
    }
  }
  std::sort(tx.begin(), tx.end());
  for (const auto& [t, x] : tx) {
    tr.times.push_back(t);
    tr.states.push_back({x, solver.velocity(x)});
  }
  return out;
}

}  // namespace intkit::odekit
