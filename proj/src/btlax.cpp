#include "intkit/btlax.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace intkit::btlax {

namespace {

std::string fmt_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
  os << ')';
  return os.str();
}

void require_variables(const Region& region, const std::vector<std::string>& names) {
  if (region.variables != names) {
    std::string want;
    for (const auto& n : names) want += (want.empty() ? "" : ", ") + n;
    throw PreconditionError("region must be over (" + want + ")");
  }
}

// Max of several residual expressions on a grid, one named sub-maximum per group.
struct Group {
  std::string name;
  std::vector<Expr> exprs;
};

// `guards` must evaluate to real values at each point but are not residuals.
CheckReport grid_residuals(const std::vector<Group>& groups, const Region& region, double tol, std::size_t grid,
                           const std::vector<Expr>& guards = {}) {
  std::vector<Expr> all = guards;
  for (const auto& g : groups) all.insert(all.end(), g.exprs.begin(), g.exprs.end());
  const ProgramSet progs(all, region.variables);
  std::vector<double> out(all.size()), maxima(groups.size(), 0.0);
  ResidualTracker tracker;
  for_each_grid_point(region, grid, [&](std::span<const double> p) {
    try {
      progs.real(p, out);
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " at " + fmt_point(p), e.subtree());
    }
    std::size_t k = guards.size();
    double worst = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (std::size_t j = 0; j < groups[g].exprs.size(); ++j, ++k) {
        const double r = std::isnan(out[k]) ? INFINITY : std::fabs(out[k]);
        maxima[g] = std::max(maxima[g], r);
        worst = std::max(worst, r);
      }
    tracker.observe(worst, p);
  });
  CheckReport rep = tracker.report(tol);
  for (std::size_t g = 0; g < groups.size(); ++g) rep.components.emplace_back(groups[g].name, maxima[g]);
  return rep;
}

Expr var(const std::string& n) { return Expr::variable(n); }

}  // namespace

BTSystem BTSystem::parse(std::string_view b1, std::string_view b2, std::string_view pu, std::string_view qv,
                         std::string x, std::string t) {
  BTSystem bt;
  bt.B1 = intkit::parse(b1);
  bt.B2 = intkit::parse(b2);
  bt.Pu = intkit::parse(pu);
  bt.Qv = intkit::parse(qv);
  bt.x = std::move(x);
  bt.t = std::move(t);
  return bt;
}

BTSystem cauchy_riemann_bt() {
  return BTSystem::parse("u_x - v_y", "u_y + v_x", "u_xx + u_yy", "v_xx + v_yy", "x", "y");
}

BTSystem liouville_bt() {
  return BTSystem::parse("u_x + v_x - sqrt(2)*e^((u-v)/2)", "u_t - v_t - sqrt(2)*e^((u+v)/2)", "u_xt - e^u",
                         "v_xt");
}

BTSystem sine_gordon_bt(double a) {
  if (a == 0.0) throw PreconditionError("sine-Gordon BT parameter a must be nonzero");
  BTSystem bt = BTSystem::parse("(u_x + v_x)/2", "(u_t - v_t)/2", "u_xt - sin(u)", "v_xt - sin(v)");
  const Expr u = var("u"), v = var("v");
  bt.B1 = bt.B1 - Expr(a) * sin((u - v) / Expr(2.0));
  bt.B2 = bt.B2 - sin((u + v) / Expr(2.0)) / Expr(a);
  return bt;
}

CheckReport bt_residual(const BTSystem& bt, const Expr& u, const Expr& v, const Region& region, double tol,
                        std::size_t grid) {
  if (bt.x.size() != 1 || bt.t.size() != 1 || bt.x == bt.t)
    throw PreconditionError("independent variable names must be distinct single letters");
  require_variables(region, {bt.x, bt.t});
  std::map<std::string, Expr, std::less<>> sub;
  auto resolve = [&](const std::string& name) {
    if (name == bt.x || name == bt.t || sub.count(name)) return;
    for (const auto* base : {&bt.u, &bt.v}) {
      const Expr& f = base == &bt.u ? u : v;
      if (name == *base) {
        sub.emplace(name, f);
        return;
      }
      if (name.size() > base->size() + 1 && name.compare(0, base->size(), *base) == 0 && name[base->size()] == '_') {
        Expr d = f;
        for (std::size_t k = base->size() + 1; k < name.size(); ++k) {
          if (name[k] == bt.x[0]) d = diff(d, bt.x);
          else if (name[k] == bt.t[0]) d = diff(d, bt.t);
          else throw UnboundVariable(name);
        }
        sub.emplace(name, d);
        return;
      }
    }
    throw UnboundVariable(name);
  };
  for (const auto* e : {&bt.B1, &bt.B2, &bt.Pu, &bt.Qv})
    for (const auto& n : variables(*e)) resolve(n);
  for (const auto& f : {u, v})
    for (const auto& n : variables(f))
      if (n != bt.x && n != bt.t) throw UnboundVariable(n);
  return grid_residuals({{"B1", {substitute(bt.B1, sub)}},
                         {"B2", {substitute(bt.B2, sub)}},
                         {"Pu", {substitute(bt.Pu, sub)}},
                         {"Qv", {substitute(bt.Qv, sub)}}},
                        region, tol, grid, {u, v});
}

Expr liouville_solution(double c) {
  const Expr s = (var("x") + var("t")) / sqrt(Expr(2.0));
  return Expr(-2.0) * ln(Expr(c) - s);
}

Expr sine_gordon_kink(double a, double c) {
  if (a == 0.0) throw PreconditionError("kink parameter a must be nonzero");
  if (!(c > 0.0)) throw PreconditionError("kink constant C must be positive");
  const Expr u = Expr(4.0) * atan(Expr(c) * exp(Expr(a) * var("x") + var("t") / Expr(a)));
  const Region square({"x", "t"}, {{-2, 2}, {-2, 2}});
  const auto rep = grid_residuals({{"sine-Gordon", {diff(diff(u, "x"), "t") - sin(u)}}}, square, 1e-10, 41);
  if (!rep.passed) {
    std::ostringstream os;
    os << "kink fails u_xt = sin u by " << rep.max_residual << " on [-2, 2]^2";
    throw NumericError(os.str());
  }
  return u;
}

Expr kdv_soliton(double kappa) {
  const Expr k(kappa);
  const Expr arg = k * (var("x") - Expr(4.0) * k * k * var("t"));
  return Expr(-2.0) * k * k / pow(cosh(arg), Expr(2.0));
}

CheckReport kdv_residual(const Expr& u, const Region& region, double tol, std::size_t grid) {
  require_variables(region, {"x", "t"});
  const Expr ux = diff(u, "x");
  const Expr f = diff(u, "t") - Expr(6.0) * u * ux + diff(diff(ux, "x"), "x");
  return grid_residuals({{"kdv", {f}}}, region, tol, grid);
}

LaxResult lax_commuting_flow(const Expr& u, const LaxOptions& opts) {
  if (opts.steps == 0) throw PreconditionError("need at least one RK4 step per edge");
  if (!(opts.dx != 0.0) || !(opts.dt != 0.0)) throw PreconditionError("rectangle must have nonzero sides");
  for (const auto& n : variables(u))
    if (n != "x" && n != "t") throw UnboundVariable(n);
  const std::vector<std::string> xt{"x", "t"};
  const Expr ux = diff(u, "x");
  const std::vector<Expr> fields{u, ux, diff(ux, "x")};
  const ProgramSet prog(fields, xt);
  const double lam = opts.lambda;
  // along x: psi' = phi, phi' = (u - lambda) psi
  auto along_x = [&](double t) {
    return [&, t](double x, std::span<const double> s, std::span<double> ds) {
      double f[3];
      const double at[2] = {x, t};
      prog.real(at, f);
      ds[0] = s[1];
      ds[1] = (f[0] - lam) * s[0];
    };
  };
  // along t: (3b) for psi, and its x-derivative with psi_xx eliminated for psi_x
  auto along_t = [&](double x) {
    return [&, x](double t, std::span<const double> s, std::span<double> ds) {
      double f[3];
      const double at[2] = {x, t};
      prog.real(at, f);
      const double a = 2.0 * (f[0] + 2.0 * lam);
      ds[0] = a * s[1] - f[1] * s[0];
      ds[1] = f[1] * s[1] + (a * (f[0] - lam) - f[2]) * s[0];
    };
  };
  const double x1 = opts.x0 + opts.dx, t1 = opts.t0 + opts.dt;
  const std::vector<double> start(opts.psi0.begin(), opts.psi0.end());
  const auto a1 = rk4_endpoint(along_x(opts.t0), opts.x0, start, x1, opts.steps);
  const auto a2 = rk4_endpoint(along_t(x1), opts.t0, a1, t1, opts.steps);
  const auto b1 = rk4_endpoint(along_t(opts.x0), opts.t0, start, t1, opts.steps);
  const auto b2 = rk4_endpoint(along_x(t1), opts.x0, b1, x1, opts.steps);
  LaxResult out;
  out.x_then_t = {a2[0], a2[1]};
  out.t_then_x = {b2[0], b2[1]};
  out.deviation = std::hypot(a2[0] - b2[0], a2[1] - b2[1]);
  if (!std::isfinite(out.deviation)) throw NumericError("Lax transport blew up");
  return out;
}

CheckReport chiral_residual(const odesys::ExprMatrix& g, const Region& region, double tol, std::size_t grid) {
  require_variables(region, {"x", "t"});
  const std::size_t n = g.n;
  if (n == 0 || g.entries.size() != n * n) throw PreconditionError("g must be a square matrix");
  std::vector<Expr> all;  // g, g_x, g_t, g_xt
  for (const auto& e : g.entries) all.push_back(e);
  for (const auto& e : g.entries) all.push_back(diff(e, "x"));
  for (const auto& e : g.entries) all.push_back(diff(e, "t"));
  for (const auto& e : g.entries) all.push_back(diff(diff(e, "x"), "t"));
  std::vector<Program> progs;
  for (const auto& e : all) progs.emplace_back(e, region.variables);
  const auto N = static_cast<Eigen::Index>(n);
  ResidualTracker tracker;
  for_each_grid_point(region, grid, [&](std::span<const double> p) {
    const Complex at[2] = {p[0], p[1]};
    odesys::Matrix m[4];
    for (int blk = 0; blk < 4; ++blk) {
      m[blk].resize(N, N);
      for (std::size_t k = 0; k < n * n; ++k)
        m[blk](static_cast<Eigen::Index>(k / n), static_cast<Eigen::Index>(k % n)) =
            progs[static_cast<std::size_t>(blk) * n * n + k](at);
    }
    const Eigen::JacobiSVD<odesys::Matrix> svd(m[0]);
    const auto& sv = svd.singularValues();
    if (!(sv(N - 1) > 0) || !(sv(0) / sv(N - 1) < 1e8))
      throw PreconditionError("g is singular or ill-conditioned at " + fmt_point(p));
    const odesys::Matrix gi = m[0].inverse();
    const odesys::Matrix jx = gi * m[1], jt = gi * m[2];
    const odesys::Matrix f = 2.0 * gi * m[3] - jt * jx - jx * jt;
    tracker.observe(f.norm(), p);
  });
  return tracker.report(tol);
}

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

const std::array<std::string, 4> kSpaceTime{"x", "y", "z", "t"};

ExprVec3 curl(const ExprVec3& a) {
  return {diff(a[2], "y") - diff(a[1], "z"), diff(a[0], "z") - diff(a[2], "x"), diff(a[1], "x") - diff(a[0], "y")};
}
Expr divergence(const ExprVec3& a) { return diff(a[0], "x") + diff(a[1], "y") + diff(a[2], "z"); }

void require_spacetime(const Region& region) {
  require_variables(region, {kSpaceTime.begin(), kSpaceTime.end()});
}

}  // namespace

PlaneWave maxwell_plane_wave(const PlaneWaveSpec& spec) {
  if (std::fabs(norm(spec.k_dir) - 1.0) > 1e-12) throw PreconditionError("k direction must be a unit vector");
  if (!(spec.e0 > 0)) throw PreconditionError("E0 magnitude must be positive");
  if (!(spec.eps0mu0 > 0)) throw PreconditionError("eps0 mu0 must be positive");
  PlaneWave w;
  w.eps0mu0 = spec.eps0mu0;
  w.c = 1.0 / std::sqrt(spec.eps0mu0);
  w.alpha = spec.alpha;
  if (spec.omega > 0) w.omega = spec.omega;
  else if (spec.wavelength > 0) w.omega = 2.0 * std::numbers::pi * w.c / spec.wavelength;
  else throw PreconditionError("give a positive angular frequency or wavelength");
  const Vec3& kh = spec.k_dir;
  for (int i = 0; i < 3; ++i) w.k[static_cast<std::size_t>(i)] = w.omega / w.c * kh[static_cast<std::size_t>(i)];

  Vec3 e{};
  if (spec.e_dir) {
    e = *spec.e_dir;
  } else {
    // the axis least aligned with k
    std::size_t axis = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (std::fabs(kh[i]) < std::fabs(kh[axis])) axis = i;
    e[axis] = 1.0;
  }
  const double along = dot(e, kh);
  Vec3 p{e[0] - along * kh[0], e[1] - along * kh[1], e[2] - along * kh[2]};
  const double pn = norm(p), en = norm(e);
  if (!(pn > 1e-12 * en)) throw PreconditionError("E0 direction is parallel to k; no transverse part");
  if (spec.e_dir && std::fabs(along) > 1e-12 * en)
    w.warnings.push_back("E0 direction was not transverse and has been projected onto the plane normal to k");
  for (std::size_t i = 0; i < 3; ++i) w.e0[i] = spec.e0 * p[i] / pn;
  const Vec3 kxe = cross(w.k, w.e0);
  for (std::size_t i = 0; i < 3; ++i) w.b0[i] = kxe[i] / w.omega;

  const Expr phase = Expr(w.k[0]) * var("x") + Expr(w.k[1]) * var("y") + Expr(w.k[2]) * var("z") -
                     Expr(w.omega) * var("t") + Expr(w.alpha);
  const Expr wave = cos(phase);
  for (std::size_t i = 0; i < 3; ++i) {
    w.E[i] = Expr(w.e0[i]) * wave;
    w.B[i] = Expr(w.b0[i]) * wave;
  }
  return w;
}

CheckReport maxwell_residual(const ExprVec3& e, const ExprVec3& b, double eps0mu0, const Region& region, double tol,
                             std::size_t grid) {
  require_spacetime(region);
  const ExprVec3 ce = curl(e), cb = curl(b);
  std::vector<Expr> faraday, ampere;
  for (std::size_t i = 0; i < 3; ++i) {
    faraday.push_back(ce[i] + diff(b[i], "t"));
    ampere.push_back(cb[i] - Expr(eps0mu0) * diff(e[i], "t"));
  }
  return grid_residuals({{"div E", {divergence(e)}},
                         {"div B", {divergence(b)}},
                         {"curl E + B_t", faraday},
                         {"curl B - eps0mu0 E_t", ampere}},
                        region, tol, grid);
}

CheckReport wave_equation_residual(const ExprVec3& a, double eps0mu0, const Region& region, double tol,
                                   std::size_t grid) {
  require_spacetime(region);
  std::vector<Expr> comps;
  for (const auto& c : a) {
    Expr lap = 0.0;
    for (const char* v : {"x", "y", "z"}) lap = lap + diff(diff(c, v), v);
    comps.push_back(lap - Expr(eps0mu0) * diff(diff(c, "t"), "t"));
  }
  return grid_residuals({{"wave", comps}}, region, tol, grid);
}

}  // namespace intkit::btlax
