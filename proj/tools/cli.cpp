#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "intkit/btlax.hpp"
#include "intkit/charpde.hpp"
#include "intkit/cplx.hpp"
#include "intkit/error.hpp"
#include "intkit/flow.hpp"
#include "intkit/odekit.hpp"
#include "intkit/odesys.hpp"
#include "intkit/realfield.hpp"
#include "report.hpp"

namespace intkit::cli {

namespace {

// ---- text helpers ----

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + s + "' is not a number");
  }
  if (used != s.size()) throw UsageError(what + ": '" + s + "' is not a number");
  return v;
}

std::vector<double> numbers(const std::string& s, const std::string& what, std::size_t expect = 0) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(to_double(part, what));
  if (expect && out.size() != expect)
    throw UsageError(what + ": expected " + std::to_string(expect) + " numbers, got " + std::to_string(out.size()));
  return out;
}

std::vector<std::vector<double>> points(const std::string& s, const std::string& what, std::size_t dim) {
  std::vector<std::vector<double>> out;
  for (const auto& p : split(s, ';')) out.push_back(numbers(p, what, dim));
  return out;
}

std::vector<std::string> names(const std::string& s) {
  auto out = split(s, ',');
  for (const auto& n : out)
    if (n.empty()) throw UsageError("empty variable name in '" + s + "'");
  return out;
}

std::vector<std::string> default_names(std::size_t dim) {
  if (dim == 2) return {"x", "y"};
  if (dim == 3) return {"x", "y", "z"};
  std::vector<std::string> v;
  for (std::size_t i = 0; i < dim; ++i) v.push_back("x" + std::to_string(i + 1));
  return v;
}

Region region_of(const std::string& text, std::vector<std::string> vars, const std::string& exclude = "") {
  const auto b = numbers(text, "--region", 2 * vars.size());
  std::vector<Interval> bounds;
  for (std::size_t i = 0; i < vars.size(); ++i) bounds.push_back({b[2 * i], b[2 * i + 1]});
  Region r(std::move(vars), std::move(bounds));
  if (!exclude.empty()) r.excluded = points(exclude, "--exclude", r.dimension());
  r.validate();
  return r;
}

Complex complex_of(const std::string& s, const std::string& what) {
  const auto v = numbers(s, what, 2);
  return {v[0], v[1]};
}

bool orientation(const std::string& s) {
  if (s == "ccw") return true;
  if (s == "cw") return false;
  throw UsageError("--orient must be ccw or cw");
}

Json expr_list(const std::vector<Expr>& es) {
  Json a = Json::array();
  for (const auto& e : es) a.push_back(render(e));
  return a;
}

Json complex_vector(const odesys::Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(maybe_real(v(i)));
  return a;
}

Json complex_matrix(const odesys::Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(complex_vector(m.row(i).transpose()));
  return rows;
}

Json vec3(const btlax::Vec3& v) { return vector_json(v); }

// ---- command table ----

using Action = std::function<void(Report&)>;

struct Entry {
  CLI::App* app = nullptr;
  Action action;
};

class Registry {
 public:
  explicit Registry(CLI::App& root) : root_(root) {}

  /// Creates the subcommand; `build` adds options and returns the action.
  void add(const std::string& name, const std::string& help, const std::function<Action(CLI::App&)>& build) {
    auto* sub = root_.add_subcommand(name, help);
    sub->set_help_flag("--help", "print this help");
    sub->add_flag("--pretty", pretty_, "human summary on stderr");
    sub->add_option("--dump-csv", csv_, "write the trajectory as CSV (t,x1..xn)");
    entries_.push_back({sub, build(*sub)});
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool pretty() const { return pretty_; }
  const std::string& csv() const { return csv_; }

 private:
  CLI::App& root_;
  std::vector<Entry> entries_;
  bool pretty_ = false;
  std::string csv_;
};

template <class T>
std::shared_ptr<T> state() {
  return std::make_shared<T>();
}

// Common option bundles.

struct FieldOpts {
  std::string P, Q, R, vars;
  std::vector<std::string> comps() const {
    std::vector<std::string> c{P, Q};
    if (!R.empty()) c.push_back(R);
    return c;
  }
  std::vector<std::string> variables() const { return vars.empty() ? default_names(comps().size()) : names(vars); }
  VectorField field() const {
    if (P.empty() || Q.empty()) throw UsageError("--P and --Q are required");
    return VectorField::parse(variables(), comps());
  }
};

void field_options(CLI::App& a, FieldOpts& f) {
  a.add_option("--P", f.P, "first component")->required();
  a.add_option("--Q", f.Q, "second component")->required();
  a.add_option("--R", f.R, "third component (3-D fields)");
  a.add_option("--vars", f.vars, "variable names, comma separated");
}

struct SystemOpts {
  std::string vars = "x,y", f, time = "t";
  odesys::AutonomousSystem system() const {
    const auto v = names(vars);
    const auto comps = split(f, ';');
    if (comps.size() != v.size()) throw UsageError("--f needs one component per variable");
    std::optional<std::string> tn;
    if (!time.empty() && std::find(v.begin(), v.end(), time) == v.end()) tn = time;
    return odesys::AutonomousSystem::parse(v, comps, tn);
  }
  VectorField field() const {
    const auto v = names(vars);
    const auto comps = split(f, ';');
    if (comps.size() != v.size()) throw UsageError("--V needs one component per variable");
    return VectorField::parse(v, comps);
  }
};

void curve_options(CLI::App& a, std::string& circle, std::string& orient, std::string& polygon) {
  a.add_option("--circle", circle, "cx,cy,r");
  a.add_option("--orient", orient, "ccw or cw")->capture_default_str();
  a.add_option("--polygon", polygon, "closed polygon x,y;x,y;...");
}

cplx::Contour contour_of(const std::string& circle, const std::string& orient, const std::string& polygon) {
  if (!circle.empty() == !polygon.empty()) throw UsageError("give exactly one of --circle and --polygon");
  if (!circle.empty()) {
    const auto c = numbers(circle, "--circle", 3);
    return cplx::Contour::circle({c[0], c[1]}, c[2], orientation(orient));
  }
  std::vector<Complex> vs;
  for (const auto& p : points(polygon, "--polygon", 2)) vs.emplace_back(p[0], p[1]);
  if (vs.size() < 3) throw UsageError("--polygon needs at least three vertices");
  if (!orientation(orient)) std::reverse(vs.begin(), vs.end());
  return cplx::Contour::polygon(vs);
}

void put_trajectory(Report& rep, Trajectory tr) {
  rep.values["final_time"] = tr.times.back();
  rep.values["final_state"] = vector_json(tr.states.back());
  rep.values["samples"] = tr.size();
  rep.trajectory = std::move(tr);
}

// ---- realfield ----

void add_realfield(Registry& reg) {
  reg.add("exact-check", "test dP/dy = dQ/dx (and the 3-D curl) on a box", [](CLI::App& a) {
    struct S {
      FieldOpts f;
      std::string region, exclude;
      std::size_t grid = realfield::kDefaultGrid;
      double tol = 1e-10;
    };
    auto s = state<S>();
    field_options(a, s->f);
    a.add_option("--region", s->region, "box bounds a,b,c,d[,e,f]")->required();
    a.add_option("--exclude", s->exclude, "singular points x,y;...");
    a.add_option("--grid", s->grid, "points per axis")->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      const auto field = s->f.field();
      rep.absorb(realfield::exactness_check(field, region_of(s->region, s->f.variables(), s->exclude), s->grid, s->tol));
    };
  });

  reg.add("line-integral", "work integral of a field along a path", [](CLI::App& a) {
    struct S {
      FieldOpts f;
      std::string path, circle, orient = "ccw";
      std::size_t panels = realfield::kDefaultPanels;
    };
    auto s = state<S>();
    field_options(a, s->f);
    a.add_option("--path", s->path, "polyline x,y;x,y;...");
    a.add_option("--circle", s->circle, "cx,cy,r");
    a.add_option("--orient", s->orient, "ccw or cw")->capture_default_str();
    a.add_option("--panels", s->panels)->capture_default_str();
    return [s](Report& rep) {
      const auto field = s->f.field();
      Path path;
      if (s->path.empty() == s->circle.empty()) throw UsageError("give exactly one of --path and --circle");
      if (!s->path.empty()) {
        path = Path::polyline(points(s->path, "--path", field.dimension()));
      } else {
        const auto c = numbers(s->circle, "--circle", 3);
        path.pieces.push_back(ParametricCurve::circle(c[0], c[1], c[2], orientation(s->orient)));
      }
      const auto li = realfield::line_integral(field, path, s->panels);
      rep.values["integral"] = li.value;
      rep.values["error"] = li.error;
    };
  });

  reg.add("potential", "reconstruct u with grad u = F by axis-parallel legs", [](CLI::App& a) {
    struct S {
      FieldOpts f;
      std::string base, at, region, exclude;
      std::size_t grid = realfield::kDefaultGrid, panels = realfield::kDefaultPanels;
      double tol = 1e-10;
    };
    auto s = state<S>();
    field_options(a, s->f);
    a.add_option("--base", s->base, "base point, u(base) = 0")->required();
    a.add_option("--at", s->at, "target points x,y;...")->required();
    a.add_option("--region", s->region, "if given, exactness is checked here first");
    a.add_option("--exclude", s->exclude, "singular points x,y;...");
    a.add_option("--grid", s->grid)->capture_default_str();
    a.add_option("--panels", s->panels)->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      const auto field = s->f.field();
      const auto n = field.dimension();
      const auto base = numbers(s->base, "--base", n);
      std::optional<Region> region;
      if (!s->region.empty()) {
        region = region_of(s->region, s->f.variables(), s->exclude);
        rep.absorb(realfield::exactness_check(field, *region, s->grid, s->tol));
      }
      Json u = Json::array();
      for (const auto& p : points(s->at, "--at", n))
        u.push_back(realfield::potential_reconstruct(field, base, p, region ? &*region : nullptr, s->panels));
      rep.values["potential"] = u;
    };
  });

  reg.add("path-probe", "compare line integrals over the standard probe paths", [](CLI::App& a) {
    struct S {
      FieldOpts f;
      std::string from, to;
      double tol = 1e-9;
    };
    auto s = state<S>();
    field_options(a, s->f);
    a.add_option("--from", s->from, "start point")->required();
    a.add_option("--to", s->to, "end point")->required();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      const auto field = s->f.field();
      const auto aa = numbers(s->from, "--from", field.dimension());
      const auto bb = numbers(s->to, "--to", field.dimension());
      rep.absorb(realfield::path_independence_probe(field, aa, bb, realfield::standard_probe_paths(aa, bb), s->tol));
    };
  });
}

// ---- cplx ----

cplx::ComplexFunction function_of(const std::string& f, const std::string& u, const std::string& v) {
  if (!f.empty()) {
    if (!u.empty() || !v.empty()) throw UsageError("give --f or --u/--v, not both");
    return cplx::ComplexFunction::parse_z(f);
  }
  if (u.empty() || v.empty()) throw UsageError("give --f, or both --u and --v");
  return cplx::ComplexFunction::parse_uv(u, v);
}

void add_cplx(Registry& reg) {
  reg.add("cr-check", "Cauchy-Riemann residual of f on a box", [](CLI::App& a) {
    struct S {
      std::string u, v, region = "-1,1,-1,1", exclude;
      std::size_t grid = realfield::kDefaultGrid;
      double tol = 1e-10;
    };
    auto s = state<S>();
    a.add_option("--u", s->u, "Re f(x, y)")->required();
    a.add_option("--v", s->v, "Im f(x, y)")->required();
    a.add_option("--region", s->region)->capture_default_str();
    a.add_option("--exclude", s->exclude, "singular points x,y;...");
    a.add_option("--grid", s->grid)->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      const auto fn = cplx::ComplexFunction::parse_uv(s->u, s->v);
      rep.absorb(cplx::cr_residual(fn, region_of(s->region, {"x", "y"}, s->exclude), s->grid, s->tol));
    };
  });

  reg.add("contour", "contour integral of f(z)", [](CLI::App& a) {
    struct S {
      std::string f, u, v, circle, orient = "ccw", polygon;
      std::size_t nodes = cplx::kDefaultNodes;
    };
    auto s = state<S>();
    a.add_option("--f", s->f, "f(z)");
    a.add_option("--u", s->u, "Re f(x, y)");
    a.add_option("--v", s->v, "Im f(x, y)");
    curve_options(a, s->circle, s->orient, s->polygon);
    a.add_option("--nodes", s->nodes)->capture_default_str();
    return [s](Report& rep) {
      const auto fn = function_of(s->f, s->u, s->v);
      rep.values["integral"] = complex_json(cplx::contour_integral(fn, contour_of(s->circle, s->orient, s->polygon), s->nodes));
    };
  });

  reg.add("cauchy", "f(z0) from the Cauchy integral formula", [](CLI::App& a) {
    struct S {
      std::string f, z0, circle, orient = "ccw", polygon;
      std::size_t nodes = cplx::kDefaultNodes;
    };
    auto s = state<S>();
    a.add_option("--f", s->f, "f(z)")->required();
    a.add_option("--z0", s->z0, "re,im")->required();
    curve_options(a, s->circle, s->orient, s->polygon);
    a.add_option("--nodes", s->nodes)->capture_default_str();
    return [s](Report& rep) {
      const auto f = parse(s->f);
      const auto z0 = complex_of(s->z0, "--z0");
      const auto c = contour_of(s->circle, s->orient, s->polygon);
      rep.values["winding"] = cplx::winding_number(c, z0);
      rep.values["value"] = complex_json(cplx::cauchy_value(f, z0, c, s->nodes));
    };
  });

  reg.add("laurent", "Laurent coefficients on a circle about z0", [](CLI::App& a) {
    struct S {
      std::string f, z0 = "0,0";
      double rho = 1.0;
      int nmin = -3, nmax = 3;
      std::size_t nodes = cplx::kDefaultNodes;
    };
    auto s = state<S>();
    a.add_option("--f", s->f, "f(z)")->required();
    a.add_option("--z0", s->z0, "re,im")->capture_default_str();
    a.add_option("--rho", s->rho, "circle radius")->capture_default_str();
    a.add_option("--nmin", s->nmin)->capture_default_str();
    a.add_option("--nmax", s->nmax)->capture_default_str();
    a.add_option("--nodes", s->nodes)->capture_default_str();
    return [s](Report& rep) {
      const auto c = cplx::laurent_coeffs(parse(s->f), complex_of(s->z0, "--z0"), s->rho, s->nmin, s->nmax, s->nodes);
      Json out = Json::array();
      for (std::size_t k = 0; k < c.size(); ++k) {
        Json e = Json::object();
        e["n"] = s->nmin + static_cast<int>(k);
        e["re"] = c[k].real();
        e["im"] = c[k].imag();
        out.push_back(e);
      }
      rep.values["coefficients"] = out;
    };
  });

  reg.add("conjugate", "harmonic conjugate u of v, with u(base) = 0", [](CLI::App& a) {
    struct S {
      std::string v, base = "0,0", region = "-1,1,-1,1", at;
      std::size_t count = 21;
      double lap_tol = 1e-8, cr_tol = 1e-7;
    };
    auto s = state<S>();
    a.add_option("--v", s->v, "harmonic v(x, y)")->required();
    a.add_option("--base", s->base)->capture_default_str();
    a.add_option("--region", s->region)->capture_default_str();
    a.add_option("--count", s->count, "grid points per axis")->capture_default_str();
    a.add_option("--laplacian-tol", s->lap_tol)->capture_default_str();
    a.add_option("--tol", s->cr_tol, "Cauchy-Riemann tolerance")->capture_default_str();
    a.add_option("--at", s->at, "points x,y;... where u is reported");
    return [s](Report& rep) {
      const auto v = parse(s->v);
      const auto base = numbers(s->base, "--base", 2);
      const auto region = region_of(s->region, {"x", "y"});
      const auto hc = cplx::harmonic_conjugate(v, base, region, s->count, s->lap_tol, s->cr_tol);
      rep.absorb(hc.cauchy_riemann);
      rep.secondary("laplacian", hc.laplacian);
      if (!s->at.empty()) {
        const VectorField grad_u({"x", "y"}, {diff(v, "y"), -diff(v, "x")});
        Json u = Json::array();
        for (const auto& p : points(s->at, "--at", 2))
          u.push_back(realfield::potential_reconstruct(grad_u, base, p, &region));
        rep.values["u"] = u;
      }
    };
  });
}

// ---- odekit ----

void add_odekit(Registry& reg) {
  reg.add("ode-exact", "solve the exact equation M dx + N dy = 0 through (x0, y0)", [](CLI::App& a) {
    struct S {
      std::string M, N, region, base, at;
      double x0 = 0.0, y0 = 0.0, x_end = 0.0;
      std::size_t steps = 0, grid = realfield::kDefaultGrid;
      double tol = 1e-10;
    };
    auto s = state<S>();
    a.add_option("--M", s->M)->required();
    a.add_option("--N", s->N)->required();
    a.add_option("--x0", s->x0)->required();
    a.add_option("--y0", s->y0)->required();
    a.add_option("--region", s->region)->required();
    a.add_option("--base", s->base, "potential base point");
    a.add_option("--at", s->at, "points x,y;... where u is reported");
    a.add_option("--x-end", s->x_end, "trace the solution curve to here");
    a.add_option("--steps", s->steps, "trace steps (0: no trace)")->capture_default_str();
    a.add_option("--grid", s->grid)->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      const auto ode = odekit::ExactODE::parse(s->M, s->N);
      const auto region = region_of(s->region, {ode.x, ode.y});
      rep.absorb(odekit::exact_check(ode, region, s->grid, s->tol));
      std::optional<std::vector<double>> base;
      if (!s->base.empty()) base = numbers(s->base, "--base", 2);
      const auto sol = odekit::exact_solve(ode, s->x0, s->y0, region, base, s->grid, s->tol);
      rep.values["C0"] = sol.C0();
      rep.values["base"] = vector_json(sol.base());
      if (!s->at.empty()) {
        Json u = Json::array();
        for (const auto& p : points(s->at, "--at", 2)) u.push_back(sol.u(p[0], p[1]));
        rep.values["u"] = u;
      }
      if (s->steps > 0) {
        Trajectory tr;
        tr.method = "level-curve";
        for (const auto& [x, y] : sol.trace(s->x_end, s->steps)) {
          tr.times.push_back(x);
          tr.states.push_back({y});
        }
        rep.values["trace_end"] = vector_json(std::vector<double>{tr.times.back(), tr.states.back()[0]});
        rep.values["trace_points"] = tr.size();
        rep.trajectory = std::move(tr);
      }
    };
  });

  reg.add("ode-mu", "apply an integrating factor and re-check exactness", [](CLI::App& a) {
    struct S {
      std::string M, N, mu, region;
      std::size_t grid = realfield::kDefaultGrid;
      double tol = 1e-10;
    };
    auto s = state<S>();
    a.add_option("--M", s->M)->required();
    a.add_option("--N", s->N)->required();
    a.add_option("--mu", s->mu)->required();
    a.add_option("--region", s->region)->required();
    a.add_option("--grid", s->grid)->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      const auto ode = odekit::ExactODE::parse(s->M, s->N);
      const auto r = odekit::integrating_factor_apply(ode, parse(s->mu), region_of(s->region, {ode.x, ode.y}),
                                                      s->grid, s->tol);
      rep.absorb(r.report);
      rep.values["M"] = render(r.transformed.M);
      rep.values["N"] = render(r.transformed.N);
    };
  });

  reg.add("energy", "1-D motion m x'' = F(x) by energy conservation", [](CLI::App& a) {
    struct S {
      std::string force, var = "x";
      double mass = 1.0, x0 = 0.0, v0 = 1.0, t0 = 0.0, x_ref = 0.0;
      std::optional<double> time, position;
      std::size_t samples = 101;
    };
    auto s = state<S>();
    a.add_option("--force", s->force, "F(x)")->required();
    a.add_option("--var", s->var)->capture_default_str();
    a.add_option("--mass", s->mass)->capture_default_str();
    a.add_option("--x0", s->x0)->capture_default_str();
    a.add_option("--v0", s->v0)->capture_default_str();
    a.add_option("--t0", s->t0)->capture_default_str();
    a.add_option("--x-ref", s->x_ref, "U(x_ref) = 0")->capture_default_str();
    auto* t = a.add_option("--time", s->time, "target time");
    a.add_option("--position", s->position, "target position")->excludes(t);
    a.add_option("--samples", s->samples)->capture_default_str();
    return [s](Report& rep) {
      if (!s->time == !s->position) throw UsageError("give exactly one of --time and --position");
      odekit::EnergyProblem p;
      p.force = parse(s->force);
      p.variable = s->var;
      p.mass = s->mass;
      p.x0 = s->x0;
      p.v0 = s->v0;
      p.t0 = s->t0;
      p.x_ref = s->x_ref;
      odekit::EnergyTarget target;
      target.kind = s->time ? odekit::EnergyTarget::Kind::Time : odekit::EnergyTarget::Kind::Position;
      target.value = s->time ? *s->time : *s->position;
      auto r = odekit::energy_solve(p, target, s->samples);
      rep.values["energy"] = r.energy;
      rep.values["t"] = r.trajectory.times.back();
      rep.values["x"] = r.trajectory.states.back()[0];
      rep.values["v"] = r.trajectory.states.back()[1];
      rep.trajectory = std::move(r.trajectory);
    };
  });
}

// ---- odesys ----

void system_options(CLI::App& a, SystemOpts& s, const char* flag = "--f") {
  a.add_option("--vars", s.vars, "state variable names")->capture_default_str();
  a.add_option(flag, s.f, "components separated by ';'")->required();
  a.add_option("--time", s.time, "name of the time variable")->capture_default_str();
}

void add_odesys(Registry& reg) {
  reg.add("rk4", "fixed-step RK4 trajectory", [](CLI::App& a) {
    struct S {
      SystemOpts sys;
      std::string x0;
      double t0 = 0.0, t1 = 1.0, h = 1e-3;
    };
    auto s = state<S>();
    system_options(a, s->sys);
    a.add_option("--x0", s->x0, "initial state")->required();
    a.add_option("--t0", s->t0)->capture_default_str();
    a.add_option("--t1", s->t1)->capture_default_str();
    a.add_option("--h", s->h, "step")->capture_default_str();
    return [s](Report& rep) {
      const auto sys = s->sys.system();
      const auto x0 = numbers(s->x0, "--x0", sys.dimension());
      put_trajectory(rep, odesys::integrate_rk4(sys, x0, s->t0, s->t1, s->h));
    };
  });

  reg.add("drift", "drift of a first integral along an RK4 trajectory", [](CLI::App& a) {
    struct S {
      SystemOpts sys;
      std::string phi, x0;
      double T = 10.0, h = 1e-3;
      odesys::DriftOptions o;
    };
    auto s = state<S>();
    system_options(a, s->sys);
    a.add_option("--phi", s->phi, "candidate first integral")->required();
    a.add_option("--x0", s->x0)->required();
    a.add_option("--T", s->T, "time span")->capture_default_str();
    a.add_option("--h", s->h)->capture_default_str();
    a.add_option("--t0", s->o.t0)->capture_default_str();
    a.add_option("--tol", s->o.tol, "negative: 10 h^4 max(1, |phi|)")->capture_default_str();
    a.add_option("--period", s->o.period, "reduce drift modulo this period")->capture_default_str();
    return [s](Report& rep) {
      const auto sys = s->sys.system();
      auto o = s->o;
      o.time = s->sys.time;
      rep.absorb(odesys::first_integral_drift(parse(s->phi), sys, numbers(s->x0, "--x0", sys.dimension()), s->T,
                                              s->h, o));
    };
  });

  reg.add("eigen", "eigenvalues, eigenvectors and chain depths of a matrix", [](CLI::App& a) {
    auto A = std::make_shared<std::string>();
    a.add_option("--A", *A, "rows ';', entries ','")->required();
    return [A](Report& rep) {
      const auto m = odesys::parse_numeric_matrix(*A);
      const auto eig = odesys::eigen_solve(m);
      Json vals = Json::array(), mult = Json::array(), depth = Json::array(), vecs = Json::array();
      for (const auto& e : eig) {
        vals.push_back(maybe_real(e.value));
        mult.push_back(e.multiplicity);
        depth.push_back(e.chain_depth);
        Json basis = Json::array();
        for (const auto& v : e.eigenvectors) basis.push_back(complex_vector(v));
        vecs.push_back(basis);
      }
      rep.values["eigenvalues"] = vals;
      rep.values["multiplicities"] = mult;
      rep.values["chain_depth"] = depth;
      rep.values["eigenvectors"] = vecs;
      Json cp = Json::array();
      for (const auto& c : odesys::char_poly(m)) cp.push_back(maybe_real(c));
      rep.values["char_poly"] = cp;
    };
  });

  reg.add("linsolve", "x' = A x by e^(tA) and the mode expansion", [](CLI::App& a) {
    struct S {
      std::string A, x0, times;
      double t1 = 1.0;
      std::size_t samples = 11;
    };
    auto s = state<S>();
    a.add_option("--A", s->A)->required();
    a.add_option("--x0", s->x0)->required();
    a.add_option("--t1", s->t1, "final time (uniform samples from 0)")->capture_default_str();
    a.add_option("--samples", s->samples)->capture_default_str();
    a.add_option("--times", s->times, "explicit increasing sample times");
    return [s](Report& rep) {
      const auto m = odesys::parse_numeric_matrix(s->A);
      const auto x0 = numbers(s->x0, "--x0", static_cast<std::size_t>(m.rows()));
      std::vector<double> t;
      if (!s->times.empty()) {
        t = numbers(s->times, "--times");
      } else {
        if (s->samples < 2) throw UsageError("--samples must be at least 2");
        for (std::size_t k = 0; k < s->samples; ++k)
          t.push_back(s->t1 * static_cast<double>(k) / static_cast<double>(s->samples - 1));
      }
      auto sol = odesys::linear_solve(m, x0, t);
      rep.values["fit_residual"] = sol.fit_residual;
      Json modes = Json::array();
      for (const auto& md : sol.modes) {
        Json e = Json::object();
        e["eigenvalue"] = maybe_real(md.eigenvalue);
        e["multiplicity"] = md.multiplicity;
        Json cs = Json::array();
        for (const auto& c : md.coefficients) cs.push_back(complex_vector(c));
        e["coefficients"] = cs;
        modes.push_back(e);
      }
      rep.values["modes"] = modes;
      put_trajectory(rep, std::move(sol.trajectory));
    };
  });

  reg.add("matexp", "matrix exponential e^(tA)", [](CLI::App& a) {
    struct S {
      std::string A;
      double t = 1.0;
    };
    auto s = state<S>();
    a.add_option("--A", s->A)->required();
    a.add_option("--t", s->t)->capture_default_str();
    return [s](Report& rep) {
      rep.values["matrix"] = complex_matrix(odesys::matrix_exp(odesys::parse_numeric_matrix(s->A), s->t));
    };
  });
}

// ---- flow ----

void add_flow(Registry& reg) {
  reg.add("lie", "Lie derivative D_V f", [](CLI::App& a) {
    struct S {
      SystemOpts v;
      std::string f, at;
    };
    auto s = state<S>();
    a.add_option("--vars", s->v.vars)->capture_default_str();
    a.add_option("--V", s->v.f, "field components separated by ';'")->required();
    a.add_option("--f", s->f, "function")->required();
    a.add_option("--at", s->at, "points where the derivative is evaluated");
    return [s](Report& rep) {
      const auto V = s->v.field();
      const auto f = parse(s->f);
      rep.values["derivative"] = render(flow::lie_derivative_expr(V, f));
      if (!s->at.empty()) {
        Json vals = Json::array();
        for (const auto& p : points(s->at, "--at", V.dimension())) vals.push_back(flow::lie_derivative(V, f, p));
        rep.values["value"] = vals;
      }
    };
  });

  reg.add("flow", "Lie-series flow of V, optionally transporting f", [](CLI::App& a) {
    struct S {
      SystemOpts v;
      std::string x0, f;
      double t = 0.1;
      flow::LieSeriesConfig cfg;
      bool infinitesimal = false;
    };
    auto s = state<S>();
    a.add_option("--vars", s->v.vars)->capture_default_str();
    a.add_option("--V", s->v.f, "field components separated by ';'")->required();
    a.add_option("--x0", s->x0)->required();
    a.add_option("--t", s->t)->capture_default_str();
    a.add_option("--order", s->cfg.order)->capture_default_str();
    a.add_option("--max-nodes", s->cfg.max_nodes)->capture_default_str();
    a.add_option("--f", s->f, "function transported by the flow");
    a.add_flag("--infinitesimal", s->infinitesimal, "also report x0 + t V(x0)");
    return [s](Report& rep) {
      const auto V = s->v.field();
      const auto x0 = numbers(s->x0, "--x0", V.dimension());
      const auto r = flow::lie_series_flow(V, x0, s->t, s->cfg);
      rep.values["point"] = vector_json(r.point);
      rep.values["tail"] = r.tail;
      if (!s->f.empty()) rep.values["f"] = flow::transform_function(V, parse(s->f), x0, s->t, s->cfg);
      if (s->infinitesimal) rep.values["infinitesimal"] = vector_json(flow::infinitesimal_transform(V, x0, s->t));
    };
  });

  reg.add("equilibrium", "Newton search for V(x) = 0", [](CLI::App& a) {
    struct S {
      SystemOpts v;
      std::string seed;
      double tol = 1e-12;
      int max_it = 50;
    };
    auto s = state<S>();
    a.add_option("--vars", s->v.vars)->capture_default_str();
    a.add_option("--V", s->v.f, "field components separated by ';'")->required();
    a.add_option("--seed", s->seed)->required();
    a.add_option("--tol", s->tol)->capture_default_str();
    a.add_option("--max-iter", s->max_it)->capture_default_str();
    return [s](Report& rep) {
      const auto V = s->v.field();
      rep.values["point"] =
          vector_json(flow::equilibrium_find(V, numbers(s->seed, "--seed", V.dimension()), s->tol, s->max_it));
    };
  });
}

// ---- charpde ----

struct PdeOpts {
  std::string P, Q, R = "0";
  charpde::QuasilinearPDE pde() const { return charpde::QuasilinearPDE::parse(P, Q, R); }
};

void pde_options(CLI::App& a, PdeOpts& p) {
  a.add_option("--P", p.P)->required();
  a.add_option("--Q", p.Q)->required();
  a.add_option("--R", p.R)->capture_default_str();
}

void add_charpde(Registry& reg) {
  reg.add("pde-char", "trace one characteristic of P z_x + Q z_y = R", [](CLI::App& a) {
    struct S {
      PdeOpts p;
      std::string start;
      double t1 = 1.0, h = 1e-3;
    };
    auto s = state<S>();
    pde_options(a, s->p);
    a.add_option("--start", s->start, "x,y,z")->required();
    a.add_option("--t1", s->t1)->capture_default_str();
    a.add_option("--h", s->h)->capture_default_str();
    return [s](Report& rep) {
      const auto st = numbers(s->start, "--start", 3);
      put_trajectory(rep, charpde::characteristic_trace(s->p.pde(), {st[0], st[1], st[2]}, s->t1, s->h));
    };
  });

  reg.add("pde-solve", "Cauchy problem along an initial curve", [](CLI::App& a) {
    struct S {
      PdeOpts p;
      std::string cx, cy, cz, s_range = "0,1", at;
      charpde::CauchyOptions o;
    };
    auto s = state<S>();
    pde_options(a, s->p);
    a.add_option("--x0", s->cx, "x0(s)")->required();
    a.add_option("--y0", s->cy, "y0(s)")->required();
    a.add_option("--z0", s->cz, "z0(s)")->required();
    a.add_option("--s-range", s->s_range, "a,b")->capture_default_str();
    a.add_option("--at", s->at, "query points x,y;...")->required();
    a.add_option("--h", s->o.h)->capture_default_str();
    a.add_option("--t-max", s->o.t_max)->capture_default_str();
    a.add_option("--newton-tol", s->o.newton_tol)->capture_default_str();
    a.add_option("--max-iter", s->o.max_iterations)->capture_default_str();
    return [s](Report& rep) {
      const auto sr = numbers(s->s_range, "--s-range", 2);
      const auto ic = charpde::InitialCurve::parse(s->cx, s->cy, s->cz, sr[0], sr[1]);
      std::vector<std::array<double, 2>> q;
      for (const auto& p : points(s->at, "--at", 2)) q.push_back({p[0], p[1]});
      const auto sol = charpde::solve_cauchy(s->p.pde(), ic, q, s->o);
      rep.values["z"] = vector_json(sol.z);
      rep.values["s"] = vector_json(sol.s);
      rep.values["t"] = vector_json(sol.t);
      rep.values["iterations"] = sol.iterations;
      rep.values["max_xy_residual"] = sol.max_xy_residual;
    };
  });

  reg.add("pde-residual", "residual of a candidate solution z(x, y)", [](CLI::App& a) {
    struct S {
      PdeOpts p;
      std::string z, psi, g, w = "w", region;
      std::size_t grid = 21;
      double tol = 1e-10;
    };
    auto s = state<S>();
    pde_options(a, s->p);
    a.add_option("--z", s->z, "candidate z(x, y)");
    a.add_option("--psi", s->psi, "first integral psi(x, y) of a homogeneous equation");
    a.add_option("--g", s->g, "profile g(w); checks z = g(psi)");
    a.add_option("--w", s->w, "argument name of g")->capture_default_str();
    a.add_option("--region", s->region)->required();
    a.add_option("--grid", s->grid)->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      const auto pde = s->p.pde();
      const auto region = region_of(s->region, {pde.x, pde.y});
      if (!s->z.empty()) {
        if (!s->psi.empty() || !s->g.empty()) throw UsageError("give --z or --psi/--g, not both");
        rep.absorb(charpde::pde_residual(pde, parse(s->z), region, s->tol, s->grid));
        return;
      }
      if (s->psi.empty() || s->g.empty()) throw UsageError("give --z, or both --psi and --g");
      rep.absorb(charpde::homogeneous_solution_check(pde, parse(s->psi), parse(s->g), region, s->tol, s->grid, s->w));
    };
  });
}

// ---- btlax ----

void add_btlax(Registry& reg) {
  reg.add("bt-check", "residual of a Backlund transformation for a pair (u, v)", [](CLI::App& a) {
    struct S {
      std::string system = "custom", B1, B2, Pu, Qv, x = "x", t = "t", u, v = "0", region = "-2,2,-2,2";
      double a = 1.0;
      std::size_t grid = 21;
      double tol = 1e-9;
    };
    auto s = state<S>();
    a.add_option("--system", s->system, "cr, liouville, sine-gordon or custom")->capture_default_str();
    a.add_option("--a", s->a, "sine-Gordon parameter")->capture_default_str();
    a.add_option("--B1", s->B1);
    a.add_option("--B2", s->B2);
    a.add_option("--Pu", s->Pu);
    a.add_option("--Qv", s->Qv);
    a.add_option("--x", s->x, "first independent variable")->capture_default_str();
    a.add_option("--t", s->t, "second independent variable")->capture_default_str();
    a.add_option("--u", s->u)->required();
    a.add_option("--v", s->v)->capture_default_str();
    a.add_option("--region", s->region)->capture_default_str();
    a.add_option("--grid", s->grid)->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      btlax::BTSystem bt;
      if (s->system == "cr") {
        bt = btlax::cauchy_riemann_bt();
      } else if (s->system == "liouville") {
        bt = btlax::liouville_bt();
      } else if (s->system == "sine-gordon") {
        bt = btlax::sine_gordon_bt(s->a);
      } else if (s->system == "custom") {
        if (s->B1.empty() || s->B2.empty() || s->Pu.empty() || s->Qv.empty())
          throw UsageError("a custom system needs --B1 --B2 --Pu --Qv");
        bt = btlax::BTSystem::parse(s->B1, s->B2, s->Pu, s->Qv, s->x, s->t);
      } else {
        throw UsageError("unknown --system '" + s->system + "'");
      }
      rep.absorb(btlax::bt_residual(bt, parse(s->u), parse(s->v), region_of(s->region, {bt.x, bt.t}), s->tol, s->grid));
    };
  });

  reg.add("sg-kink", "sine-Gordon kink from the vacuum and its check", [](CLI::App& a) {
    struct S {
      double a = 1.0, C = 1.0;
      std::string region = "-2,2,-2,2";
      std::size_t grid = 41;
      double tol = 1e-9;
    };
    auto s = state<S>();
    a.add_option("--a", s->a)->capture_default_str();
    a.add_option("--C", s->C)->capture_default_str();
    a.add_option("--region", s->region)->capture_default_str();
    a.add_option("--grid", s->grid)->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      const auto u = btlax::sine_gordon_kink(s->a, s->C);
      rep.values["u"] = render(u);
      rep.absorb(btlax::bt_residual(btlax::sine_gordon_bt(s->a), u, Expr(0.0), region_of(s->region, {"x", "t"}),
                                    s->tol, s->grid));
    };
  });

  reg.add("kdv-lax", "KdV residual and Lax-pair commuting-flow test", [](CLI::App& a) {
    struct S {
      std::string u, region = "-2,2,-2,2";
      double kappa = 1.0;
      btlax::LaxOptions o;
      double tol = 1e-5, kdv_tol = 1e-10;
      std::size_t grid = 21;
    };
    auto s = state<S>();
    a.add_option("--u", s->u, "u(x, t); default: the soliton");
    a.add_option("--kappa", s->kappa, "soliton parameter")->capture_default_str();
    a.add_option("--lambda", s->o.lambda)->capture_default_str();
    a.add_option("--x0", s->o.x0)->capture_default_str();
    a.add_option("--t0", s->o.t0)->capture_default_str();
    a.add_option("--dx", s->o.dx)->capture_default_str();
    a.add_option("--dt", s->o.dt)->capture_default_str();
    a.add_option("--steps", s->o.steps)->capture_default_str();
    a.add_option("--tol", s->tol, "bound on the commuting-flow deviation")->capture_default_str();
    a.add_option("--kdv-tol", s->kdv_tol)->capture_default_str();
    a.add_option("--region", s->region)->capture_default_str();
    a.add_option("--grid", s->grid)->capture_default_str();
    return [s](Report& rep) {
      const auto u = s->u.empty() ? btlax::kdv_soliton(s->kappa) : parse(s->u);
      const auto lax = btlax::lax_commuting_flow(u, s->o);
      rep.status = lax.deviation <= s->tol ? "pass" : "fail";
      rep.max_residual = lax.deviation;
      rep.tolerance = s->tol;
      rep.values["deviation"] = lax.deviation;
      rep.values["x_then_t"] = vector_json(lax.x_then_t);
      rep.values["t_then_x"] = vector_json(lax.t_then_x);
      const auto kdv = btlax::kdv_residual(u, region_of(s->region, {"x", "t"}), s->kdv_tol, s->grid);
      rep.diagnostics["worst_point"] = vector_json(kdv.worst_point);
      rep.diagnostics["samples"] = kdv.samples_used;
      rep.secondary("kdv", kdv);
    };
  });
}

btlax::ExprVec3 expr_vec3(const std::string& s, const char* what) {
  const auto parts = split(s, ';');
  if (parts.size() != 3) throw UsageError(std::string(what) + " needs three components separated by ';'");
  return {parse(parts[0]), parse(parts[1]), parse(parts[2])};
}

void add_maxwell(Registry& reg) {
  reg.add("maxwell-wave", "build a vacuum plane wave and check Maxwell's equations", [](CLI::App& a) {
    struct S {
      std::string k = "0,0,1", e_dir, region = "-1,1,-1,1,-1,1,0,1";
      btlax::PlaneWaveSpec spec;
      std::size_t grid = 5;
      double tol = 1e-10;
    };
    auto s = state<S>();
    a.add_option("--k", s->k, "propagation direction")->capture_default_str();
    a.add_option("--omega", s->spec.omega)->capture_default_str();
    a.add_option("--wavelength", s->spec.wavelength, "used when omega is 0")->capture_default_str();
    a.add_option("--E0", s->spec.e0, "amplitude")->capture_default_str();
    a.add_option("--alpha", s->spec.alpha, "phase")->capture_default_str();
    a.add_option("--eps0mu0", s->spec.eps0mu0)->capture_default_str();
    a.add_option("--e-dir", s->e_dir, "E0 direction");
    a.add_option("--region", s->region, "x,y,z,t bounds")->capture_default_str();
    a.add_option("--grid", s->grid)->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    return [s](Report& rep) {
      auto spec = s->spec;
      const auto k = numbers(s->k, "--k", 3);
      spec.k_dir = {k[0], k[1], k[2]};
      if (!s->e_dir.empty()) {
        const auto e = numbers(s->e_dir, "--e-dir", 3);
        spec.e_dir = btlax::Vec3{e[0], e[1], e[2]};
      }
      const auto w = btlax::maxwell_plane_wave(spec);
      rep.absorb(btlax::maxwell_residual(w.E, w.B, w.eps0mu0, region_of(s->region, {"x", "y", "z", "t"}), s->tol,
                                         s->grid));
      rep.values["k"] = vec3(w.k);
      rep.values["omega"] = w.omega;
      rep.values["c"] = w.c;
      rep.values["E0"] = vec3(w.e0);
      rep.values["B0"] = vec3(w.b0);
      rep.values["E"] = expr_list({w.E.begin(), w.E.end()});
      rep.values["B"] = expr_list({w.B.begin(), w.B.end()});
      for (const auto& m : w.warnings) rep.diagnostics["warnings"].push_back(m);
    };
  });

  reg.add("maxwell-check", "residuals of the source-free Maxwell equations", [](CLI::App& a) {
    struct S {
      std::string E, B, region = "-1,1,-1,1,-1,1,0,1";
      double eps0mu0 = 1.0;
      std::size_t grid = 5;
      double tol = 1e-10;
      bool wave = false;
    };
    auto s = state<S>();
    a.add_option("--E", s->E, "E components separated by ';'")->required();
    a.add_option("--B", s->B, "B components separated by ';'")->required();
    a.add_option("--eps0mu0", s->eps0mu0)->capture_default_str();
    a.add_option("--region", s->region, "x,y,z,t bounds")->capture_default_str();
    a.add_option("--grid", s->grid)->capture_default_str();
    a.add_option("--tol", s->tol)->capture_default_str();
    a.add_flag("--wave", s->wave, "also check the wave equation for E and B");
    return [s](Report& rep) {
      const auto E = expr_vec3(s->E, "--E");
      const auto B = expr_vec3(s->B, "--B");
      const auto region = region_of(s->region, {"x", "y", "z", "t"});
      rep.absorb(btlax::maxwell_residual(E, B, s->eps0mu0, region, s->tol, s->grid));
      if (s->wave) {
        rep.secondary("wave_E", btlax::wave_equation_residual(E, s->eps0mu0, region, s->tol, s->grid));
        rep.secondary("wave_B", btlax::wave_equation_residual(B, s->eps0mu0, region, s->tol, s->grid));
      }
    };
  });
}

// ---- driver ----

Json echo_inputs(const CLI::App& sub) {
  Json in = Json::object();
  for (const auto* opt : sub.get_options()) {
    const auto& ln = opt->get_lnames();
    if (ln.empty()) continue;
    const auto& name = ln.front();
    if (name == "help" || name == "pretty" || name == "dump-csv") continue;
    std::string value;
    if (opt->count() > 0) {
      if (opt->get_expected_min() == 0) {
        value = opt->as<bool>() ? "true" : "false";
      } else {
        for (const auto& r : opt->results()) value += (value.empty() ? "" : " ") + r;
      }
    } else {
      value = opt->get_default_str();
      if (value.empty()) continue;
    }
    in[name] = value;
  }
  return in;
}

void write_csv(const std::string& path, const Trajectory& tr) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  const std::size_t n = tr.states.empty() ? 0 : tr.states.front().size();
  f << 't';
  for (std::size_t i = 0; i < n; ++i) f << ",x" << i + 1;
  f << '\n';
  char buf[32];
  for (std::size_t k = 0; k < tr.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", tr.times[k]);
    f << buf;
    for (double v : tr.states[k]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      f << ',' << buf;
    }
    f << '\n';
  }
}

void pretty(std::ostream& err, const Report& rep) {
  err << rep.command << ": " << rep.status;
  if (rep.max_residual) err << "  max_residual " << *rep.max_residual;
  if (rep.tolerance) err << "  tol " << *rep.tolerance;
  err << '\n';
  for (auto it = rep.values.begin(); it != rep.values.end(); ++it) err << "  " << it.key() << " = " << it.value().dump() << '\n';
  if (rep.diagnostics.contains("message")) err << "  error: " << rep.diagnostics["message"].get<std::string>() << '\n';
}

/// key = value lines become --key=value flags after the subcommand.
std::vector<std::string> task_args(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read task file '" + path + "'");
  std::string kind;
  std::vector<std::string> flags;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty() || key.find_first_of(" \t") != std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": bad key '" + key + "'");
    if (key == "kind") {
      kind = value;
    } else {
      flags.push_back("--" + key + "=" + value);
    }
  }
  if (kind.empty()) throw UsageError(path + ": missing 'kind'");
  if (kind == "run") throw UsageError(path + ": kind cannot be 'run'");
  flags.insert(flags.begin(), kind);
  return flags;
}

int exit_code_for(const std::string& kind) {
  return kind == "usage" || kind == "syntax" || kind == "unbound_variable" ? 2 : 3;
}

void build(CLI::App& app, Registry& reg) {
  app.require_subcommand(1);
  add_realfield(reg);
  add_cplx(reg);
  add_odekit(reg);
  add_odesys(reg);
  add_flow(reg);
  add_charpde(reg);
  add_btlax(reg);
  add_maxwell(reg);
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool from_task) {
  CLI::App app("intkit: integrability checks and solvers", "intkit");
  Registry reg(app);
  build(app, reg);
  std::string task;
  CLI::App* run_cmd = nullptr;
  if (!from_task) {
    run_cmd = app.add_subcommand("run", "run a key = value task file");
    run_cmd->add_option("--task", task, "task file")->required();
  }

  Report rep;
  if (!args.empty()) rep.command = args.front();
  auto emit = [&](int code) {
    out << dump(rep.to_json()) << '\n';
    if (reg.pretty()) pretty(err, rep);
    return code;
  };

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::ExtrasError& e) {
    rep.error("usage", from_task ? std::string("unknown key in task file: ") + e.what() : std::string(e.what()));
    return emit(2);
  } catch (const CLI::ParseError& e) {
    rep.error("usage", e.what());
    return emit(2);
  }

  if (run_cmd && run_cmd->parsed()) {
    std::vector<std::string> sub;
    try {
      sub = task_args(task);
    } catch (const UsageError& e) {
      rep.command = "run";
      rep.error("usage", e.what());
      return emit(2);
    }
    return run_parsed(sub, out, err, true);
  }

  const Entry* entry = nullptr;
  for (const auto& e : reg.entries())
    if (e.app->parsed()) entry = &e;
  rep.command = entry->app->get_name();
  rep.inputs = echo_inputs(*entry->app);

  std::string kind;
  std::string message;
  try {
    entry->action(rep);
    if (rep.trajectory && !reg.csv().empty()) write_csv(reg.csv(), *rep.trajectory);
    if (!reg.csv().empty() && !rep.trajectory) throw UsageError(rep.command + " produces no trajectory for --dump-csv");
  } catch (const UsageError& e) {
    kind = "usage", message = e.what();
  } catch (const UnboundVariable& e) {
    kind = "unbound_variable", message = e.what();
  } catch (const SyntaxError& e) {
    kind = "syntax", message = e.what();
  } catch (const DomainError& e) {
    kind = "domain", message = e.what();
  } catch (const PreconditionError& e) {
    kind = "precondition", message = e.what();
  } catch (const ConvergenceError& e) {
    kind = "convergence", message = e.what();
  } catch (const NumericError& e) {
    kind = "numeric", message = e.what();
  } catch (const NotDifferentiable& e) {
    kind = "not_differentiable", message = e.what();
  } catch (const Error& e) {
    kind = "error", message = e.what();
  } catch (const std::exception& e) {
    kind = "internal", message = e.what();
  }
  if (!kind.empty()) {
    rep.values = Json::object();
    rep.trajectory.reset();
    rep.error(kind, message);
    return emit(exit_code_for(kind));
  }
  return emit(rep.status == "pass" ? 0 : 1);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    CLI::App app;
    Registry reg(app);
    build(app, reg);
    std::vector<std::string> v;
    for (const auto& e : reg.entries()) v.push_back(e.app->get_name());
    return v;
  }();
  return names;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_parsed(args, out, err, false);
}

}  // namespace intkit::cli
