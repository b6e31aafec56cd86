#include "intkit/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace intkit {

VectorField::VectorField(std::vector<std::string> vars, std::vector<Expr> comps,
                         std::vector<std::string> params)
    : variables(std::move(vars)), components(std::move(comps)), parameters(std::move(params)) {
  if (components.size() != variables.size())
    throw PreconditionError("vector field needs one component per variable");
  const auto allowed = argument_names();
  for (const auto& c : components)
    for (const auto& name : intkit::variables(c))
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
        throw UnboundVariable(name);
}

VectorField VectorField::parse(std::vector<std::string> vars, const std::vector<std::string>& comps,
                               std::vector<std::string> params) {
  std::vector<Expr> exprs;
  exprs.reserve(comps.size());
  for (const auto& s : comps) exprs.push_back(intkit::parse(s));
  return VectorField(std::move(vars), std::move(exprs), std::move(params));
}

std::vector<std::string> VectorField::argument_names() const {
  std::vector<std::string> all = variables;
  all.insert(all.end(), parameters.begin(), parameters.end());
  return all;
}

ParametricCurve::ParametricCurve(std::vector<Expr> comps, double ta, double tb, bool is_closed,
                                 std::string param)
    : parameter(std::move(param)), components(std::move(comps)), t_begin(ta), t_end(tb), closed(is_closed) {
  if (!(t_begin < t_end)) throw PreconditionError("curve parameter interval must satisfy t_a < t_b");
  for (const auto& c : components)
    for (const auto& name : intkit::variables(c))
      if (name != parameter) throw UnboundVariable(name);
  if (closed) {
    const auto a = start();
    const auto b = finish();
    for (std::size_t k = 0; k < a.size(); ++k)
      if (std::fabs(a[k] - b[k]) > 1e-10) throw PreconditionError("closed curve endpoints do not agree");
  }
}

std::vector<double> ParametricCurve::point(double t) const {
  std::vector<double> p;
  p.reserve(components.size());
  const std::string names[1] = {parameter};
  for (const auto& c : components) {
    const double args[1] = {t};
    p.push_back(Program(c, names).real(args));
  }
  return p;
}

ParametricCurve ParametricCurve::reversed() const {
  const Expr flipped = Expr(t_begin + t_end) - Expr::variable(parameter);
  std::vector<Expr> comps;
  comps.reserve(components.size());
  for (const auto& c : components) comps.push_back(substitute(c, {{parameter, flipped}}));
  ParametricCurve r;
  r.parameter = parameter;
  r.components = std::move(comps);
  r.t_begin = t_begin;
  r.t_end = t_end;
  r.closed = closed;
  return r;
}

ParametricCurve ParametricCurve::segment(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("segment endpoints differ in dimension");
  const Expr t = Expr::variable("t");
  std::vector<Expr> comps;
  for (std::size_t k = 0; k < a.size(); ++k) comps.push_back(Expr(a[k]) + Expr(b[k] - a[k]) * t);
  return ParametricCurve(std::move(comps), 0.0, 1.0);
}

ParametricCurve ParametricCurve::circle(double cx, double cy, double radius, bool ccw) {
  const Expr t = Expr::variable("t");
  const Expr angle = ccw ? t : -t;
  return ParametricCurve({Expr(cx) + Expr(radius) * cos(angle), Expr(cy) + Expr(radius) * sin(angle)}, 0.0,
                         2.0 * std::numbers::pi, true);
}

Path Path::reversed() const {
  std::vector<ParametricCurve> out;
  for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) out.push_back(it->reversed());
  return Path(std::move(out));
}

Path Path::polyline(const std::vector<std::vector<double>>& vertices) {
  if (vertices.size() < 2) throw PreconditionError("polyline needs at least two vertices");
  std::vector<ParametricCurve> out;
  for (std::size_t k = 0; k + 1 < vertices.size(); ++k)
    out.push_back(ParametricCurve::segment(vertices[k], vertices[k + 1]));
  return Path(std::move(out));
}

ProgramSet compile_real(std::span<const Expr> exprs, std::span<const std::string> vars) {
  return ProgramSet(exprs, vars);
}

}  // namespace intkit
