#pragma once

#include <span>
#include <string>
#include <vector>

#include "intkit/expr.hpp"

namespace intkit {

/// n component expressions over n named variables.
struct VectorField {
  std::vector<std::string> variables;
  std::vector<Expr> components;
  /// Names besides `variables` that components may reference (e.g. time).
  std::vector<std::string> parameters;

  VectorField() = default;
  VectorField(std::vector<std::string> vars, std::vector<Expr> comps,
              std::vector<std::string> params = {});
  static VectorField parse(std::vector<std::string> vars, const std::vector<std::string>& comps,
                           std::vector<std::string> params = {});

  std::size_t dimension() const noexcept { return variables.size(); }
  /// variables followed by parameters, the argument order of compiled programs.
  std::vector<std::string> argument_names() const;
};

/// Curve x_k(t) for t in [t_begin, t_end].
struct ParametricCurve {
  std::string parameter = "t";
  std::vector<Expr> components;
  double t_begin = 0.0;
  double t_end = 1.0;
  bool closed = false;

  ParametricCurve() = default;
  ParametricCurve(std::vector<Expr> comps, double ta, double tb, bool is_closed = false,
                  std::string param = "t");

  std::size_t dimension() const noexcept { return components.size(); }
  std::vector<double> point(double t) const;
  std::vector<double> start() const { return point(t_begin); }
  std::vector<double> finish() const { return point(t_end); }
  /// Same trace, opposite orientation (t -> t_begin + t_end - t).
  ParametricCurve reversed() const;

  static ParametricCurve segment(std::span<const double> a, std::span<const double> b);
  /// Circle in the plane, t in [0, 2pi]; counterclockwise unless ccw is false.
  static ParametricCurve circle(double cx, double cy, double radius, bool ccw = true);
};

/// Piecewise curve: pieces traversed in order, each ending where the next starts.
struct Path {
  std::vector<ParametricCurve> pieces;

  Path() = default;
  Path(ParametricCurve single) : pieces{std::move(single)} {}  // NOLINT(google-explicit-constructor)
  explicit Path(std::vector<ParametricCurve> ps) : pieces(std::move(ps)) {}

  std::vector<double> start() const { return pieces.front().start(); }
  std::vector<double> finish() const { return pieces.back().finish(); }
  Path reversed() const;

  /// Straight segments through the given vertices.
  static Path polyline(const std::vector<std::vector<double>>& vertices);
};

/// Shortcut for compiling a list of expressions into real evaluators.
ProgramSet compile_real(std::span<const Expr> exprs, std::span<const std::string> vars);

}  // namespace intkit
