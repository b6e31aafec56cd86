#pragma once

// Vector fields acting as first-order operators: Lie derivatives, Lie-series
// flow maps, equilibria, level surfaces.

#include <span>
#include <vector>

#include "intkit/field.hpp"
#include "intkit/odesys.hpp"
#include "intkit/region.hpp"

namespace intkit::flow {

struct LieSeriesConfig {
  int order = 10;                // N, at most 12
  std::size_t max_nodes = 50000; // per expanded expression
};

/// Symbolic V f = sum_i V^i df/dx^i.
Expr lie_derivative_expr(const VectorField& v, const Expr& f);
double lie_derivative(const VectorField& v, const Expr& f, std::span<const double> p);

struct LieSeriesResult {
  std::vector<double> point;
  double tail = 0.0;  // max_i |t^N/N! D^N x^i|, a heuristic error bar
};

/// Coordinates pushed through exp(tV), truncated at order N. The iterated
/// expressions D_V^l x^i are built once per instance.
class LieSeries {
 public:
  LieSeries(VectorField v, LieSeriesConfig cfg = {});

  LieSeriesResult operator()(std::span<const double> x0, double t) const;
  const VectorField& field() const noexcept { return v_; }
  /// D_V^l x^i.
  const Expr& term(int l, std::size_t i) const { return terms_[static_cast<std::size_t>(l)][i]; }

 private:
  VectorField v_;
  LieSeriesConfig cfg_;
  std::vector<std::vector<Expr>> terms_;
  std::vector<ProgramSet> programs_;
};

LieSeriesResult lie_series_flow(const VectorField& v, std::span<const double> x0, double t,
                                const LieSeriesConfig& cfg = {});

/// x0 + t V(x0).
std::vector<double> infinitesimal_transform(const VectorField& v, std::span<const double> x0, double t);

/// F at the flowed point.
double transform_function(const VectorField& v, const Expr& f, std::span<const double> x0, double t,
                          const LieSeriesConfig& cfg = {});

/// Newton on V(x) = 0 with the symbolic Jacobian, halving steps that raise |V|.
std::vector<double> equilibrium_find(const VectorField& v, std::span<const double> seed, double tol = 1e-12,
                                     int max_iterations = 50);

/// max_t |Phi(x(t)) - Phi(x0)| along an RK4 trajectory; component "C" is Phi(x0).
CheckReport level_surface_membership(const Expr& phi, const odesys::AutonomousSystem& sys,
                                     std::span<const double> x0, double T, double h, double tol = 1e-9);

}  // namespace intkit::flow
