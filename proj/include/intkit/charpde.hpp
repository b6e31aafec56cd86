#pragma once

// First-order quasilinear PDEs P z_x + Q z_y = R by characteristics, with
// residual checks and gradient (normal-surface) checks.

#include <array>
#include <string>
#include <vector>

#include "intkit/field.hpp"
#include "intkit/region.hpp"
#include "intkit/trajectory.hpp"

namespace intkit::charpde {

struct QuasilinearPDE {
  Expr P, Q, R;
  std::string x = "x", y = "y", z = "z";

  static QuasilinearPDE parse(std::string_view p, std::string_view q, std::string_view r);
  /// R identically 0 and P, Q free of z.
  bool homogeneous_linear() const;
  std::vector<std::string> names() const { return {x, y, z}; }
};

/// Cauchy data (x0(s), y0(s), z0(s)) for s in [s_a, s_b].
struct InitialCurve {
  std::string parameter = "s";
  Expr x0, y0, z0;
  double s_a = 0.0, s_b = 1.0;

  static InitialCurve parse(std::string_view x0, std::string_view y0, std::string_view z0, double s_a, double s_b,
                            std::string parameter = "s");
};

/// RK4 on dx/dt = P, dy/dt = Q, dz/dt = R. A state norm above 1e12 aborts
/// with NumericError naming the last good t.
Trajectory characteristic_trace(const QuasilinearPDE& pde, const std::array<double, 3>& start, double t_end,
                                double h = 1e-3);

struct CauchyOptions {
  double h = 1e-3;
  double newton_tol = 1e-11;
  double t_max = 5.0;
  int max_iterations = 50;
};

struct CauchySolution {
  std::vector<double> z;
  std::vector<double> s, t;      // characteristic coordinates of each query
  std::vector<int> iterations;
  double max_xy_residual = 0.0;  // worst |(x, y)(s, t) - query| at the solution
};

/// z at each (x, y) by inverting the characteristic map (s, t) -> (x, y).
CauchySolution solve_cauchy(const QuasilinearPDE& pde, const InitialCurve& ic,
                            const std::vector<std::array<double, 2>>& queries, const CauchyOptions& opts = {});

/// max |P z_x + Q z_y - R| with z = z(x, y) substituted.
CheckReport pde_residual(const QuasilinearPDE& pde, const Expr& z, const Region& region, double tol = 1e-10,
                         std::size_t grid = 21);

/// Residual of z = G(psi(x, y)) for a homogeneous linear PDE; G is in `w`.
CheckReport homogeneous_solution_check(const QuasilinearPDE& pde, const Expr& psi, const Expr& g,
                                       const Region& region, double tol = 1e-10, std::size_t grid = 21,
                                       std::string_view w = "w");

/// max |grad U - V|_inf over the grid, refused unless curl V vanishes there.
CheckReport normal_surface_check(const VectorField& v, const Expr& u, const Region& region, double tol = 1e-9,
                                 std::size_t grid = 11);

}  // namespace intkit::charpde
