#pragma once

// First-order exact equations, integrating factors, order-reduction
// residuals and the energy quadrature for m x'' = F(x).

#include <optional>
#include <vector>

#include "intkit/realfield.hpp"
#include "intkit/trajectory.hpp"

namespace intkit::odekit {

/// M(x, y) dx + N(x, y) dy = 0.
struct ExactODE {
  Expr M, N;
  std::string x = "x", y = "y";

  static ExactODE parse(const std::string& m, const std::string& n);
  VectorField field() const;
};

CheckReport exact_check(const ExactODE& ode, const Region& region, std::size_t grid = realfield::kDefaultGrid,
                        double tol = 1e-10);

/// Implicit solution u(x, y) = C0 with u(base) = 0.
class ExactSolution {
 public:
  ExactSolution(ExactODE ode, Region region, std::vector<double> base, double x0, double y0);

  double C0() const noexcept { return c0_; }
  const std::vector<double>& base() const noexcept { return base_; }
  double u(double x, double y) const;
  /// Newton on u(x, .) = C0 starting at y_guess (steps along u_y = N).
  double solve_y(double x, double y_guess) const;
  /// Points (x, y) on the level curve through (x0, y0), continued to x_end.
  std::vector<std::pair<double, double>> trace(double x_end, std::size_t steps) const;

 private:
  ExactODE ode_;
  Region region_;
  VectorField field_;
  std::vector<double> base_;
  double x0_, y0_, c0_;
  Program m_, n_;
};

/// Refuses a non-exact ODE. The base point defaults to the origin when the
/// region contains it, otherwise to the region's lower corner.
ExactSolution exact_solve(const ExactODE& ode, double x0, double y0, const Region& region,
                          std::optional<std::vector<double>> base = std::nullopt,
                          std::size_t grid = realfield::kDefaultGrid, double tol = 1e-10);

struct IntegratingFactorResult {
  CheckReport report;
  ExactODE transformed;
};

IntegratingFactorResult integrating_factor_apply(const ExactODE& ode, const Expr& mu, const Region& region,
                                                 std::size_t grid = realfield::kDefaultGrid, double tol = 1e-10);

/// max over x in [lo, hi] of |d/dx Phi(x, y, y1, ...)| along the candidate
/// y(x). Phi may use derivative names up to y{order-1}; order 0 infers it.
CheckReport reduction_residual(const Expr& phi, const Expr& candidate, Interval range, double tol = 1e-9,
                               std::size_t order = 0, std::size_t samples = 201, const std::string& x = "x",
                               const std::string& y = "y");

struct EnergyProblem {
  Expr force;  // F(x)
  std::string variable = "x";
  double mass = 1.0;
  double x0 = 0.0;
  double v0 = 1.0;
  double t0 = 0.0;
  double x_ref = 0.0;  // U(x_ref) = 0
};

/// Closed-form-free motion on one monotone branch: t(x) by quadrature of
/// dx / v(x), x(t) by inverting it.
class EnergySolver {
 public:
  explicit EnergySolver(EnergyProblem p);

  const EnergyProblem& problem() const noexcept { return p_; }
  double energy() const noexcept { return energy_; }
  double potential(double x) const;
  bool potential_is_polynomial() const noexcept { return poly_.has_value(); }
  /// Signed speed on the branch; PreconditionError at or past a turning point.
  double velocity(double x) const;
  double time_at(double x) const;
  double position_at(double t) const;

 private:
  // Last admissible x before E - U drops below the margin, scanning from -> to.
  std::optional<double> turning_boundary(double from, double to) const;
  void require_branch(double from, double to) const;
  double turning_margin() const;

  EnergyProblem p_;
  std::optional<std::vector<double>> poly_;  // U coefficients, ascending
  Program force_;
  double energy_ = 0.0;
  double sign_ = 1.0;
};

struct EnergyTarget {
  enum class Kind { Position, Time };
  Kind kind = Kind::Time;
  double value = 0.0;
};

struct EnergyResult {
  Trajectory trajectory;  // states are (x, v)
  double energy = 0.0;
};

EnergyResult energy_solve(const EnergyProblem& p, EnergyTarget target, std::size_t samples = 101);

}  // namespace intkit::odekit
