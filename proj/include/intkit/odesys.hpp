#pragma once

// ODE systems: RK4 trajectories, first-integral drift, dependence of
// integrals; constant-coefficient linear systems through eigenstructure and
// the matrix exponential; matrix differential identities.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "intkit/field.hpp"
#include "intkit/region.hpp"
#include "intkit/trajectory.hpp"

namespace intkit::odesys {

/// dx_i/dt = f_i(x); when `time` is set the components may also use it.
struct AutonomousSystem {
  VectorField field;
  std::optional<std::string> time;

  AutonomousSystem() = default;
  explicit AutonomousSystem(VectorField f, std::optional<std::string> time_name = std::nullopt);
  static AutonomousSystem parse(std::vector<std::string> vars, const std::vector<std::string>& comps,
                                std::optional<std::string> time_name = std::nullopt);

  std::size_t dimension() const noexcept { return field.dimension(); }
  RhsFunction rhs() const;
};

Trajectory integrate_rk4(const AutonomousSystem& sys, std::span<const double> x0, double t0, double t_end,
                         double h);

struct DriftOptions {
  double t0 = 0.0;
  std::string time = "t";  // name Phi may use for time
  /// Negative: 10 h^4 max(1, max |Phi|).
  double tol = -1.0;
  /// Nonzero: drift measured modulo this period (branch jumps of atan etc.).
  double period = 0.0;
};

/// max_t |Phi(x(t), t) - Phi(x0, t0)| along an RK4 trajectory of length T.
CheckReport first_integral_drift(const Expr& phi, const AutonomousSystem& sys, std::span<const double> x0,
                                 double T, double h, const DriftOptions& opts = {});

struct DependenceReport {
  bool detected = false;
  std::string relation;  // e.g. "Phi1*Phi2", "Phi2/Phi1", "c0 + c1*Phi1 + c2*Phi2"
  std::vector<double> coefficients;
  double residual = 0.0;  // relative least-squares residual of the best template
  std::size_t samples = 0;
};

/// Tests candidate = g(Phi_1, ...) for g among scaled products, ratios and
/// affine combinations, by least squares at random points of `box`.
DependenceReport dependent_integral_check(const std::vector<Expr>& integrals, const Expr& candidate,
                                          const Region& box, std::size_t points = 64, std::uint64_t seed = 1,
                                          double tol = 1e-8);

// ---- constant-coefficient linear algebra ----

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Coefficients of det(k 1 - A), leading first: result[j] multiplies k^(n-j).
std::vector<Complex> char_poly(const Matrix& a);

struct Eigenpair {
  Complex value;
  std::size_t multiplicity = 1;
  std::vector<Vector> eigenvectors;  // basis of ker(A - k 1), unit norm
  std::size_t chain_depth = 1;       // smallest j with rank (A - k 1)^j = n - multiplicity
};

std::vector<Eigenpair> eigen_solve(const Matrix& a);

/// Roots of a monic polynomial (leading-first coefficients) by Durand-Kerner.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& monic);

Matrix matrix_exp(const Matrix& a, double t = 1.0);

struct ModeFit {
  Complex eigenvalue;
  std::size_t multiplicity = 1;
  /// coefficients[j] is the vector multiplying t^j e^(k t).
  std::vector<Vector> coefficients;
};

struct LinearSolution {
  Trajectory trajectory;  // x(t) = e^(tA) x0
  std::vector<Eigenpair> eigen;
  std::vector<ModeFit> modes;
  double fit_residual = 0.0;  // max |x(t) - sum_modes| over t_eval
};

LinearSolution linear_solve(const Matrix& a, std::span<const double> x0, std::span<const double> t_eval);

/// e^(-tA) u0 e^(tA), the solution of du/dt = [u, A].
Matrix commutator_flow(const Matrix& a, const Matrix& u0, double t);

/// Square matrix with expression entries, row-major.
struct ExprMatrix {
  std::size_t n = 0;
  std::vector<Expr> entries;

  const Expr& operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
  Expr& operator()(std::size_t i, std::size_t j) { return entries[i * n + j]; }
  Matrix evaluate(std::span<const std::string> vars, std::span<const double> at) const;
};

/// Rows separated by ';', entries by ','. Entries are expressions.
ExprMatrix parse_matrix(const std::string& text);
/// Numeric matrix from text whose entries are constants.
Matrix parse_numeric_matrix(const std::string& text);

/// Residuals of the zero-curvature identities for A(x, y) (both forms), the
/// conjugation identity, and the inverse-derivative rule along `curve`
/// (default: the region's diagonal). A must be at most 3x3.
CheckReport matrix_identity_check(const ExprMatrix& a, const Region& region, std::size_t grid = 11,
                                  double tol = 1e-8, std::optional<ParametricCurve> curve = std::nullopt);

double frobenius(const Matrix& m);

}  // namespace intkit::odesys
