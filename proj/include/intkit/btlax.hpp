#pragma once

// Backlund transformations, Lax pairs and plane electromagnetic waves:
// residual checks with symbolic derivatives.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "intkit/odesys.hpp"
#include "intkit/region.hpp"

namespace intkit::btlax {

/// B1 = B2 = 0 couples u and v; Pu, Qv are the target equations.
/// Derivatives are written u_x, v_t, u_xt, ... (independent names must be one letter).
struct BTSystem {
  Expr B1, B2, Pu, Qv;
  std::string x = "x", t = "t";
  std::string u = "u", v = "v";

  static BTSystem parse(std::string_view b1, std::string_view b2, std::string_view pu, std::string_view qv,
                        std::string x = "x", std::string t = "t");
};

/// u_x = v_y, u_y = -v_x over (x, y); Laplace for both.
BTSystem cauchy_riemann_bt();
/// u_x + v_x = sqrt2 e^((u-v)/2), u_t - v_t = sqrt2 e^((u+v)/2); u_xt = e^u, v_xt = 0.
BTSystem liouville_bt();
/// (u+v)_x / 2 = a sin((u-v)/2), (u-v)_t / 2 = sin((u+v)/2) / a; sine-Gordon for both.
BTSystem sine_gordon_bt(double a);

/// Components "B1", "B2", "Pu", "Qv"; passes when all four are within tol.
CheckReport bt_residual(const BTSystem& bt, const Expr& u, const Expr& v, const Region& region, double tol = 1e-9,
                        std::size_t grid = 21);

/// -2 ln(C - (x+t)/sqrt2).
Expr liouville_solution(double c);

/// 4 atan(C exp(a x + t/a)); checked against u_xt = sin u on [-2, 2]^2 before returning.
Expr sine_gordon_kink(double a, double c = 1.0);

/// -2 k^2 sech^2(k (x - 4 k^2 t)).
Expr kdv_soliton(double kappa);

/// max |u_t - 6 u u_x + u_xxx|.
CheckReport kdv_residual(const Expr& u, const Region& region, double tol = 1e-10, std::size_t grid = 21);

struct LaxOptions {
  double lambda = 0.3;
  std::array<double, 2> psi0{1.0, 0.0};  // (psi, psi_x) at the corner
  double x0 = 0.0, t0 = 0.0;
  double dx = 0.2, dt = 0.2;
  std::size_t steps = 8;  // RK4 steps per edge
};

struct LaxResult {
  double deviation = 0.0;
  std::array<double, 2> x_then_t{}, t_then_x{};
};

/// Transports (psi, psi_x) around the rectangle [x0, x0+dx] x [t0, t0+dt] in
/// both orders using psi_xx = (u - lambda) psi and psi_t = 2(u + 2 lambda) psi_x - u_x psi.
LaxResult lax_commuting_flow(const Expr& u, const LaxOptions& opts = {});

/// max |d_t(g^-1 g_x) + d_x(g^-1 g_t)|_F over (x, t).
CheckReport chiral_residual(const odesys::ExprMatrix& g, const Region& region, double tol = 1e-10,
                            std::size_t grid = 21);

using Vec3 = std::array<double, 3>;
using ExprVec3 = std::array<Expr, 3>;

struct PlaneWaveSpec {
  Vec3 k_dir{0, 0, 1};
  double omega = 0.0;       // angular frequency, or
  double wavelength = 0.0;  // used when omega is 0
  double e0 = 1.0;          // |E0R|
  double alpha = 0.0;
  double eps0mu0 = 1.0;
  std::optional<Vec3> e_dir;  // projected onto the plane normal to k
};

struct PlaneWave {
  Vec3 k{}, e0{}, b0{};
  double omega = 0.0, alpha = 0.0, c = 1.0, eps0mu0 = 1.0;
  ExprVec3 E, B;  // over x, y, z, t
  std::vector<std::string> warnings;
};

PlaneWave maxwell_plane_wave(const PlaneWaveSpec& spec);

/// Components "div E", "div B", "curl E + B_t", "curl B - eps0mu0 E_t" over (x, y, z, t).
CheckReport maxwell_residual(const ExprVec3& e, const ExprVec3& b, double eps0mu0, const Region& region,
                             double tol = 1e-10, std::size_t grid = 5);

/// max over components of |lap A - eps0mu0 A_tt|.
CheckReport wave_equation_residual(const ExprVec3& a, double eps0mu0, const Region& region, double tol = 1e-10,
                                   std::size_t grid = 5);

}  // namespace intkit::btlax
