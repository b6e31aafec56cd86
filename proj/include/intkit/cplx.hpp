#pragma once

// Complex-plane calculus: Cauchy-Riemann residuals, contour integrals on
// circles and general paths, Cauchy's formula, Laurent coefficients.

#include <optional>
#include <span>
#include <vector>

#include "intkit/field.hpp"
#include "intkit/realfield.hpp"
#include "intkit/region.hpp"

namespace intkit::cplx {

inline constexpr std::size_t kDefaultNodes = 256;

/// w = f(z), given either as one expression in z or as u(x,y) + i v(x,y).
class ComplexFunction {
 public:
  static ComplexFunction from_z(Expr f, std::string z = "z");
  static ComplexFunction from_uv(Expr u, Expr v, std::string x = "x", std::string y = "y");
  static ComplexFunction parse_z(const std::string& f) { return from_z(intkit::parse(f)); }
  static ComplexFunction parse_uv(const std::string& u, const std::string& v) {
    return from_uv(intkit::parse(u), intkit::parse(v));
  }

  bool has_z_form() const noexcept { return z_form_.has_value(); }
  const Expr& z_form() const;
  const Expr& u() const;
  const Expr& v() const;
  const std::string& x_name() const noexcept { return x_; }
  const std::string& y_name() const noexcept { return y_; }

  Complex operator()(Complex z) const;

 private:
  std::optional<Expr> z_form_;
  std::optional<Expr> u_, v_;
  std::string z_ = "z", x_ = "x", y_ = "y";
  Program fz_, fu_, fv_;
};

/// z(t) = x(t) + i y(t). Circles are kept analytic so the trapezoid rule applies.
struct Contour {
  enum class Kind { Circle, General };
  Kind kind = Kind::General;
  Complex center{};
  double radius = 0.0;
  bool counterclockwise = true;
  Path path;

  static Contour circle(Complex center, double radius, bool ccw = true);
  static Contour general(Path path);
  static Contour segment(Complex a, Complex b);
  static Contour polygon(const std::vector<Complex>& vertices);  // closed automatically

  Complex start() const;
  Complex finish() const;
  bool closed() const;
};

/// max over the grid of max(|u_x - v_y|, |u_y + v_x|); needs the (u, v) form.
CheckReport cr_residual(const ComplexFunction& f, const Region& region, std::size_t grid = realfield::kDefaultGrid,
                        double tol = 1e-10);

struct HarmonicConjugate {
  realfield::SampledPotential u;  // u(base) = 0
  CheckReport laplacian;          // |v_xx + v_yy| on the grid
  CheckReport cauchy_riemann;     // CR residual of the reconstructed u against v
};

/// u with u_x = v_y, u_y = -v_x by line integration from `base`. Refuses a
/// v whose Laplacian exceeds `laplacian_tol` somewhere on the grid.
HarmonicConjugate harmonic_conjugate(const Expr& v, std::span<const double> base, const Region& region,
                                     std::size_t count_per_axis = 21, double laplacian_tol = 1e-8,
                                     double cr_tol = 1e-7);

/// Trapezoid rule with `nodes` points on circles; Gauss-Legendre panels
/// totalling about `nodes` points per piece on general contours.
Complex contour_integral(const ComplexFunction& f, const Contour& c, std::size_t nodes = kDefaultNodes);

/// Winding number of a closed contour about z0 by argument accumulation.
/// Throws PreconditionError if z0 lies on (or numerically at) the contour.
double winding_number(const Contour& c, Complex z0);

/// (1 / 2 pi i) of the contour integral of f / (z - z0); z0 must be enclosed once.
Complex cauchy_value(const Expr& f, Complex z0, const Contour& c, std::size_t nodes = kDefaultNodes,
                     const std::string& z = "z");

/// a_n for n in [n_min, n_max] from one pass of samples on |z - z0| = rho.
std::vector<Complex> laurent_coeffs(const Expr& f, Complex z0, double rho, int n_min, int n_max,
                                    std::size_t nodes = kDefaultNodes, const std::string& z = "z");

/// Integral of f from z0 to z1 along `path` (which must start at z0 and end at z1).
Complex antiderivative_eval(const Expr& f, Complex z0, Complex z1, const Contour& path,
                            std::size_t nodes = kDefaultNodes, const std::string& z = "z");
/// Same along the straight segment z0 -> z1.
Complex antiderivative_eval(const Expr& f, Complex z0, Complex z1, std::size_t nodes = kDefaultNodes,
                            const std::string& z = "z");

}  // namespace intkit::cplx
