#include "intkit/cplx.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "intkit/quadrature.hpp"

namespace intkit::cplx {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void singular_sample(const DomainError& e, double t) {
  std::ostringstream os;
  os.precision(17);
  os << "singular sample on the contour at t = " << t << ": " << e.what();
  throw DomainError(os.str(), e.subtree());
}

// Position and velocity of one planar piece as complex numbers.
class PieceEval {
 public:
  explicit PieceEval(const ParametricCurve& c) : names_{c.parameter} {
    if (c.dimension() != 2) throw PreconditionError("contour pieces must be planar curves");
    std::vector<Expr> d{diff(c.components[0], c.parameter), diff(c.components[1], c.parameter)};
    pos_ = ProgramSet(c.components, names_);
    vel_ = ProgramSet(d, names_);
  }
  void operator()(double t, Complex& z, Complex& dz) const {
    const double a[1] = {t};
    double p[2], v[2];
    pos_.real(a, p);
    vel_.real(a, v);
    z = {p[0], p[1]};
    dz = {v[0], v[1]};
  }

 private:
  std::string names_[1];
  ProgramSet pos_, vel_;
};

Complex circle_point(const Contour& c, std::size_t k, std::size_t n) {
  const double t = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
  return c.center + c.radius * std::polar(1.0, c.counterclockwise ? t : -t);
}

}  // namespace

ComplexFunction ComplexFunction::from_z(Expr f, std::string z) {
  ComplexFunction out;
  out.z_ = std::move(z);
  for (const auto& name : variables(f))
    if (name != out.z_) throw UnboundVariable(name);
  const std::string vars[1] = {out.z_};
  out.fz_ = Program(f, vars);
  out.z_form_ = std::move(f);
  return out;
}

ComplexFunction ComplexFunction::from_uv(Expr u, Expr v, std::string x, std::string y) {
  ComplexFunction out;
  out.x_ = std::move(x);
  out.y_ = std::move(y);
  const std::string vars[2] = {out.x_, out.y_};
  for (const Expr* e : {&u, &v})
    for (const auto& name : variables(*e))
      if (name != out.x_ && name != out.y_) throw UnboundVariable(name);
  out.fu_ = Program(u, vars);
  out.fv_ = Program(v, vars);
  out.u_ = std::move(u);
  out.v_ = std::move(v);
  return out;
}

const Expr& ComplexFunction::z_form() const {
  if (!z_form_) throw PreconditionError("function has no z form");
  return *z_form_;
}

const Expr& ComplexFunction::u() const {
  if (!u_) throw PreconditionError("function has no (u, v) form");
  return *u_;
}

const Expr& ComplexFunction::v() const {
  if (!v_) throw PreconditionError("function has no (u, v) form");
  return *v_;
}

Complex ComplexFunction::operator()(Complex z) const {
  if (z_form_) {
    const Complex a[1] = {z};
    return fz_(a);
  }
  const Complex a[2] = {z.real(), z.imag()};
  return fu_(a) + Complex(0, 1) * fv_(a);
}

Contour Contour::circle(Complex center, double radius, bool ccw) {
  if (!(radius > 0)) throw PreconditionError("circle radius must be positive");
  Contour c;
  c.kind = Kind::Circle;
  c.center = center;
  c.radius = radius;
  c.counterclockwise = ccw;
  c.path = ParametricCurve::circle(center.real(), center.imag(), radius, ccw);
  return c;
}

Contour Contour::general(Path path) {
  if (path.pieces.empty()) throw PreconditionError("empty contour");
  for (const auto& p : path.pieces)
    if (p.dimension() != 2) throw PreconditionError("contour pieces must be planar curves");
  Contour c;
  c.path = std::move(path);
  return c;
}

Contour Contour::segment(Complex a, Complex b) {
  const double pa[2] = {a.real(), a.imag()};
  const double pb[2] = {b.real(), b.imag()};
  return general(ParametricCurve::segment(pa, pb));
}

Contour Contour::polygon(const std::vector<Complex>& vertices) {
  if (vertices.size() < 3) throw PreconditionError("polygon needs at least three vertices");
  std::vector<std::vector<double>> pts;
  for (const auto& v : vertices) pts.push_back({v.real(), v.imag()});
  pts.push_back(pts.front());
  return general(Path::polyline(pts));
}

Complex Contour::start() const {
  const auto p = path.start();
  return {p[0], p[1]};
}

Complex Contour::finish() const {
  const auto p = path.finish();
  return {p[0], p[1]};
}

bool Contour::closed() const {
  if (kind == Kind::Circle) return true;
  return std::abs(start() - finish()) <= 1e-10 * (1.0 + std::abs(start()));
}

CheckReport cr_residual(const ComplexFunction& f, const Region& region, std::size_t grid, double tol) {
  const Expr& u = f.u();
  const Expr& v = f.v();
  if (region.dimension() != 2) throw PreconditionError("Cauchy-Riemann check needs a planar region");
  const auto& x = f.x_name();
  const auto& y = f.y_name();
  const Expr exprs[4] = {diff(u, x), diff(v, y), diff(u, y), diff(v, x)};
  const ProgramSet d(exprs, region.variables);
  ResidualTracker tracker;
  double first = 0.0, second = 0.0;
  double vals[4];
  for_each_grid_point(region, grid, [&](std::span<const double> p) {
    d.real(p, vals);
    const double r1 = std::fabs(vals[0] - vals[1]);
    const double r2 = std::fabs(vals[2] + vals[3]);
    first = std::max(first, r1);
    second = std::max(second, r2);
    tracker.observe(std::max(r1, r2), p);
  });
  CheckReport rep = tracker.report(tol);
  rep.components = {{"u_x-v_y", first}, {"u_y+v_x", second}};
  return rep;
}

HarmonicConjugate harmonic_conjugate(const Expr& v, std::span<const double> base, const Region& region,
                                     std::size_t count_per_axis, double laplacian_tol, double cr_tol) {
  if (region.dimension() != 2) throw PreconditionError("harmonic conjugate needs a planar region");
  const std::string& x = region.variables[0];
  const std::string& y = region.variables[1];
  HarmonicConjugate out;
  {
    const Program lap(diff(diff(v, x), x) + diff(diff(v, y), y), region.variables);
    ResidualTracker t;
    for_each_grid_point(region, count_per_axis, [&](std::span<const double> p) { t.observe(std::fabs(lap.real(p)), p); });
    out.laplacian = t.report(laplacian_tol);
  }
  if (!out.laplacian.passed) {
    std::ostringstream os;
    os.precision(6);
    os << "v is not harmonic on the region (max |v_xx + v_yy| = " << out.laplacian.max_residual << ")";
    throw PreconditionError(os.str());
  }
  const Expr vx = diff(v, x);
  const Expr vy = diff(v, y);
  const VectorField grad_u(region.variables, {vy, -vx});
  out.u = realfield::sample_potential(grad_u, base, region, count_per_axis);

  // Off-grid central differences of the reconstruction, step small enough that
  // truncation sits below the quadrature floor.
  constexpr double delta = 1e-4;
  const ProgramSet target(grad_u.components, region.variables);
  ResidualTracker t;
  double f[2];
  for_each_grid_point(region, count_per_axis, [&](std::span<const double> p) {
    target.real(p, f);
    double worst = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      std::vector<double> hi(p.begin(), p.end()), lo(p.begin(), p.end());
      hi[k] += delta;
      lo[k] -= delta;
      const double g = (realfield::potential_reconstruct(grad_u, base, hi, &region) -
                        realfield::potential_reconstruct(grad_u, base, lo, &region)) /
                       (2 * delta);
      worst = std::max(worst, std::fabs(g - f[k]));
    }
    t.observe(worst, p);
  });
  out.cauchy_riemann = t.report(cr_tol);
  return out;
}

Complex contour_integral(const ComplexFunction& f, const Contour& c, std::size_t nodes) {
  if (nodes == 0) throw PreconditionError("contour integral needs at least one node");
  if (c.kind == Contour::Kind::Circle) {
    const double sigma = c.counterclockwise ? 1.0 : -1.0;
    std::vector<Complex> terms(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
      const Complex z = circle_point(c, k, nodes);
      try {
        terms[k] = f(z) * (z - c.center);
      } catch (const DomainError& e) {
        singular_sample(e, kTwoPi * static_cast<double>(k) / static_cast<double>(nodes));
      }
    }
    // dz = i sigma (z - a) dt
    return quad::pairwise_sum(std::span<const Complex>(terms)) * Complex(0, sigma) * (kTwoPi / static_cast<double>(nodes));
  }
  const std::size_t panels = std::max<std::size_t>(1, (nodes + 4) / 5);
  Complex total = 0;
  for (const auto& piece : c.path.pieces) {
    const PieceEval pe(piece);
    auto integrand = [&](double t) {
      Complex z, dz;
      pe(t, z, dz);
      try {
        return f(z) * dz;
      } catch (const DomainError& e) {
        singular_sample(e, t);
      }
    };
    total += quad::composite_gl5(integrand, piece.t_begin, piece.t_end, panels);
  }
  return total;
}

double winding_number(const Contour& c, Complex z0) {
  if (!c.closed()) throw PreconditionError("winding number needs a closed contour");
  if (c.kind == Contour::Kind::Circle) {
    const double d = std::abs(z0 - c.center);
    if (std::fabs(d - c.radius) <= 1e-12 * (1.0 + c.radius)) throw PreconditionError("point lies on the contour");
    if (d > c.radius) return 0.0;
    return c.counterclockwise ? 1.0 : -1.0;
  }
  constexpr std::size_t samples = 4096;
  double total = 0.0;
  for (const auto& piece : c.path.pieces) {
    const PieceEval pe(piece);
    Complex z, dz;
    pe(piece.t_begin, z, dz);
    Complex prev = z - z0;
    for (std::size_t k = 1; k <= samples; ++k) {
      const double t = piece.t_begin + (piece.t_end - piece.t_begin) * static_cast<double>(k) / samples;
      pe(t, z, dz);
      const Complex cur = z - z0;
      if (std::abs(cur) <= 1e-12 * (1.0 + std::abs(z0))) throw PreconditionError("point lies on the contour");
      const double step = std::arg(cur / prev);
      if (std::fabs(step) > 0.75 * std::numbers::pi) throw PreconditionError("point lies on the contour");
      total += step;
      prev = cur;
    }
  }
  return total / kTwoPi;
}

Complex cauchy_value(const Expr& f, Complex z0, const Contour& c, std::size_t nodes, const std::string& z) {
  const double w = winding_number(c, z0);
  if (std::fabs(w - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "z0 is not enclosed once by the contour (winding number " << std::lround(w) << ")";
    throw PreconditionError(os.str());
  }
  const Expr kernel = f / (Expr::variable(z) - Expr(z0));
  return contour_integral(ComplexFunction::from_z(kernel, z), c, nodes) / Complex(0, kTwoPi);
}

std::vector<Complex> laurent_coeffs(const Expr& f, Complex z0, double rho, int n_min, int n_max, std::size_t nodes,
                                    const std::string& z) {
  if (n_min > n_max) throw PreconditionError("empty coefficient range");
  if (!(rho > 0)) throw PreconditionError("radius must be positive");
  if (nodes == 0) throw PreconditionError("need at least one node");
  const ComplexFunction fn = ComplexFunction::from_z(f, z);
  const Contour c = Contour::circle(z0, rho);
  std::vector<Complex> samples(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    try {
      samples[k] = fn(circle_point(c, k, nodes));
    } catch (const DomainError& e) {
      singular_sample(e, kTwoPi * static_cast<double>(k) / static_cast<double>(nodes));
    }
  }
  const long long n_nodes = static_cast<long long>(nodes);
  std::vector<Complex> out;
  std::vector<Complex> terms(nodes);
  for (int n = n_min; n <= n_max; ++n) {
    for (std::size_t k = 0; k < nodes; ++k) {
      // reduce n*k mod N so the twiddle angle stays in [0, 2pi)
      long long r = (static_cast<long long>(n) * static_cast<long long>(k)) % n_nodes;
      if (r < 0) r += n_nodes;
      terms[k] = samples[k] * std::polar(1.0, -kTwoPi * static_cast<double>(r) / static_cast<double>(nodes));
    }
    out.push_back(quad::pairwise_sum(std::span<const Complex>(terms)) / static_cast<double>(nodes) *
                  std::pow(rho, -n));
  }
  return out;
}

Complex antiderivative_eval(const Expr& f, Complex z0, Complex z1, const Contour& path, std::size_t nodes,
                            const std::string& z) {
  const double scale = 1e-10 * (1.0 + std::max(std::abs(z0), std::abs(z1)));
  if (std::abs(path.start() - z0) > scale || std::abs(path.finish() - z1) > scale)
    throw PreconditionError("path does not run from z0 to z1");
  return contour_integral(ComplexFunction::from_z(f, z), path, nodes);
}

Complex antiderivative_eval(const Expr& f, Complex z0, Complex z1, std::size_t nodes, const std::string& z) {
  if (z0 == z1) return 0.0;
  return antiderivative_eval(f, z0, z1, Contour::segment(z0, z1), nodes, z);
}

}  // namespace intkit::cplx
