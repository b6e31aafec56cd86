#include "intkit/realfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "intkit/quadrature.hpp"

namespace intkit::realfield {

namespace {

std::string format_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
  os << ')';
  return os.str();
}

[[noreturn]] void rethrow_at(const DomainError& e, const std::string& where) {
  throw DomainError(std::string(e.what()) + " at " + where, e.subtree());
}

void require_dimension(const VectorField& f) {
  if (f.dimension() != 2 && f.dimension() != 3)
    throw PreconditionError("differential forms are supported on R^2 and R^3 only");
}

}  // namespace

CheckReport exactness_check(const VectorField& field, const Region& region, std::size_t grid, double tol) {
  require_dimension(field);
  if (region.dimension() != field.dimension()) throw PreconditionError("region dimension mismatch");
  const auto& v = field.variables;
  const auto& c = field.components;
  // Each residual is a pair (d c[i] / d v[j]) - (d c[j] / d v[i]).
  std::vector<std::pair<Expr, Expr>> pairs;
  std::vector<std::string> names;
  if (field.dimension() == 2) {
    pairs.emplace_back(diff(c[0], v[1]), diff(c[1], v[0]));
    names.push_back("dP/dy-dQ/dx");
  } else {
    pairs.emplace_back(diff(c[2], v[1]), diff(c[1], v[2]));
    pairs.emplace_back(diff(c[0], v[2]), diff(c[2], v[0]));
    pairs.emplace_back(diff(c[1], v[0]), diff(c[0], v[1]));
    names = {"dR/dy-dQ/dz", "dP/dz-dR/dx", "dQ/dx-dP/dy"};
  }
  const auto args = region.variables;
  std::vector<std::pair<Program, Program>> progs;
  for (const auto& [a, b] : pairs) progs.emplace_back(Program(a, args), Program(b, args));

  ResidualTracker total;
  std::vector<double> component_max(progs.size(), 0.0);
  for_each_grid_point(region, grid, [&](std::span<const double> p) {
    double worst = 0.0;
    try {
      for (std::size_t k = 0; k < progs.size(); ++k) {
        const double r = std::fabs(progs[k].first.real(p) - progs[k].second.real(p));
        component_max[k] = std::max(component_max[k], r);
        worst = std::max(worst, r);
      }
    } catch (const DomainError& e) {
      rethrow_at(e, format_point(p));
    }
    total.observe(worst, p);
  });
  CheckReport rep = total.report(tol);
  for (std::size_t k = 0; k < names.size(); ++k) rep.components.emplace_back(names[k], component_max[k]);
  return rep;
}

namespace {

double piece_integral(const ProgramSet& field, const ParametricCurve& piece, std::size_t panels, double& error) {
  std::vector<Expr> derivs;
  for (const auto& c : piece.components) derivs.push_back(diff(c, piece.parameter));
  const std::string pname[1] = {piece.parameter};
  const ProgramSet pos(piece.components, pname);
  const ProgramSet vel(derivs, pname);
  const std::size_t n = piece.dimension();
  std::vector<double> x(n), dx(n), f(n);
  auto integrand = [&](double t) {
    const double tt[1] = {t};
    try {
      pos.real(tt, x);
      vel.real(tt, dx);
      field.real(x, f);
    } catch (const DomainError& e) {
      std::ostringstream os;
      os.precision(17);
      os << "singular integrand at t = " << t;
      throw DomainError(os.str() + ": " + e.what(), e.subtree());
    }
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += f[k] * dx[k];
    return s;
  };
  const auto est = quad::composite_gl5_estimate(integrand, piece.t_begin, piece.t_end, panels);
  error += est.error;
  return est.value;
}

}  // namespace

LineIntegral line_integral(const VectorField& field, const Path& path, std::size_t panels) {
  if (panels == 0) throw PreconditionError("line integral needs at least one panel");
  if (path.pieces.empty()) throw PreconditionError("empty path");
  const auto args = field.argument_names();
  const ProgramSet compiled(field.components, args);
  LineIntegral out;
  for (const auto& piece : path.pieces) {
    if (piece.dimension() != field.dimension()) throw PreconditionError("curve and field dimensions differ");
    out.value += piece_integral(compiled, piece, panels, out.error);
  }
  return out;
}

std::vector<Path> standard_probe_paths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || (a.size() != 2 && a.size() != 3))
    throw PreconditionError("probe endpoints must share dimension 2 or 3");
  const std::size_t n = a.size();
  std::vector<Path> out;
  out.emplace_back(ParametricCurve::segment(a, b));

  // Bowed path a + (b-a) t + t(1-t) w, with w perpendicular to b-a (or a fixed kick when a == b).
  std::vector<double> d(n), w(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) d[k] = b[k] - a[k];
  w[0] = -d[1];
  w[1] = d[0];
  if (std::hypot(w[0], w[1]) == 0.0) {
    w.assign(n, 0.0);
    w[n - 1] = 1.0;
  }
  const Expr t = Expr::variable("t");
  const Expr bow = t * (Expr(1.0) - t);
  std::vector<Expr> comps;
  for (std::size_t k = 0; k < n; ++k) comps.push_back(Expr(a[k]) + Expr(d[k]) * t + Expr(0.5 * w[k]) * bow);
  out.emplace_back(ParametricCurve(std::move(comps), 0.0, 1.0));

  // Axis-parallel polyline, coordinates switched one at a time.
  std::vector<std::vector<double>> verts{std::vector<double>(a.begin(), a.end())};
  std::vector<double> cur(a.begin(), a.end());
  for (std::size_t k = 0; k < n; ++k) {
    cur[k] = b[k];
    verts.push_back(cur);
  }
  out.push_back(Path::polyline(verts));
  return out;
}

CheckReport path_independence_probe(const VectorField& field, std::span<const double> a,
                                    std::span<const double> b, const std::vector<Path>& paths, double tol) {
  if (paths.size() < 2) throw PreconditionError("path probe needs at least two paths");
  std::vector<double> values;
  for (const auto& p : paths) {
    const auto s = p.start();
    const auto f = p.finish();
    for (std::size_t k = 0; k < a.size(); ++k)
      if (std::fabs(s[k] - a[k]) > 1e-10 || std::fabs(f[k] - b[k]) > 1e-10)
        throw PreconditionError("probe path endpoints do not match A and B");
    values.push_back(line_integral(field, p).value);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j) worst = std::max(worst, std::fabs(values[i] - values[j]));
  CheckReport rep;
  rep.max_residual = worst;
  rep.tolerance = tol;
  rep.passed = worst <= tol;
  rep.worst_point.assign(b.begin(), b.end());
  rep.samples_used = values.size();
  for (std::size_t k = 0; k < values.size(); ++k) rep.components.emplace_back("path" + std::to_string(k), values[k]);
  return rep;
}

namespace {

bool excluded_on_segment(const Region& region, std::span<const double> p, std::span<const double> q) {
  for (const auto& e : region.excluded) {
    double len2 = 0.0, dot = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      len2 += (q[k] - p[k]) * (q[k] - p[k]);
      dot += (e[k] - p[k]) * (q[k] - p[k]);
    }
    const double s = len2 > 0 ? std::clamp(dot / len2, 0.0, 1.0) : 0.0;
    double d2 = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double c = p[k] + s * (q[k] - p[k]) - e[k];
      d2 += c * c;
    }
    if (std::sqrt(d2) <= std::max(region.exclusion_radius, 1e-12)) return true;
  }
  return false;
}

}  // namespace

double potential_reconstruct(const VectorField& field, std::span<const double> base, std::span<const double> target,
                             const Region* region, std::size_t panels) {
  require_dimension(field);
  const std::size_t n = field.dimension();
  if (base.size() != n || target.size() != n) throw PreconditionError("point dimension mismatch");
  const auto args = field.argument_names();
  std::vector<double> cur(base.begin(), base.end());
  double u = 0.0;
  for (std::size_t leg = 0; leg < n; ++leg) {
    if (cur[leg] == target[leg]) continue;
    std::vector<double> next = cur;
    next[leg] = target[leg];
    if (region && excluded_on_segment(*region, cur, next))
      throw PreconditionError("potential polyline passes an excluded point; choose a different base point");
    const Program comp(field.components[leg], args);
    std::vector<double> p = cur;
    auto integrand = [&](double s) {
      p[leg] = s;
      try {
        return comp.real(p);
      } catch (const DomainError& e) {
        rethrow_at(e, format_point(p));
      }
    };
    u += quad::composite_gl5(integrand, cur[leg], target[leg], panels);
    cur = next;
  }
  return u;
}

double SampledPotential::spacing(std::size_t axis) const {
  const auto& b = region.bounds[axis];
  return (b.hi - b.lo) / static_cast<double>(counts[axis] - 1);
}

double SampledPotential::coordinate(std::size_t axis, std::size_t index) const {
  return region.bounds[axis].lo + spacing(axis) * static_cast<double>(index);
}

double SampledPotential::at(std::span<const std::size_t> index) const {
  std::size_t flat = 0, stride = 1;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    flat += index[k] * stride;
    stride *= counts[k];
  }
  return values[flat];
}

SampledPotential sample_potential(const VectorField& field, std::span<const double> base, const Region& region,
                                  std::size_t count_per_axis) {
  region.validate();
  SampledPotential out;
  out.region = region;
  out.counts.assign(region.dimension(), count_per_axis);
  std::size_t total = 1;
  for (auto c : out.counts) total *= c;
  out.values.reserve(total);
  std::vector<std::size_t> idx(region.dimension(), 0);
  std::vector<double> p(region.dimension());
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      idx[k] = rem % out.counts[k];
      rem /= out.counts[k];
      p[k] = out.coordinate(k, idx[k]);
    }
    out.values.push_back(potential_reconstruct(field, base, p, &region));
  }
  return out;
}

CheckReport gradient_check(const VectorField& field, const SampledPotential& u, double tol) {
  const std::size_t n = u.counts.size();
  if (n != field.dimension()) throw PreconditionError("sample grid dimension mismatch");
  for (auto c : u.counts)
    if (c < 3) throw PreconditionError("grid too coarse: need at least 3 points per axis");
  const auto args = field.argument_names();
  const ProgramSet comps(field.components, args);
  ResidualTracker tracker;
  std::vector<std::size_t> idx(n, 1);
  std::vector<double> p(n), f(n);
  for (;;) {
    for (std::size_t k = 0; k < n; ++k) p[k] = u.coordinate(k, idx[k]);
    if (!u.region.is_excluded(p)) {
      comps.real(p, f);
      double worst = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        auto hi = idx, lo = idx;
        ++hi[k];
        --lo[k];
        const double g = (u.at(hi) - u.at(lo)) / (2.0 * u.spacing(k));
        worst = std::max(worst, std::fabs(g - f[k]));
      }
      tracker.observe(worst, p);
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == u.counts[k] - 1) idx[k++] = 1;
    if (k == n) break;
  }
  return tracker.report(tol);
}

WorkEnergy work_energy(const VectorField& force, const Path& path, double mass, double speed, const Region& region,
                       const std::vector<double>& potential_base, double exactness_tol) {
  if (!(mass > 0)) throw PreconditionError("mass must be positive");
  const CheckReport exact = exactness_check(force, region, kDefaultGrid, exactness_tol);
  if (!exact.passed) {
    std::ostringstream os;
    os.precision(6);
    os << "force field is not conservative on the region (max curl residual " << exact.max_residual << ")";
    throw PreconditionError(os.str());
  }
  const auto a = path.start();
  const auto b = path.finish();
  const std::vector<double> anchor = potential_base.empty() ? a : potential_base;
  WorkEnergy out;
  out.work = line_integral(force, path).value;
  // U = -potential of the force
  out.potential_start = -potential_reconstruct(force, anchor, a, &region);
  out.potential_end = -potential_reconstruct(force, anchor, b, &region);
  out.total_energy = 0.5 * mass * speed * speed + out.potential_start;
  const double kinetic_end = out.total_energy - out.potential_end;
  out.speed_end = kinetic_end >= 0 ? std::sqrt(2.0 * kinetic_end / mass) : NAN;
  return out;
}

}  // namespace intkit::realfield
