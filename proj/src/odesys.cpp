#include "intkit/odesys.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

namespace intkit::odesys {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
  os << ')';
  return os.str();
}

}  // namespace

AutonomousSystem::AutonomousSystem(VectorField f, std::optional<std::string> time_name)
    : field(std::move(f)), time(std::move(time_name)) {
  if (time && std::find(field.parameters.begin(), field.parameters.end(), *time) == field.parameters.end())
    field.parameters.push_back(*time);
}

AutonomousSystem AutonomousSystem::parse(std::vector<std::string> vars, const std::vector<std::string>& comps,
                                         std::optional<std::string> time_name) {
  std::vector<std::string> params;
  if (time_name) params.push_back(*time_name);
  return AutonomousSystem(VectorField::parse(std::move(vars), comps, std::move(params)), std::move(time_name));
}

RhsFunction AutonomousSystem::rhs() const {
  if (field.parameters.size() > (time ? 1u : 0u))
    throw PreconditionError("system components reference parameters other than time");
  const auto names = field.argument_names();
  auto progs = std::make_shared<ProgramSet>(field.components, names);
  const std::size_t n = dimension();
  const bool timed = time.has_value();
  return [progs, n, timed](double t, std::span<const double> x, std::span<double> dx) {
    thread_local std::vector<double> args;
    args.assign(x.begin(), x.end());
    if (timed) args.push_back(t);
    progs->real(std::span<const double>(args.data(), n + (timed ? 1 : 0)), dx);
  };
}

Trajectory integrate_rk4(const AutonomousSystem& sys, std::span<const double> x0, double t0, double t_end,
                         double h) {
  if (x0.size() != sys.dimension()) throw PreconditionError("initial state has the wrong dimension");
  if (!(h > 0)) throw PreconditionError("step h must be positive");
  if (t_end == t0) throw PreconditionError("time span is degenerate");
  return rk4_integrate(sys.rhs(), t0, x0, t_end, h);
}

CheckReport first_integral_drift(const Expr& phi, const AutonomousSystem& sys, std::span<const double> x0,
                                 double T, double h, const DriftOptions& opts) {
  std::vector<std::string> names = sys.field.variables;
  const std::string tname = sys.time.value_or(opts.time);
  names.push_back(tname);
  for (const auto& v : variables(phi))
    if (std::find(names.begin(), names.end(), v) == names.end()) throw UnboundVariable(v);
  const Trajectory tr = integrate_rk4(sys, x0, opts.t0, opts.t0 + T, h);
  const Program prog(phi, names);
  std::vector<double> args(names.size());
  auto value = [&](std::size_t k) {
    std::copy(tr.states[k].begin(), tr.states[k].end(), args.begin());
    args.back() = tr.times[k];
    return prog.real(args);
  };
  // backward runs are stored reversed, so locate the starting sample by time
  const std::size_t start = tr.times.front() == opts.t0 ? 0 : tr.size() - 1;
  const double phi0 = value(start);
  ResidualTracker tracker;
  double largest = std::fabs(phi0);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double v = value(k);
    largest = std::max(largest, std::fabs(v));
    double d = v - phi0;
    if (opts.period > 0) d -= opts.period * std::round(d / opts.period);
    tracker.observe(std::fabs(d), args);
  }
  const double tol = opts.tol >= 0 ? opts.tol : 10.0 * std::pow(h, 4) * std::max(1.0, largest);
  CheckReport rep = tracker.report(tol);
  rep.components.emplace_back("phi0", phi0);
  return rep;
}

DependenceReport dependent_integral_check(const std::vector<Expr>& integrals, const Expr& candidate,
                                          const Region& box, std::size_t points, std::uint64_t seed,
                                          double tol) {
  if (integrals.size() < 2) throw PreconditionError("need at least two first integrals");
  if (points < 30) throw PreconditionError("need at least 30 sample points");
  box.validate();
  const std::size_t k = integrals.size();
  std::vector<Expr> all = integrals;
  all.push_back(candidate);
  const ProgramSet progs(all, box.variables);

  std::mt19937_64 rng(seed);
  std::vector<std::uniform_real_distribution<double>> axes;
  for (const auto& b : box.bounds) axes.emplace_back(b.lo, b.hi);
  Eigen::MatrixXd vals(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(k + 1));
  std::vector<double> p(box.dimension()), out(k + 1);
  std::size_t got = 0, tries = 0;
  while (got < points) {
    if (++tries > 20 * points) throw PreconditionError("too many sample points hit domain errors");
    for (std::size_t a = 0; a < p.size(); ++a) p[a] = axes[a](rng);
    if (box.is_excluded(p)) continue;
    try {
      progs.real(p, out);
    } catch (const DomainError&) {
      continue;
    }
    for (std::size_t c = 0; c <= k; ++c) vals(static_cast<Eigen::Index>(got), static_cast<Eigen::Index>(c)) = out[c];
    ++got;
  }
  bool varies = false;
  for (std::size_t c = 0; c < k; ++c) {
    const auto col = vals.col(static_cast<Eigen::Index>(c));
    if (col.maxCoeff() - col.minCoeff() > 1e-12 * (1.0 + col.cwiseAbs().maxCoeff())) varies = true;
  }
  if (!varies) throw PreconditionError("degenerate samples: every first integral is constant on the sample set");

  const Eigen::VectorXd target = vals.col(static_cast<Eigen::Index>(k));
  const double norm = std::max(target.norm(), 1e-300);
  DependenceReport best;
  best.samples = points;
  best.residual = std::numeric_limits<double>::infinity();
  auto consider = [&](const Eigen::MatrixXd& basis, std::string relation) {
    const Eigen::VectorXd c = basis.colPivHouseholderQr().solve(target);
    const double r = (basis * c - target).norm() / norm;
    if (r < best.residual) {
      best.residual = r;
      best.relation = std::move(relation);
      best.coefficients.assign(c.data(), c.data() + c.size());
    }
  };
  auto col = [&](std::size_t c) { return vals.col(static_cast<Eigen::Index>(c)); };
  const auto name = [](std::size_t c) { return "Phi" + std::to_string(c + 1); };
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) consider(col(i).cwiseProduct(col(j)), name(i) + "*" + name(j));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j) consider(col(i).cwiseQuotient(col(j)), name(i) + "/" + name(j));
  {
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(points), static_cast<Eigen::Index>(k + 1));
    basis.col(0).setOnes();
    std::string rel = "c0";
    for (std::size_t i = 0; i < k; ++i) {
      basis.col(static_cast<Eigen::Index>(i + 1)) = col(i);
      rel += " + c" + std::to_string(i + 1) + "*" + name(i);
    }
    consider(basis, rel);
  }
  best.detected = best.residual < tol;
  return best;
}

std::vector<Complex> char_poly(const Matrix& a) {
  if (a.rows() != a.cols()) throw PreconditionError("matrix must be square");
  const Eigen::Index n = a.rows();
  // Faddeev-LeVerrier: c[n] = 1, M_k = A M_{k-1} + c[n-k+1] 1, c[n-k] = -tr(A M_k) / k
  std::vector<Complex> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  Matrix m = Matrix::Zero(n, n);
  const Matrix id = Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + c[static_cast<std::size_t>(n - k + 1)] * id;
    c[static_cast<std::size_t>(n - k)] = -(a * m).trace() / static_cast<double>(k);
  }
  std::reverse(c.begin(), c.end());
  return c;
}

namespace {

Complex horner(const std::vector<Complex>& c, Complex z) {
  Complex s = 0.0;
  for (const auto& v : c) s = s * z + v;
  return s;
}

double horner_scale(const std::vector<Complex>& c, Complex z) {
  double s = 0.0;
  const double r = std::abs(z);
  for (const auto& v : c) s = s * r + std::abs(v);
  return s;
}

std::vector<Complex> derivative(const std::vector<Complex>& c) {
  std::vector<Complex> d;
  const std::size_t n = c.size() - 1;
  for (std::size_t j = 0; j < n; ++j) d.push_back(c[j] * static_cast<double>(n - j));
  return d;
}

}  // namespace

std::vector<Complex> polynomial_roots(const std::vector<Complex>& monic) {
  if (monic.empty() || monic.front() != Complex(1.0)) throw PreconditionError("polynomial must be monic");
  const std::size_t n = monic.size() - 1;
  if (n == 0) return {};
  if (n == 1) return {-monic[1]};
  double bound = 0.0;
  for (std::size_t j = 1; j <= n; ++j) bound = std::max(bound, std::abs(monic[j]));
  bound += 1.0;
  std::vector<Complex> z(n);
  const Complex seed(0.4, 0.9);
  for (std::size_t i = 0; i < n; ++i) z[i] = bound * std::pow(seed, static_cast<double>(i));
  constexpr int kMaxSweeps = 500;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= z[i] - z[j];
      if (denom == Complex(0.0)) denom = eps;
      const Complex step = horner(monic, z[i]) / denom;
      z[i] -= step;
      worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[i])));
    }
    if (worst <= 4 * eps) break;
  }
  for (const auto& r : z)
    if (!(std::abs(horner(monic, r)) <= 1e-12 * horner_scale(monic, r)))
      throw ConvergenceError("Durand-Kerner iteration did not converge in 500 sweeps");
  return z;
}

namespace {

// Centroid passes as an m-fold root if p, p', ..., p^(m-1) all nearly vanish there.
bool is_multiple_root(const std::vector<Complex>& p, Complex c, std::size_t m) {
  std::vector<Complex> d = p;
  for (std::size_t j = 0; j < m; ++j) {
    if (!(std::abs(horner(d, c)) <= 1e-10 * horner_scale(d, c))) return false;
    d = derivative(d);
  }
  return true;
}

// Newton on p^(m-1), for which an m-fold root of p is simple.
Complex polish(const std::vector<Complex>& p, Complex c, std::size_t m) {
  std::vector<Complex> d = p;
  for (std::size_t j = 1; j < m; ++j) d = derivative(d);
  const std::vector<Complex> dd = derivative(d);
  if (dd.empty()) return c;
  for (int it = 0; it < 8; ++it) {
    const Complex slope = horner(dd, c);
    if (slope == Complex(0.0)) break;
    const Complex step = horner(d, c) / slope;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
    c -= step;
    if (std::abs(step) <= 2 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(c))) break;
  }
  return c;
}

Complex centroid(const std::vector<Complex>& roots, const std::vector<std::size_t>& members) {
  Complex s = 0.0;
  for (auto i : members) s += roots[i];
  return s / static_cast<double>(members.size());
}

// Group roots into multiplicities: single linkage at a growing radius, a
// merge kept only when the polished centroid passes the derivative test.
std::vector<std::vector<std::size_t>> cluster_roots(const std::vector<Complex>& p, const std::vector<Complex>& roots) {
  const std::size_t n = roots.size();
  std::vector<std::size_t> label(n);
  std::iota(label.begin(), label.end(), 0);
  auto groups_of = [&](const std::vector<std::size_t>& lab) {
    std::vector<std::vector<std::size_t>> g;
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = std::find(seen.begin(), seen.end(), lab[i]);
      if (it == seen.end()) {
        seen.push_back(lab[i]);
        g.push_back({i});
      } else {
        g[static_cast<std::size_t>(it - seen.begin())].push_back(i);
      }
    }
    return g;
  };
  for (double radius = 1e-8; radius <= 0.2; radius *= 10) {
    // union-find over the current groups
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
      return parent[i] == i ? i : parent[i] = find(parent[i]);
    };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double scale = 1.0 + std::max(std::abs(roots[i]), std::abs(roots[j]));
        if (label[i] == label[j] || std::abs(roots[i] - roots[j]) <= radius * scale) parent[find(i)] = find(j);
      }
    std::vector<std::size_t> proposal(n);
    for (std::size_t i = 0; i < n; ++i) proposal[i] = find(i);
    for (const auto& g : groups_of(proposal)) {
      bool changes = false;
      for (auto i : g)
        if (label[i] != label[g.front()]) changes = true;
      if (!changes) continue;
      if (radius <= 1e-8 || is_multiple_root(p, polish(p, centroid(roots, g), g.size()), g.size()))
        for (auto i : g) label[i] = g.front() + n;  // fresh label
    }
    // normalise labels
    for (auto& l : label)
      if (l >= n) l -= n;
  }
  return groups_of(label);
}

std::size_t numeric_rank(const Matrix& m) {
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-8);
  return static_cast<std::size_t>(lu.rank());
}

}  // namespace

std::vector<Eigenpair> eigen_solve(const Matrix& a) {
  if (a.rows() != a.cols()) throw PreconditionError("matrix must be square");
  const Eigen::Index n = a.rows();
  if (n == 0 || n > 8) throw PreconditionError("eigen_solve supports 1 <= n <= 8");
  const bool real = a.imag().cwiseAbs().maxCoeff() == 0.0;
  const auto p = char_poly(a);
  const auto roots = polynomial_roots(p);
  std::vector<Eigenpair> out;
  for (const auto& g : cluster_roots(p, roots)) {
    Eigenpair e;
    e.multiplicity = g.size();
    e.value = polish(p, centroid(roots, g), g.size());
    if (real && std::fabs(e.value.imag()) <= 1e-12 * (1.0 + std::abs(e.value))) e.value.imag(0.0);
    const Matrix b = a - e.value * Matrix::Identity(n, n);
    Eigen::FullPivLU<Matrix> lu(b);
    lu.setThreshold(1e-8);
    const Matrix kernel = lu.kernel();
    if (lu.rank() < n) {
      const Matrix q = Eigen::HouseholderQR<Matrix>(kernel).householderQ() * Matrix::Identity(n, kernel.cols());
      for (Eigen::Index c = 0; c < q.cols(); ++c) {
        Vector v = q.col(c);
        Eigen::Index big = 0;
        v.cwiseAbs().maxCoeff(&big);
        v *= std::abs(v(big)) / v(big);  // largest component real positive
        e.eigenvectors.push_back(v.normalized());
      }
    }
    Matrix power = b;
    e.chain_depth = e.multiplicity;
    for (std::size_t j = 1; j <= e.multiplicity; ++j) {
      if (numeric_rank(power) == static_cast<std::size_t>(n) - e.multiplicity) {
        e.chain_depth = j;
        break;
      }
      power = power * b;
    }
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const Eigenpair& x, const Eigenpair& y) {
    if (x.value.real() != y.value.real()) return x.value.real() > y.value.real();
    return x.value.imag() > y.value.imag();
  });
  return out;
}

Matrix matrix_exp(const Matrix& a, double t) {
  if (a.rows() != a.cols()) throw PreconditionError("matrix must be square");
  const Eigen::Index n = a.rows();
  const Matrix m = t * a;
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) throw NumericError("matrix exponential of a non-finite matrix");
  const int s = norm1 > 1.0 ? static_cast<int>(std::ceil(std::log2(norm1))) : 0;
  if (s > 1024) throw NumericError("matrix exponential overflows (||tA||_1 = " + fmt(norm1) + ")");
  const Matrix x = m / std::ldexp(1.0, s);
  Matrix e = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 16; ++k) {
    term = term * x / static_cast<double>(k);
    e += term;
  }
  for (int k = 0; k < s; ++k) {
    e = e * e;
    if (!e.allFinite()) throw NumericError("matrix exponential overflows during squaring");
  }
  if (!e.allFinite()) throw NumericError("matrix exponential overflows");
  return e;
}

LinearSolution linear_solve(const Matrix& a, std::span<const double> x0, std::span<const double> t_eval) {
  const Eigen::Index n = a.rows();
  if (a.rows() != a.cols()) throw PreconditionError("matrix must be square");
  if (a.imag().cwiseAbs().maxCoeff() != 0.0) throw PreconditionError("linear_solve needs a real matrix");
  if (static_cast<Eigen::Index>(x0.size()) != n) throw PreconditionError("initial state has the wrong dimension");
  if (t_eval.empty()) throw PreconditionError("no evaluation times");
  for (std::size_t k = 1; k < t_eval.size(); ++k)
    if (!(t_eval[k] > t_eval[k - 1])) throw PreconditionError("evaluation times must increase strictly");

  LinearSolution out;
  Vector start(n);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = x0[static_cast<std::size_t>(i)];
  const auto T = static_cast<Eigen::Index>(t_eval.size());
  Matrix samples(T, n);
  out.trajectory.method = "matrix-exponential";
  for (Eigen::Index k = 0; k < T; ++k) {
    const double t = t_eval[static_cast<std::size_t>(k)];
    const Vector x = matrix_exp(a, t) * start;
    samples.row(k) = x.transpose();
    std::vector<double> state(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) state[static_cast<std::size_t>(i)] = x(i).real();
    out.trajectory.times.push_back(t);
    out.trajectory.states.push_back(std::move(state));
  }

  out.eigen = eigen_solve(a);
  std::size_t columns = 0;
  for (const auto& e : out.eigen) columns += e.multiplicity;
  if (t_eval.size() < columns) return out;  // too few samples to fit; structure left empty
  Matrix basis(T, static_cast<Eigen::Index>(columns));
  Eigen::Index col = 0;
  for (const auto& e : out.eigen)
    for (std::size_t j = 0; j < e.multiplicity; ++j, ++col)
      for (Eigen::Index k = 0; k < T; ++k) {
        const double t = t_eval[static_cast<std::size_t>(k)];
        basis(k, col) = std::pow(t, static_cast<double>(j)) * std::exp(e.value * t);
      }
  const Matrix coeff = basis.colPivHouseholderQr().solve(samples);
  out.fit_residual = (basis * coeff - samples).cwiseAbs().maxCoeff();
  col = 0;
  for (const auto& e : out.eigen) {
    ModeFit f;
    f.eigenvalue = e.value;
    f.multiplicity = e.multiplicity;
    for (std::size_t j = 0; j < e.multiplicity; ++j, ++col) f.coefficients.push_back(coeff.row(col).transpose());
    out.modes.push_back(std::move(f));
  }
  return out;
}

Matrix commutator_flow(const Matrix& a, const Matrix& u0, double t) {
  if (a.rows() != a.cols() || u0.rows() != u0.cols() || a.rows() != u0.rows())
    throw PreconditionError("commutator flow needs square matrices of equal size");
  return matrix_exp(a, -t) * u0 * matrix_exp(a, t);
}

Matrix ExprMatrix::evaluate(std::span<const std::string> vars, std::span<const double> at) const {
  std::vector<Complex> args(at.begin(), at.end());
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = Program((*this)(i, j), vars)(args);
  return m;
}

ExprMatrix parse_matrix(const std::string& text) {
  std::vector<std::vector<Expr>> rows;
  std::size_t pos = 0;
  std::vector<Expr> row;
  while (true) {
    const std::size_t end = text.find_first_of(",;", pos);
    const std::string entry = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    try {
      row.push_back(intkit::parse(entry));
    } catch (const UnknownFunction&) {
      throw;
    } catch (const SyntaxError& e) {
      throw SyntaxError("bad matrix entry '" + entry + "'", pos + e.offset());
    }
    if (end == std::string::npos || text[end] == ';') {
      rows.push_back(std::move(row));
      row.clear();
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  const std::size_t n = rows.size();
  ExprMatrix m;
  m.n = n;
  for (const auto& r : rows) {
    if (r.size() != n) throw PreconditionError("matrix must be square (" + std::to_string(n) + " rows)");
    m.entries.insert(m.entries.end(), r.begin(), r.end());
  }
  return m;
}

Matrix parse_numeric_matrix(const std::string& text) {
  const ExprMatrix m = parse_matrix(text);
  for (const auto& e : m.entries)
    if (!variables(e).empty()) throw UnboundVariable(*variables(e).begin());
  return m.evaluate({}, {});
}

double frobenius(const Matrix& m) { return m.norm(); }

namespace {

using Sym = std::vector<Expr>;  // n*n row-major

Sym sym_mul(const Sym& a, const Sym& b, std::size_t n) {
  Sym c(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Expr s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s = s + a[i * n + k] * b[k * n + j];
      c[i * n + j] = s;
    }
  return c;
}

Sym sym_diff(const Sym& a, const std::string& v) {
  Sym d;
  d.reserve(a.size());
  for (const auto& e : a) d.push_back(diff(e, v));
  return d;
}

Expr sym_det(const Sym& a, std::size_t n) {
  if (n == 1) return a[0];
  if (n == 2) return a[0] * a[3] - a[1] * a[2];
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) + a[2] * (a[3] * a[7] - a[4] * a[6]);
}

// Adjugate over the determinant.
Sym sym_inverse(const Sym& a, std::size_t n) {
  const Expr det = sym_det(a, n);
  Sym inv(n * n);
  if (n == 1) {
    inv[0] = Expr(1.0) / det;
    return inv;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      // cofactor C_ji goes to inv(i, j)
      Sym minor;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
          if (r != j && c != i) minor.push_back(a[r * n + c]);
      Expr cof = sym_det(minor, n - 1);
      if ((i + j) % 2) cof = -cof;
      inv[i * n + j] = cof / det;
    }
  return inv;
}

class SymEval {
 public:
  SymEval(const Sym& s, std::size_t n, std::span<const std::string> vars) : n_(n), progs_(s.size()) {
    for (std::size_t k = 0; k < s.size(); ++k) progs_[k] = Program(s[k], vars);
  }
  Matrix operator()(std::span<const Complex> at) const {
    Matrix m(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t k = 0; k < progs_.size(); ++k)
      m(static_cast<Eigen::Index>(k / n_), static_cast<Eigen::Index>(k % n_)) = progs_[k](at);
    return m;
  }

 private:
  std::size_t n_;
  std::vector<Program> progs_;
};

void require_invertible(const Matrix& a, std::span<const double> p) {
  const Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double cond = s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : INFINITY;
  if (!(cond < 1e8)) throw PreconditionError("A is singular or ill-conditioned (cond " + fmt(cond) + ") at " + fmt_point(p));
}

}  // namespace

CheckReport matrix_identity_check(const ExprMatrix& a, const Region& region, std::size_t grid, double tol,
                                  std::optional<ParametricCurve> curve) {
  const std::size_t n = a.n;
  if (n == 0 || n > 3) throw PreconditionError("matrix identities are checked for 1x1 to 3x3 matrices");
  if (region.dimension() != 2) throw PreconditionError("matrix identities need a planar region");
  const auto& vars = region.variables;
  const std::string& x = vars[0];
  const std::string& y = vars[1];
  for (const auto& e : a.entries)
    for (const auto& v : variables(e))
      if (v != x && v != y) throw UnboundVariable(v);

  const Sym A = a.entries;
  const Sym inv = sym_inverse(A, n);
  const Sym Ax = sym_diff(A, x), Ay = sym_diff(A, y);
  const Sym P = sym_mul(inv, Ay, n);  // A^-1 A_y
  const Sym Q = sym_mul(inv, Ax, n);  // A^-1 A_x
  const Sym R = sym_mul(Ay, inv, n);  // A_y A^-1
  const Sym S = sym_mul(Ax, inv, n);  // A_x A^-1
  const SymEval eA(A, n, vars), eInv(inv, n, vars), eP(P, n, vars), eQ(Q, n, vars), eR(R, n, vars), eS(S, n, vars),
      ePx(sym_diff(P, x), n, vars), eQy(sym_diff(Q, y), n, vars), eRx(sym_diff(R, x), n, vars),
      eSy(sym_diff(S, y), n, vars);

  ResidualTracker total;
  double zc_left = 0, zc_right = 0, conj_left = 0, conj_right = 0, inv_rule = 0;
  Complex args[2];
  for_each_grid_point(region, grid, [&](std::span<const double> p) {
    args[0] = p[0];
    args[1] = p[1];
    const Matrix am = eA(args);
    require_invertible(am, p);
    const Matrix im = eInv(args), pm = eP(args), qm = eQ(args), rm = eR(args), sm = eS(args);
    const Matrix px = ePx(args), qy = eQy(args), rx = eRx(args), sy = eSy(args);
    const double a1 = frobenius(px - qy + (qm * pm - pm * qm));
    const double a2 = frobenius(rx - sy - (sm * rm - rm * sm));
    const double b1 = frobenius(am * qy * im - rx);
    const double b2 = frobenius(im * rx * am - qy);
    zc_left = std::max(zc_left, a1);
    zc_right = std::max(zc_right, a2);
    conj_left = std::max(conj_left, b1);
    conj_right = std::max(conj_right, b2);
    total.observe(std::max({a1, a2, b1, b2}), p);
  });

  // inverse-derivative rule along a curve, d/dt A^-1 by central differences
  if (!curve) {
    const double lo[2] = {region.bounds[0].lo, region.bounds[1].lo};
    const double hi[2] = {region.bounds[0].hi, region.bounds[1].hi};
    curve = ParametricCurve::segment(lo, hi);
  }
  {
    const std::string tn[1] = {curve->parameter};
    const Program cx(curve->components.at(0), tn), cy(curve->components.at(1), tn);
    const Program dcx(diff(curve->components[0], curve->parameter), tn),
        dcy(diff(curve->components[1], curve->parameter), tn);
    const SymEval eAx(Ax, n, vars), eAy(Ay, n, vars);
    auto inverse_at = [&](double t) {
      const double tt[1] = {t};
      const Complex q[2] = {cx.real(tt), cy.real(tt)};
      return Matrix(eA(q).inverse());
    };
    constexpr int samples = 21;
    constexpr double h = 1e-5;
    const double span = curve->t_end - curve->t_begin;
    for (int k = 1; k < samples; ++k) {
      const double t = curve->t_begin + span * k / samples;
      const double tt[1] = {t};
      const double pt[2] = {cx.real(tt), cy.real(tt)};
      const Complex q[2] = {pt[0], pt[1]};
      const Matrix am = eA(q);
      require_invertible(am, pt);
      const Matrix im = am.inverse();
      const Matrix da = eAx(q) * dcx.real(tt) + eAy(q) * dcy.real(tt);
      const Matrix fd = (inverse_at(t + h) - inverse_at(t - h)) / (2 * h);
      const double r = frobenius(fd + im * da * im);
      inv_rule = std::max(inv_rule, r);
      total.observe(r, pt);
    }
  }
  CheckReport rep = total.report(tol);
  rep.components = {{"zero_curvature_left", zc_left},
                    {"zero_curvature_right", zc_right},
                    {"conjugation_left", conj_left},
                    {"conjugation_right", conj_right},
                    {"inverse_derivative", inv_rule}};
  return rep;
}

}  // namespace intkit::odesys
