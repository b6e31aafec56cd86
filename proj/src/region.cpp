#include "intkit/region.hpp"

#include <cmath>

#include "intkit/error.hpp"

namespace intkit {

Region::Region(std::vector<std::string> vars, std::vector<Interval> box)
    : variables(std::move(vars)), bounds(std::move(box)) {
  validate();
}

bool Region::contains(std::span<const double> p) const {
  if (p.size() != bounds.size()) return false;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] < bounds[k].lo || p[k] > bounds[k].hi) return false;
  return true;
}

bool Region::is_excluded(std::span<const double> p) const {
  for (const auto& q : excluded) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < q.size() && k < p.size(); ++k) d2 += (p[k] - q[k]) * (p[k] - q[k]);
    if (std::sqrt(d2) <= exclusion_radius) return true;
  }
  return false;
}

void Region::validate() const {
  if (variables.size() != bounds.size() || bounds.empty())
    throw PreconditionError("region needs one interval per variable");
  for (const auto& b : bounds)
    if (!(b.lo < b.hi)) throw PreconditionError("region interval must satisfy lo < hi");
  for (const auto& q : excluded)
    if (!contains(q)) throw PreconditionError("excluded point lies outside the region box");
}

double CheckReport::component(const std::string& name) const {
  for (const auto& [n, v] : components)
    if (n == name) return v;
  throw Error("no report component named '" + name + "'");
}

void ResidualTracker::observe(double residual, std::span<const double> point) {
  if (samples_ == 0 || residual > max_ || std::isnan(residual)) {
    max_ = std::isnan(residual) ? INFINITY : residual;
    worst_.assign(point.begin(), point.end());
  }
  ++samples_;
}

CheckReport ResidualTracker::report(double tol) const {
  CheckReport r;
  r.max_residual = max_;
  r.tolerance = tol;
  r.passed = max_ <= tol;
  r.worst_point = worst_;
  r.samples_used = samples_;
  return r;
}

void for_each_grid_point(const Region& region, std::span<const std::size_t> counts,
                         const std::function<void(std::span<const double>)>& visit) {
  region.validate();
  const std::size_t dim = region.dimension();
  std::vector<std::size_t> n(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    n[k] = counts.size() == 1 ? counts[0] : counts[k];
    if (n[k] < 2) throw PreconditionError("grid needs at least 2 samples per axis");
  }
  if (counts.size() != 1 && counts.size() != dim) throw PreconditionError("grid count per axis mismatch");
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> p(dim);
  for (;;) {
    for (std::size_t k = 0; k < dim; ++k) {
      const auto& b = region.bounds[k];
      p[k] = idx[k] + 1 == n[k] ? b.hi : b.lo + (b.hi - b.lo) * static_cast<double>(idx[k]) / (n[k] - 1);
    }
    if (!region.is_excluded(p)) visit(p);
    std::size_t k = 0;
    while (k < dim && ++idx[k] == n[k]) idx[k++] = 0;
    if (k == dim) break;
  }
}

void for_each_grid_point(const Region& region, std::size_t count_per_axis,
                         const std::function<void(std::span<const double>)>& visit) {
  const std::size_t c[1] = {count_per_axis};
  for_each_grid_point(region, std::span<const std::size_t>(c, 1), visit);
}

}  // namespace intkit
