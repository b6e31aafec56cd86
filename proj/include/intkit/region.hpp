#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace intkit {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Axis-aligned sampling box. Connectedness is only ever a caller claim.
struct Region {
  std::vector<std::string> variables;
  std::vector<Interval> bounds;
  std::vector<std::vector<double>> excluded;  // singular points, removed from grids
  bool simply_connected = false;
  double exclusion_radius = 1e-9;

  Region() = default;
  Region(std::vector<std::string> vars, std::vector<Interval> box);

  std::size_t dimension() const noexcept { return variables.size(); }
  bool contains(std::span<const double> p) const;
  /// True if p lies within exclusion_radius of a declared excluded point.
  bool is_excluded(std::span<const double> p) const;
  /// Throws PreconditionError unless the box is nonempty and exclusions lie inside it.
  void validate() const;
};

/// Outcome record shared by every verification operation.
struct CheckReport {
  bool passed = false;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::vector<double> worst_point;
  std::size_t samples_used = 0;
  /// Named sub-maxima when a check covers several equations.
  std::vector<std::pair<std::string, double>> components;
  std::vector<std::string> warnings;

  const char* status() const noexcept { return passed ? "pass" : "fail"; }
  double component(const std::string& name) const;
};

/// Running maximum that becomes a CheckReport.
class ResidualTracker {
 public:
  void observe(double residual, std::span<const double> point);
  std::size_t samples() const noexcept { return samples_; }
  double max() const noexcept { return max_; }
  CheckReport report(double tol) const;

 private:
  double max_ = 0.0;
  std::vector<double> worst_;
  std::size_t samples_ = 0;
};

/// Per-axis uniform grid over a region, skipping excluded points.
/// `counts` must have one entry per axis (or one entry used for all), each >= 2.
void for_each_grid_point(const Region& region, std::span<const std::size_t> counts,
                         const std::function<void(std::span<const double>)>& visit);
void for_each_grid_point(const Region& region, std::size_t count_per_axis,
                         const std::function<void(std::span<const double>)>& visit);

}  // namespace intkit
