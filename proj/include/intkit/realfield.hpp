#pragma once

// Exactness of differential forms on R^2 / R^3, line integrals, potentials,
// and work/energy bookkeeping for conservative forces.

#include <span>
#include <vector>

#include "intkit/field.hpp"
#include "intkit/region.hpp"

namespace intkit::realfield {

inline constexpr std::size_t kDefaultGrid = 41;
inline constexpr std::size_t kDefaultPanels = 64;

/// Max over the grid of the cross-partial residuals |dP/dy - dQ/dx| (n = 2)
/// or the three curl components (n = 3).
CheckReport exactness_check(const VectorField& field, const Region& region, std::size_t grid = kDefaultGrid,
                            double tol = 1e-10);

struct LineIntegral {
  double value = 0.0;
  double error = 0.0;
};

/// Composite 5-point Gauss-Legendre of sum_i F_i(x(t)) x_i'(t) over each piece.
LineIntegral line_integral(const VectorField& field, const Path& path, std::size_t panels = kDefaultPanels);

/// Segment, a bowed quadratic and an axis-parallel two-edge polyline from a to b.
std::vector<Path> standard_probe_paths(std::span<const double> a, std::span<const double> b);

/// Max pairwise difference of line integrals over paths sharing endpoints.
CheckReport path_independence_probe(const VectorField& field, std::span<const double> a,
                                    std::span<const double> b, const std::vector<Path>& paths, double tol);

/// u(target) with u(base) = 0, integrating along the axis-parallel polyline
/// base -> target (x leg, then y leg, then z leg). Excluded points of `region`
/// on the polyline are rejected.
double potential_reconstruct(const VectorField& field, std::span<const double> base,
                             std::span<const double> target, const Region* region = nullptr,
                             std::size_t panels = kDefaultPanels);

/// Potential values on a uniform grid, flattened with axis 0 fastest.
struct SampledPotential {
  Region region;
  std::vector<std::size_t> counts;
  std::vector<double> values;

  double spacing(std::size_t axis) const;
  double coordinate(std::size_t axis, std::size_t index) const;
  double at(std::span<const std::size_t> index) const;
};

SampledPotential sample_potential(const VectorField& field, std::span<const double> base, const Region& region,
                                  std::size_t count_per_axis);

/// Central-difference gradient of the sampled potential against F at interior nodes.
CheckReport gradient_check(const VectorField& field, const SampledPotential& u, double tol);

struct WorkEnergy {
  double work = 0.0;
  double potential_start = 0.0;  // U_A
  double potential_end = 0.0;    // U_B
  double total_energy = 0.0;     // 1/2 m v0^2 + U_A
  double speed_end = 0.0;        // from energy conservation; NaN if U_B > E
};

/// Work of a conservative force along a curve. U is anchored with
/// U(potential_base) = 0 (default: the path start). Refuses a field that
/// fails exactness_check on `region`.
WorkEnergy work_energy(const VectorField& force, const Path& path, double mass, double speed,
                       const Region& region, const std::vector<double>& potential_base = {},
                       double exactness_tol = 1e-9);

}  // namespace intkit::realfield
