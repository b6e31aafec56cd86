#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace intkit {

/// Time-stamped states; times strictly increasing.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::string method;
  double step = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  const std::vector<double>& final_state() const { return states.back(); }
};

using RhsFunction = std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;

/// Classical fixed-step RK4 from t0 to t_end (either direction); the last step
/// is shortened to land on t_end. A state whose max-norm exceeds max_norm
/// aborts with NumericError naming the last good time.
Trajectory rk4_integrate(const RhsFunction& rhs, double t0, std::span<const double> x0, double t_end,
                         double h, double max_norm = 1e300);

/// Endpoint-only RK4 with exactly `steps` equal steps: smooth in t_end, no storage.
std::vector<double> rk4_endpoint(const RhsFunction& rhs, double t0, std::span<const double> x0, double t_end,
                                 std::size_t steps, double max_norm = 1e300);

}  // namespace intkit
