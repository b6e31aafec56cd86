#include "intkit/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "intkit/error.hpp"

namespace intkit {

namespace {

class Rk4Stepper {
 public:
  explicit Rk4Stepper(std::size_t n) : tmp_(n), k1_(n), k2_(n), k3_(n), k4_(n), carry_(n, 0.0) {}

  void step(const RhsFunction& rhs, double t, std::vector<double>& x, double dt) {
    const std::size_t n = x.size();
    const double half = 0.5 * dt;
    rhs(t, x, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];
    rhs(t + half, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];
    rhs(t + half, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];
    rhs(t + dt, tmp_, k4_);
    // compensated update: the low bits lost in x + dx are carried to the next step
    for (std::size_t i = 0; i < n; ++i) {
      const double inc = dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]) - carry_[i];
      const double sum = x[i] + inc;
      carry_[i] = (sum - x[i]) - inc;
      x[i] = sum;
    }
  }

 private:
  std::vector<double> tmp_, k1_, k2_, k3_, k4_, carry_;
};

double max_norm_of(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::isfinite(v) ? std::fabs(v) : INFINITY);
  return m;
}

[[noreturn]] void blow_up(double t_good) {
  std::ostringstream os;
  os.precision(17);
  os << "state blew up; last good t = " << t_good;
  throw NumericError(os.str());
}

template <class Step>
void guarded(double t, Step&& step) {
  try {
    step();
  } catch (const DomainError& e) {
    std::ostringstream os;
    os.precision(17);
    os << "evaluation failed at t = " << t << ": " << e.what();
    throw DomainError(os.str(), e.subtree());
  }
}

}  // namespace

Trajectory rk4_integrate(const RhsFunction& rhs, double t0, std::span<const double> x0, double t_end,
                         double h, double max_norm) {
  if (!(h > 0.0)) throw PreconditionError("RK4 step must be positive");
  if (t_end == t0) throw PreconditionError("RK4 time span is degenerate");
  const double dir = t_end > t0 ? 1.0 : -1.0;
  const double span = std::fabs(t_end - t0);
  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / h * (1.0 - 1e-12))));

  Trajectory traj;
  traj.method = "rk4";
  traj.step = h;
  std::vector<double> x(x0.begin(), x0.end());
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(t0);
  traj.states.push_back(x);
  Rk4Stepper stepper(x.size());
  double t = t0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double next = k + 1 == steps ? t_end : t0 + dir * h * static_cast<double>(k + 1);
    guarded(t, [&] { stepper.step(rhs, t, x, next - t); });
    if (max_norm_of(x) > max_norm) blow_up(t);
    t = next;
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  if (dir < 0) {
    std::reverse(traj.times.begin(), traj.times.end());
    std::reverse(traj.states.begin(), traj.states.end());
  }
  return traj;
}

std::vector<double> rk4_endpoint(const RhsFunction& rhs, double t0, std::span<const double> x0, double t_end,
                                 std::size_t steps, double max_norm) {
  std::vector<double> x(x0.begin(), x0.end());
  if (t_end == t0 || steps == 0) return x;
  Rk4Stepper stepper(x.size());
  const double dt = (t_end - t0) / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + dt * static_cast<double>(k);
    guarded(t, [&] { stepper.step(rhs, t, x, dt); });
    if (max_norm_of(x) > max_norm) blow_up(t);
  }
  return x;
}

}  // namespace intkit
