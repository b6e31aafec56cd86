#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace intkit::quad {

struct GaussLegendre5 {
  std::array<double, 5> nodes;
  std::array<double, 5> weights;
};

inline const GaussLegendre5& gl5() {
  static const GaussLegendre5 rule = [] {
    const double inner = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double outer = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double w0 = 128.0 / 225.0;
    const double wi = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double wo = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    return GaussLegendre5{{-outer, -inner, 0.0, inner, outer}, {wo, wi, w0, wi, wo}};
  }();
  return rule;
}

inline double magnitude(double v) { return std::fabs(v); }
inline double magnitude(std::complex<double> v) { return std::abs(v); }

/// Pairwise summation; deterministic for a given input order.
template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.size() <= 8) {
    T s{};
    for (const T& x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Composite 5-point Gauss-Legendre on [a, b] with `panels` equal panels.
template <class F>
auto composite_gl5(F&& f, double a, double b, std::size_t panels) {
  using T = decltype(f(a));
  const auto& rule = gl5();
  std::vector<T> contrib;
  contrib.reserve(panels);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double mid = lo + 0.5 * width;
    T s{};
    for (std::size_t k = 0; k < 5; ++k) s += rule.weights[k] * f(mid + 0.5 * width * rule.nodes[k]);
    contrib.push_back(0.5 * width * s);
  }
  return pairwise_sum(std::span<const T>(contrib));
}

template <class T>
struct Estimate {
  T value{};
  double error = 0.0;
};

/// Value on 2*panels with the panel-doubling difference as error estimate,
/// floored at a few ulps of the magnitude.
template <class F>
auto composite_gl5_estimate(F&& f, double a, double b, std::size_t panels) {
  using T = decltype(f(a));
  const T coarse = composite_gl5(f, a, b, panels);
  const T fine = composite_gl5(f, a, b, 2 * panels);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + magnitude(fine));
  return Estimate<T>{fine, std::max(magnitude(fine - coarse), floor)};
}

/// Globally adaptive 5-point Gauss-Legendre: the panel with the largest
/// local error (whole vs. two halves) is split until the summed error meets
/// `tol` or rounding level, or `max_panels` is reached.
template <class F>
auto adaptive_gl5(F&& f, double a, double b, double tol, std::size_t max_panels = 2000) {
  using T = decltype(f(a));
  struct Panel {
    double lo, hi;
    T value;
    double error;
  };
  if (a == b) return T{};
  auto make = [&](double lo, double hi, T whole) {
    const double mid = 0.5 * (lo + hi);
    const T refined = composite_gl5(f, lo, mid, 1) + composite_gl5(f, mid, hi, 1);
    return Panel{lo, hi, refined, magnitude(refined - whole)};
  };
  auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::vector<Panel> heap{make(a, b, composite_gl5(f, a, b, 1))};
  double total_error = heap.front().error;
  double scale = magnitude(heap.front().value);
  while (heap.size() < max_panels) {
    if (total_error <= std::max(tol, 16.0 * std::numeric_limits<double>::epsilon() * scale)) break;
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Panel left = make(worst.lo, mid, composite_gl5(f, worst.lo, mid, 1));
    const Panel right = make(mid, worst.hi, composite_gl5(f, mid, worst.hi, 1));
    for (const Panel& p : {left, right}) {
      heap.push_back(p);
      std::push_heap(heap.begin(), heap.end(), worse);
    }
    total_error += left.error + right.error - worst.error;
    scale += magnitude(left.value) + magnitude(right.value) - magnitude(worst.value);
  }
  std::sort(heap.begin(), heap.end(), [](const Panel& x, const Panel& y) { return x.lo < y.lo; });
  std::vector<T> values;
  values.reserve(heap.size());
  for (const auto& p : heap) values.push_back(p.value);
  return pairwise_sum(std::span<const T>(values));
}

}  // namespace intkit::quad
