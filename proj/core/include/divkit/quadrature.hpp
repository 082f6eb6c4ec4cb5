#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace divkit::quad {

/// 15-point Kronrod rule with its embedded 7-point Gauss rule on [-1, 1], nodes ascending.
/// `gauss` is zero at the nodes that only belong to the Kronrod extension.
struct KronrodRule {
  std::array<double, 15> x{};
  std::array<double, 15> kronrod{};
  std::array<double, 15> gauss{};
};

const KronrodRule& gauss_kronrod15();

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// K15 value on [a, b] with |K15 - G7| as the error estimate.
template <class F>
Estimate gk15(F&& f, double a, double b) {
  const auto& r = gauss_kronrod15();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double k = 0.0, g = 0.0;
  for (std::size_t i = 0; i < 15; ++i) {
    const double fx = f(mid + half * r.x[i]);
    k += r.kronrod[i] * fx;
    g += r.gauss[i] * fx;
  }
  return {k * half, std::abs(k - g) * half};
}

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n), nodes ascending.
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

Rule gauss_legendre(std::size_t n);

/// Composite trapezoid on [a, b] with `panels` equal panels; integrand sampled on panels+1 nodes.
template <class F>
double trapezoid(F&& f, double a, double b, std::size_t panels) {
  const double h = (b - a) / static_cast<double>(panels);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < panels; ++i) s += f(a + h * static_cast<double>(i));
  return s * h;
}

}  // namespace divkit::quad
