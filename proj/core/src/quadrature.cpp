#include "divkit/quadrature.hpp"

#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "divkit/errors.hpp"

namespace divkit::quad {

namespace {

KronrodRule build_rule() {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& kx = GK::abscissa();
  const auto& kw = GK::weights();
  const auto& gx = G::abscissa();
  const auto& gw = G::weights();

  // Boost stores the nonnegative half; mirror it.
  std::array<double, 15> x{}, wk{}, wg{};
  std::size_t pos = 0;
  auto gauss_weight = [&](double node) {
    for (std::size_t j = 0; j < gx.size(); ++j)
      if (std::abs(gx[j] - node) < 1e-14) return gw[j];
    return 0.0;
  };
  for (std::size_t i = kx.size(); i-- > 0;) {
    if (kx[i] == 0.0) continue;
    x[pos] = -kx[i];
    wk[pos] = kw[i];
    wg[pos] = gauss_weight(kx[i]);
    ++pos;
  }
  for (std::size_t i = 0; i < kx.size(); ++i) {
    x[pos] = kx[i];
    wk[pos] = kw[i];
    wg[pos] = gauss_weight(kx[i]);
    ++pos;
  }
  return {x, wk, wg};
}

}  // namespace

const KronrodRule& gauss_kronrod15() {
  static const KronrodRule rule = build_rule();
  return rule;
}

Rule gauss_legendre(std::size_t n) {
  if (n == 0) throw InvalidArgument("Gauss-Legendre rule needs at least one node");
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p2) /
             static_cast<double>(k);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

}  // namespace divkit::quad
