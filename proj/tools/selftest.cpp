#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "cli.hpp"
#include "divkit/energy.hpp"
#include "divkit/fourier.hpp"
#include "divkit/transport.hpp"
#include "divkit/whitening.hpp"

namespace divkit::cli {

namespace {

WeightedSampleSet point(double x) { return WeightedSampleSet::from_values({x}); }

WeightedSampleSet gaussian_cloud(std::uint64_t seed, std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> c(n * dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k) c[i * dim + k] = z(rng) * (1.0 + static_cast<double>(k)) + 0.5 * (k ? c[i * dim] : 0.0);
  return {dim, std::move(c)};
}

}  // namespace

nlohmann::json run_selftest() {
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  auto record = [&](const std::string& name, double value, double expected, double tol) {
    const bool pass = std::isfinite(value) && std::abs(value - expected) <= tol;
    all = all && pass;
    checks.push_back({{"name", name},
                      {"value", json_number(value)},
                      {"expected", json_number(expected)},
                      {"tolerance", json_number(tol)},
                      {"pass", pass}});
  };

  for (double a : {0.5, 2.0}) {
    const auto e = energy::energy_sq(point(0.0), point(a), {1.0});
    record("energy_delta_pair_a=" + nlohmann::json(a).dump(), e.value, 2.0 * a, 1e-12 * a);

    const auto f = fourier::fourier_metric(point(0.0), point(a), {2.0, 1});
    record("fourier_delta_pair_a=" + nlohmann::json(a).dump(), f.value, std::sqrt(2.0 * std::numbers::pi * a),
           f.error_estimate);
    record("energy_fourier_identity_a=" + nlohmann::json(a).dump(), fourier::c_alpha(1, 1.0) * f.value * f.value,
           e.value, 2.0 * f.value * f.error_estimate * fourier::c_alpha(1, 1.0) + 1e-12);
  }

  const auto lb = transport::check_w1_lower_bound(point(0.0), point(1.0));
  record("w1_lower_bound_equality_lhs", lb.lhs, 1.0, 1e-12);
  record("w1_lower_bound_equality_rhs", lb.rhs, 1.0, 1e-12);

  {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> x(12), y(9);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const auto a = WeightedSampleSet::from_values(x), b = WeightedSampleSet::from_values(y);
    const double q = transport::wasserstein_1d(a, b, 2.0).value;
    const double lp = transport::wasserstein_lp(a, b, 2.0).first.value;
    record("w2_quantile_vs_lp", lp, q, 1e-10);
  }

  const auto cloud = gaussian_cloud(5, 400, 3);
  const Eigen::Vector3d q(0.2, 3.0, 40.0);
  for (auto m : {whitening::Method::Cholesky, whitening::Method::ZCAcor}) {
    const std::string tag(whitening::to_string(m));
    const auto map = whitening::fit_whitening(cloud, m);
    record("whitening_residual_" + tag, whitening::whitening_residual(map, covariance(cloud).matrix), 0.0, 1e-8);
    const double dev = whitening::check_scale_stability(m, cloud, q);
    record("whitening_scale_stability_" + tag, dev, 0.0, 1e-9);
  }

  const auto other = gaussian_cloud(6, 300, 3).scaled(1.3);
  const double base = energy::energy_sq(cloud, other, {1.5}).value;
  record("energy_scaling_c=3", energy::energy_sq(cloud.scaled(3.0), other.scaled(3.0), {1.5}).value,
         std::pow(3.0, 1.5) * base, 1e-12 * std::pow(3.0, 1.5) * base);

  return {{"checks", checks}, {"passed", all}};
}

}  // namespace divkit::cli
