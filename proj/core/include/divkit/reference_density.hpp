#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace divkit {

/// Closed-form densities: the unit-mass Maxwellian M_{1,u,T} on R^n and the inverse-Gamma
/// wealth equilibrium with Pareto index mu (shape mu, scale mu - 1, so the mean is 1).
class ReferenceDensity {
 public:
  enum class Kind { Gaussian, InverseGamma };

  static ReferenceDensity gaussian(Eigen::VectorXd mean, double temperature);
  /// Centered Maxwellian in `dim` dimensions.
  static ReferenceDensity maxwellian(std::size_t dim, double temperature = 1.0);
  static ReferenceDensity inverse_gamma(double mu);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  double temperature() const noexcept { return temperature_; }
  double pareto_index() const noexcept { return mu_; }
  double shape() const noexcept { return mu_; }
  double scale() const noexcept { return mu_ - 1.0; }

  double pdf(std::span<const double> x) const;
  double log_pdf(std::span<const double> x) const;
  /// Gradient of log pdf at x, written into `out` (size dim).
  void score(std::span<const double> x, std::span<double> out) const;

  /// Closed forms: -int f log f and int |grad f|^2 / f.
  double entropy() const;
  double fisher() const;

  /// One-dimensional CDF, survival function and quantile (inverse-Gamma and 1-D Gaussian).
  double cdf(double x) const;
  double survival(double x) const;
  double quantile(double q) const;

 private:
  ReferenceDensity() = default;

  Kind kind_ = Kind::Gaussian;
  std::size_t dim_ = 1;
  Eigen::VectorXd mean_;
  double temperature_ = 1.0;
  double mu_ = 0.0;
};

}  // namespace divkit
