#pragma once

#include <Eigen/Dense>

#include "divkit/pairwise.hpp"
#include "divkit/report.hpp"
#include "divkit/sample_set.hpp"
#include "divkit/whitening.hpp"

namespace divkit::energy {

/// Kernel order alpha and norm of a generalized energy distance.
struct EnergyOrder {
  double alpha = 1.0;
  Norm norm = Norm::Euclidean;

  /// floor(alpha / 2)
  int k() const;
  /// Sign making the double integral nonnegative: (-1)^{k+1} for alpha > 0, +1 for alpha < 0.
  int sign() const;

  /// Throws InvalidArgument for even integer alpha (including 0), non-finite alpha, or l1 with
  /// alpha != 1.
  void validate() const;
  /// Additionally checks alpha > -dim.
  void validate(std::size_t dim) const;
};

inline constexpr double kDefaultMomentTol = 1e-8;

/// Squared energy distance sign * iint |x - y|^alpha d(mu - nu) d(mu - nu), evaluated as
/// sign * (self_mu + self_nu - 2 cross). For alpha < 0 the self sums exclude the diagonal.
DivergenceReport energy_sq(const WeightedSampleSet& mu, const WeightedSampleSet& nu, const EnergyOrder& order,
                           double moment_tol = kDefaultMomentTol);

/// Gradient in theta of energy_sq(mu, nu_base + theta) (Euclidean norm, alpha > 0), with
/// subgradient 0 at coincident points.
Eigen::VectorXd energy_sq_location_gradient(const WeightedSampleSet& mu, const WeightedSampleSet& nu_base,
                                            const Eigen::VectorXd& theta, const EnergyOrder& order);

/// sqrt(int (F_mu - F_nu)^2 dx) for one-dimensional inputs, exact over merged breakpoints.
DivergenceReport cramer(const WeightedSampleSet& mu, const WeightedSampleSet& nu);

/// GMD(mu, mu) / (2 mean) for one-dimensional mu.
double gini_index(const WeightedSampleSet& mu);

/// Cross Gini mean difference sum_ij w_i v_j |x_i - y_j|.
double gmd(const WeightedSampleSet& mu, const WeightedSampleSet& nu, Norm norm = Norm::Euclidean);

/// Mahalanobis Gini: sum_ij w_i w_j |x_i - x_j|_{Sigma^-1} / (2 |m|_{Sigma^-1}).
double gini_t(const WeightedSampleSet& mu);

/// l1 Gini in a whitened frame: sum_ij w_i w_j |W(x_i - x_j)|_1 / (2 |W m|_1).
double gini_l1(const WeightedSampleSet& mu, const whitening::WhiteningMap& zca);

struct EnergyGini {
  double gmd_cross = 0.0;
  double gini_mu = 0.0;
  double gini_nu = 0.0;
  double mean_mu = 0.0;
  double mean_nu = 0.0;
  /// 2 gmd_cross - 2 mean_mu gini_mu - 2 mean_nu gini_nu
  double energy_sq_1 = 0.0;
};

EnergyGini energy_gini_decomposition(const WeightedSampleSet& mu, const WeightedSampleSet& nu);

}  // namespace divkit::energy
