#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "divkit/report.hpp"
#include "divkit/sample_set.hpp"

namespace divkit {

struct Probe;

namespace whitening {

enum class Method { Cholesky, ZCAcor };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);  // "cholesky" | "zca-cor"

/// Linear whitening X* = W X with W^T W = Sigma^{-1}.
struct WhiteningMap {
  Eigen::MatrixXd matrix;
  Method method = Method::Cholesky;
  std::uint64_t source_fingerprint = 0;
  double ridge = 0.0;             // relative ridge actually applied (0 = none)
  double condition_number = 1.0;  // of the (ridged) source covariance
};

/// Cholesky: W = L^T with L L^T = Sigma^{-1} (upper triangular, positive diagonal).
/// ZCA-cor: W = P^{-1/2} V^{-1/2}, P the correlation matrix, V the diagonal of variances.
/// A positive `ridge` fits on Sigma + ridge * mean(diag Sigma) * I.
WhiteningMap fit_whitening(const WeightedSampleSet& mu, Method method, double ridge = 0.0);

/// Map fitted directly on a covariance matrix.
WhiteningMap fit_whitening_covariance(const Eigen::MatrixXd& sigma, Method method, double ridge = 0.0);

WeightedSampleSet apply_whitening(const WhiteningMap& map, const WeightedSampleSet& mu);

/// max |W Sigma W^T - I| for the given covariance.
double whitening_residual(const WhiteningMap& map, const Eigen::MatrixXd& sigma);

/// Evaluates `probe` on (S_mu(mu), S_nu(nu)), each side whitened by its own fitted map.
DivergenceReport whitened_divergence(const Probe& probe, const WeightedSampleSet& mu, const WeightedSampleSet& nu,
                                     Method method, double ridge = 0.0);

/// Largest coordinate deviation between apply(fit(mu), mu) and apply(fit(Q mu), Q mu) for
/// Q = diag(q).
double check_scale_stability(Method method, const WeightedSampleSet& mu, const Eigen::VectorXd& q);

}  // namespace whitening
}  // namespace divkit
