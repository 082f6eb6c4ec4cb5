#include "divkit/whitening.hpp"

#include <algorithm>
#include <cmath>

#include "divkit/errors.hpp"
#include "divkit/probe.hpp"

namespace divkit::whitening {

std::string_view to_string(Method m) { return m == Method::Cholesky ? "cholesky" : "zca-cor"; }

Method parse_method(std::string_view s) {
  if (s == "cholesky" || s == "chol") return Method::Cholesky;
  if (s == "zca-cor" || s == "zcacor" || s == "zca_cor") return Method::ZCAcor;
  throw InvalidArgument("unknown whitening method '" + std::string(s) + "' (expected cholesky or zca-cor)");
}

namespace {

Eigen::MatrixXd symmetric(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

WhiteningMap fit_whitening_covariance(const Eigen::MatrixXd& sigma_in, Method method, double ridge) {
  if (sigma_in.rows() != sigma_in.cols() || sigma_in.rows() == 0) {
    throw InvalidArgument("covariance must be a nonempty square matrix");
  }
  if (!sigma_in.allFinite()) throw NumericalError("covariance has non-finite entries");
  if (ridge < 0.0 || !std::isfinite(ridge)) throw InvalidArgument("ridge must be a finite nonnegative number");

  const auto n = sigma_in.rows();
  Eigen::MatrixXd sigma = symmetric(sigma_in);
  if (ridge > 0.0) sigma += ridge * (sigma.trace() / static_cast<double>(n)) * Eigen::MatrixXd::Identity(n, n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(n - 1);
  const double trace = sigma.trace();
  if (!(trace > 0.0) || lmin <= 1e-10 * trace) {
    throw DegenerateCovariance(ridge > 0.0 ? "covariance is degenerate even after the ridge"
                                           : "covariance is degenerate; refit with a positive ridge");
  }

  WhiteningMap map;
  map.method = method;
  map.ridge = ridge;
  map.condition_number = lmax / lmin;

  if (method == Method::Cholesky) {
    const Eigen::LLT<Eigen::MatrixXd> chol_sigma(sigma);
    if (chol_sigma.info() != Eigen::Success) throw DegenerateCovariance("covariance is not positive definite");
    const Eigen::MatrixXd precision = symmetric(chol_sigma.solve(Eigen::MatrixXd::Identity(n, n)));
    const Eigen::LLT<Eigen::MatrixXd> chol(precision);
    if (chol.info() != Eigen::Success) throw DegenerateCovariance("precision matrix is not positive definite");
    map.matrix = chol.matrixL().transpose();
    return map;
  }

  const Eigen::VectorXd sd = sigma.diagonal().cwiseSqrt();
  const Eigen::VectorXd inv_sd = sd.cwiseInverse();
  const Eigen::MatrixXd corr = symmetric(inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ce(corr);
  if (ce.info() != Eigen::Success) throw NumericalError("eigendecomposition of the correlation matrix failed");
  const double floor = 1e-12 * ce.eigenvalues().maxCoeff();
  const Eigen::VectorXd inv_root = ce.eigenvalues().cwiseMax(floor).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd corr_inv_sqrt =
      symmetric(ce.eigenvectors() * inv_root.asDiagonal() * ce.eigenvectors().transpose());
  map.matrix = corr_inv_sqrt * inv_sd.asDiagonal();
  return map;
}

WhiteningMap fit_whitening(const WeightedSampleSet& mu, Method method, double ridge) {
  const Covariance cov = covariance(mu);
  if (cov.degenerate && ridge == 0.0) {
    throw DegenerateCovariance("covariance is degenerate (smallest eigenvalue " + std::to_string(cov.min_eigenvalue) +
                               "); refit with a positive ridge");
  }
  WhiteningMap map = fit_whitening_covariance(cov.matrix, method, ridge);
  map.source_fingerprint = mu.fingerprint();
  return map;
}

WeightedSampleSet apply_whitening(const WhiteningMap& map, const WeightedSampleSet& mu) {
  if (static_cast<std::size_t>(map.matrix.cols()) != mu.dim()) {
    throw DimensionMismatch("whitening map of size " + std::to_string(map.matrix.cols()) +
                            " applied to samples of dim " + std::to_string(mu.dim()));
  }
  return mu.transformed(map.matrix);
}

double whitening_residual(const WhiteningMap& map, const Eigen::MatrixXd& sigma) {
  const auto n = sigma.rows();
  return (map.matrix * sigma * map.matrix.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

DivergenceReport whitened_divergence(const Probe& probe, const WeightedSampleSet& mu, const WeightedSampleSet& nu,
                                     Method method, double ridge) {
  const WhiteningMap wm = fit_whitening(mu, method, ridge);
  const WhiteningMap wn = fit_whitening(nu, method, ridge);
  DivergenceReport r = evaluate(probe, apply_whitening(wm, mu), apply_whitening(wn, nu));
  r.diagnostics["whitening"] = {
      {"method", std::string(to_string(method))},
      {"frame", "per_input"},
      {"condition_number_mu", wm.condition_number},
      {"condition_number_nu", wn.condition_number},
      {"ridge", ridge},
      {"scale_stable", ridge == 0.0},
  };
  return r;
}

double check_scale_stability(Method method, const WeightedSampleSet& mu, const Eigen::VectorXd& q) {
  if (static_cast<std::size_t>(q.size()) != mu.dim()) throw DimensionMismatch("scaling vector has wrong dimension");
  if ((q.array() <= 0.0).any()) throw InvalidArgument("scaling must be positive");
  const WeightedSampleSet a = apply_whitening(fit_whitening(mu, method), mu);
  const WeightedSampleSet qmu = mu.transformed(q.asDiagonal().toDenseMatrix());
  const WeightedSampleSet b = apply_whitening(fit_whitening(qmu, method), qmu);
  double dev = 0.0;
  for (std::size_t k = 0; k < a.coords().size(); ++k) dev = std::max(dev, std::abs(a.coords()[k] - b.coords()[k]));
  return dev;
}

}  // namespace divkit::whitening
