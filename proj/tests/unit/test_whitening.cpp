#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "divkit/energy.hpp"
#include "divkit/errors.hpp"
#include "divkit/probe.hpp"
#include "divkit/transport.hpp"
#include "divkit/whitening.hpp"
#include "oracles.hpp"

using namespace divkit;
using namespace divkit::whitening;

namespace {

constexpr Method kMethods[] = {Method::Cholesky, Method::ZCAcor};

// Random orthogonal-times-diagonal matrix, well conditioned.
Eigen::MatrixXd random_linear(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = z(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd d(n);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (auto& v : d) v = u(rng);
  return q * d.asDiagonal();
}

// Correlated Gaussian cloud with covariance close to A A^T.
WeightedSampleSet correlated(std::uint64_t seed, std::size_t rows, std::size_t n) {
  return oracle::gaussian_set(seed, rows, n).transformed(random_linear(seed + 99, n));
}

Eigen::MatrixXd sample_cov(const WeightedSampleSet& s) {
  const Eigen::MatrixXd x = s.matrix();
  const Eigen::RowVectorXd m = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - m;
  return c.transpose() * c / static_cast<double>(x.rows());
}

}  // namespace

TEST(Whitening, ParseMethod) {
  EXPECT_EQ(parse_method("cholesky"), Method::Cholesky);
  EXPECT_EQ(parse_method("zca-cor"), Method::ZCAcor);
  EXPECT_EQ(to_string(Method::ZCAcor), "zca-cor");
  EXPECT_THROW(parse_method("pca"), InvalidArgument);
}

TEST(Whitening, IdentityCovarianceGivesIdentityMap) {
  for (Method m : kMethods) {
    const auto map = fit_whitening_covariance(Eigen::Matrix3d::Identity(), m);
    EXPECT_LT((map.matrix - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Whitening, DiagonalCovariance) {
  Eigen::MatrixXd sigma = Eigen::Vector2d(4.0, 9.0).asDiagonal();
  for (Method m : kMethods) {
    const auto map = fit_whitening_covariance(sigma, m);
    EXPECT_NEAR(map.matrix(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(map.matrix(1, 1), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(map.matrix(0, 1), 0.0);
    EXPECT_EQ(map.matrix(1, 0), 0.0);
  }
}

TEST(Whitening, CholeskyIsUpperTriangular) {
  const auto mu = correlated(3, 500, 3);
  const auto map = fit_whitening(mu, Method::Cholesky);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GT(map.matrix(i, i), 0.0);
    for (int j = 0; j < i; ++j) EXPECT_EQ(map.matrix(i, j), 0.0);
  }
}

TEST(Whitening, ResidualOnWhitenedSamples) {
  for (Method m : kMethods)
    for (std::size_t n : {1u, 2u, 4u}) {
      const auto mu = correlated(10 + n, 400, n);
      const auto map = fit_whitening(mu, m);
      EXPECT_LE(whitening_residual(map, sample_cov(mu)), 1e-10);
      const auto white = apply_whitening(map, mu);
      EXPECT_LT((sample_cov(white) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Whitening, ApplyIsTheLinearMap) {
  const auto mu = correlated(4, 50, 2);
  const auto map = fit_whitening(mu, Method::ZCAcor);
  const auto white = apply_whitening(map, mu);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Eigen::Vector2d x(mu.coord(i, 0), mu.coord(i, 1));
    const Eigen::Vector2d y = map.matrix * x;
    EXPECT_NEAR(white.coord(i, 0), y(0), 1e-12);
    EXPECT_NEAR(white.coord(i, 1), y(1), 1e-12);
    EXPECT_EQ(white.weight(i), mu.weight(i));
  }
}

TEST(Whitening, MismatchedDimensionRejected) {
  const auto map = fit_whitening(correlated(1, 30, 2), Method::Cholesky);
  EXPECT_THROW(apply_whitening(map, oracle::uniform_set(1, 10, 3)), DimensionMismatch);
}

TEST(Whitening, SingularCovarianceNeedsRidge) {
  const WeightedSampleSet line(2, {0.0, 0.0, 1.0, 1.0, 2.0, 2.0});
  for (Method m : kMethods) {
    EXPECT_THROW(fit_whitening(line, m), DegenerateCovariance);
    const auto map = fit_whitening(line, m, 1e-6);
    EXPECT_GT(map.ridge, 0.0);
    EXPECT_TRUE(map.matrix.allFinite());
    EXPECT_GT(map.condition_number, 1e5);
  }
}

TEST(Whitening, ZcaCorMatchesFormula) {
  const auto mu = correlated(5, 300, 3);
  const Eigen::MatrixXd sigma = sample_cov(mu);
  const Eigen::VectorXd sd = sigma.diagonal().cwiseSqrt();
  const Eigen::MatrixXd p = sd.cwiseInverse().asDiagonal() * sigma * sd.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
  const Eigen::MatrixXd p_inv_sqrt =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd ref = p_inv_sqrt * sd.cwiseInverse().asDiagonal();
  EXPECT_LT((fit_whitening(mu, Method::ZCAcor).matrix - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WhitenedDivergence, InvariantUnderIndependentLinearMaps) {
  // D_S(Q X, Q' Y) = D_S(X, Y) for probes applied after whitening each side on its own.
  for (Method m : kMethods) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto x = correlated(100 + s, 80, 2);
      const auto y = oracle::uniform_set(200 + s, 70, 2, -1, 2);
      const Eigen::MatrixXd q = Eigen::Vector2d(3.0, 0.2).asDiagonal();
      const Eigen::MatrixXd q2 = Eigen::Vector2d(0.5, 7.0).asDiagonal();
      for (const char* probe : {"energy:1", "energy:1.5", "w1", "w2"}) {
        const auto pr = parse_probe(probe);
        const double base = whitened_divergence(pr, x, y, m).value;
        const double moved = whitened_divergence(pr, x.transformed(q), y.transformed(q2), m).value;
        EXPECT_NEAR(moved, base, 1e-9 * std::max(1.0, base)) << probe;
      }
    }
  }
}

TEST(WhitenedDivergence, ZcaCorAbsorbsPositiveDiagonalScaling) {
  // ZCA-cor commutes with positive diagonal scaling, Cholesky with upper-triangular maps.
  const auto x = correlated(7, 100, 3);
  const auto pr = parse_probe("energy:1");
  const Eigen::MatrixXd d = Eigen::Vector3d(0.01, 5.0, 300.0).asDiagonal();
  EXPECT_NEAR(whitened_divergence(pr, x, x.transformed(d), Method::ZCAcor).value, 0.0, 1e-9);
  Eigen::Matrix3d u;
  u << 2.0, 0.3, -1.0, 0.0, 0.5, 4.0, 0.0, 0.0, 1.5;
  EXPECT_NEAR(whitened_divergence(pr, x, x.transformed(u), Method::Cholesky).value, 0.0, 1e-9);
}

TEST(WhitenedDivergence, ScaleStability) {
  const auto mu = correlated(8, 200, 3);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> logq(std::log(0.1), std::log(10.0));
  for (Method m : kMethods) {
    EXPECT_EQ(check_scale_stability(m, mu, Eigen::Vector3d::Ones()), 0.0);
    for (int t = 0; t < 20; ++t) {
      const Eigen::Vector3d q(std::exp(logq(rng)), std::exp(logq(rng)), std::exp(logq(rng)));
      EXPECT_LE(check_scale_stability(m, mu, q), 1e-9);
    }
  }
}

TEST(WhitenedDivergence, Deterministic) {
  const auto x = correlated(9, 60, 2), y = oracle::gaussian_set(10, 50, 2, 0.5);
  const auto pr = parse_probe("energy:1");
  const auto a = whitened_divergence(pr, x, y, Method::ZCAcor);
  const auto b = whitened_divergence(pr, x, y, Method::ZCAcor);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.diagnostics, b.diagnostics);
}

TEST(WhitenedDivergence, W1LowerBoundSurvivesWhitening) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const auto x = apply_whitening(fit_whitening(correlated(rng(), 40, 2), Method::ZCAcor), correlated(rng(), 40, 2));
    const auto y = oracle::gaussian_set(rng(), 35, 2, 0.3);
    const double half_energy = 0.5 * energy::energy_sq(x, y, {1.0}).value;
    EXPECT_LE(half_energy, transport::wasserstein(x, y, 1.0).value + 1e-12);
  }
}

TEST(WhitenedDivergence, W2SquaredSubadditiveOnWhiteInputs) {
  // W2^2(X + Z, Y + W) <= W2^2(X, Y) + W2^2(Z, W) for independent pairs, checked on product
  // measures of small equal-size 1-D sets where the sum law is exact.
  auto sum_law = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    for (double u : a)
      for (double v : b) out.push_back(u + v);
    return WeightedSampleSet::from_values(out);
  };
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(6), y(6), zz(5), w(5);
    // centred: the cross term 2 E[X - Y] E[Z - W] vanishes only for matched means
    for (auto* v : {&x, &y, &zz, &w}) {
      for (auto& e : *v) e = z(rng);
      const double m = oracle::sample_mean(*v);
      for (auto& e : *v) e -= m;
    }
    auto w2sq = [](const WeightedSampleSet& a, const WeightedSampleSet& b) {
      const double v = transport::wasserstein(a, b, 2.0).value;
      return v * v;
    };
    const double lhs = w2sq(sum_law(x, zz), sum_law(y, w));
    const double rhs = w2sq(WeightedSampleSet::from_values(x), WeightedSampleSet::from_values(y)) +
                       w2sq(WeightedSampleSet::from_values(zz), WeightedSampleSet::from_values(w));
    EXPECT_LE(lhs, rhs + 1e-12);
  }
}
