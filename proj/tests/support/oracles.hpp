#pragma once

// Reference computations used as independent oracles. Everything here is written the slow,
// obvious way and shares no code with the library kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "divkit/sample_set.hpp"

namespace oracle {

inline divkit::WeightedSampleSet gaussian_set(std::uint64_t seed, std::size_t n, std::size_t dim, double shift = 0.0,
                                              double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> c(n * dim);
  for (auto& v : c) v = shift + scale * z(rng);
  return {dim, std::move(c)};
}

inline divkit::WeightedSampleSet uniform_set(std::uint64_t seed, std::size_t n, std::size_t dim, double lo = -1.0,
                                             double hi = 1.0, bool random_weights = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> c(n * dim), w;
  for (auto& v : c) v = u(rng);
  if (random_weights) {
    std::uniform_real_distribution<double> uw(0.1, 1.0);
    w.resize(n);
    for (auto& v : w) v = uw(rng);
  }
  return {dim, std::move(c), std::move(w)};
}

inline double norm(const divkit::WeightedSampleSet& a, std::size_t i, const divkit::WeightedSampleSet& b,
                   std::size_t j, bool l1 = false) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const double d = a.coord(i, k) - b.coord(j, k);
    s += l1 ? std::abs(d) : d * d;
  }
  return l1 ? s : std::sqrt(s);
}

// Plain double loop, no compensation, no reordering.
inline double power_sum(const divkit::WeightedSampleSet& a, const divkit::WeightedSampleSet& b, double alpha,
                        bool l1 = false, bool skip_diagonal = false) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (skip_diagonal && i == j) continue;
      s += static_cast<long double>(a.weight(i) * b.weight(j) * std::pow(norm(a, i, b, j, l1), alpha));
    }
  return static_cast<double>(s);
}

// E|N(m, s^2)|
inline double folded_normal_mean(double m, double s) {
  const double phi = 0.5 * std::erfc(m / (s * std::sqrt(2.0)));  // Phi(-m/s)
  return s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-m * m / (2.0 * s * s)) + m * (1.0 - 2.0 * phi);
}

// min over permutations of mean cost |x_i - y_pi(i)|^p for equal-size uniform sets.
inline double permutation_cost(const divkit::WeightedSampleSet& a, const divkit::WeightedSampleSet& b, double p) {
  std::vector<std::size_t> perm(a.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  double best = INFINITY;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += std::pow(norm(a, i, b, perm[i]), p);
    best = std::min(best, c / static_cast<double>(perm.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Equal-size uniform 1-D sets: W_p^p = mean |x_(i) - y_(i)|^p over sorted values.
inline double sorted_cost(std::vector<double> x, std::vector<double> y, double p) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) c += std::pow(std::abs(x[i] - y[i]), p);
  return c / static_cast<double>(x.size());
}

// Composite Simpson on [a, b] with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, std::size_t panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return s * h / 3.0;
}

// Hill estimator of the tail index from the k largest values, written out directly.
inline double hill(std::vector<double> v, std::size_t k) {
  std::sort(v.begin(), v.end(), std::greater<>());
  const double threshold = std::log(v[k]);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(v[i]) - threshold;
  return static_cast<double>(k) / s;
}

// All pairwise sums a_i + b_j with product weights.
inline divkit::WeightedSampleSet convolve(const divkit::WeightedSampleSet& a, const divkit::WeightedSampleSet& b, double ca = 1.0, double cb = 1.0) {
  std::vector<double> c, w;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      for (std::size_t k = 0; k < a.dim(); ++k) c.push_back(ca * a.coord(i, k) + cb * b.coord(j, k));
      w.push_back(a.weight(i) * b.weight(j));
    }
  return {a.dim(), std::move(c), std::move(w)};
}

// Affine image of y with exactly the mean and covariance of x.
inline divkit::WeightedSampleSet match_mean_cov(const divkit::WeightedSampleSet& y, const divkit::WeightedSampleSet& x) {
  const Eigen::MatrixXd lx = divkit::covariance(x).matrix.llt().matrixL();
  const Eigen::MatrixXd ly = divkit::covariance(y).matrix.llt().matrixL();
  const Eigen::MatrixXd a = lx * ly.inverse();
  const Eigen::VectorXd my = divkit::mean(y), mx = divkit::mean(x);
  Eigen::MatrixXd pts = y.matrix();
  pts = ((pts.rowwise() - my.transpose()) * a.transpose()).rowwise() + mx.transpose();
  return divkit::WeightedSampleSet::from_matrix(pts, y.weights());
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace oracle
