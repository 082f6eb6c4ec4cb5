#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace divkit {

/// Empirical probability measure: points in R^dim with nonnegative weights summing to one.
///
/// Coordinates are stored row-major (point i occupies [i*dim, (i+1)*dim)). Instances are
/// immutable once built.
class WeightedSampleSet {
 public:
  /// `weights` may be empty (uniform) or hold one nonnegative entry per point; any positive
  /// total is renormalized to one.
  WeightedSampleSet(std::size_t dim, std::vector<double> coords, std::vector<double> weights = {});

  /// One-dimensional convenience constructor.
  static WeightedSampleSet from_values(std::vector<double> values, std::vector<double> weights = {});
  /// Rows of `points` are the sample points.
  static WeightedSampleSet from_matrix(const Eigen::MatrixXd& points, std::vector<double> weights = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  double coord(std::size_t i, std::size_t k) const noexcept { return coords_[i * dim_ + k]; }
  double weight(std::size_t i) const noexcept { return weights_[i]; }
  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// FNV-1a hash over dim, coordinates and weights (bit patterns). Equal sets hash equal.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  /// Points as an N x dim matrix.
  Eigen::MatrixXd matrix() const;

  /// Same weights, every point mapped to `a * x`.
  WeightedSampleSet transformed(const Eigen::MatrixXd& a) const;
  /// Same weights, every point mapped to `x + shift`.
  WeightedSampleSet shifted(std::span<const double> shift) const;
  /// Same weights, every coordinate multiplied by `c`.
  WeightedSampleSet scaled(double c) const;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
  std::uint64_t fingerprint_ = 0;
};

/// Reads a CSV file: header line, numeric columns, optional weight column.
///
/// With no `weight_column`, a column named "weight" (case-insensitive) is used when present,
/// otherwise weights are uniform. A named column that is absent is an error.
WeightedSampleSet load_samples(const std::string& path,
                               const std::optional<std::string>& weight_column = std::nullopt);
WeightedSampleSet parse_samples(const std::string& text,
                                const std::optional<std::string>& weight_column = std::nullopt);

/// Writes x1..xn plus a weight column with round-trip precision.
void save_samples(const std::string& path, const WeightedSampleSet& set);
std::string format_samples(const WeightedSampleSet& set);

/// One mixed moment E[x_1^{k_1} ... x_n^{k_n}].
struct Moment {
  std::vector<int> exponents;
  double value = 0.0;
};

/// All mixed moments of total order 0..max_order in graded lexicographic order.
struct MomentTable {
  std::size_t dim = 0;
  int max_order = 0;
  std::vector<Moment> entries;

  /// Moments of exactly total order k.
  std::vector<Moment> of_order(int k) const;
};

inline constexpr int kMaxMomentOrder = 4;

/// Exact weighted power sums. Throws InvalidArgument when order > 4.
MomentTable moments(const WeightedSampleSet& mu, int order);

struct MomentMismatch {
  std::vector<int> exponents;
  double lhs = 0.0;
  double rhs = 0.0;

  int order() const;
  std::string describe() const;
};

/// First moment of total order 1..order where |a - b| > tol * max(1, |a|, |b|).
std::optional<MomentMismatch> moment_mismatch(const WeightedSampleSet& a, const WeightedSampleSet& b,
                                              int order, double tol);

/// Largest l <= max_order such that all moments of order 1..l agree within tol.
int matched_moment_order(const WeightedSampleSet& a, const WeightedSampleSet& b, int max_order,
                         double tol);

Eigen::VectorXd mean(const WeightedSampleSet& mu);

struct Covariance {
  Eigen::MatrixXd matrix;
  bool degenerate = false;
  double min_eigenvalue = 0.0;
};

/// Weighted covariance without Bessel correction, symmetrized. Flags the matrix as degenerate
/// when its smallest eigenvalue is at most 1e-10 * trace.
Covariance covariance(const WeightedSampleSet& mu);

}  // namespace divkit
