#include "divkit/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "divkit/errors.hpp"
#include "divkit/parallel.hpp"

namespace divkit {

std::string_view to_string(Norm n) { return n == Norm::L1 ? "l1" : "l2"; }

Norm parse_norm(std::string_view s) {
  if (s == "l2" || s == "euclidean") return Norm::Euclidean;
  if (s == "l1") return Norm::L1;
  throw InvalidArgument("unknown norm '" + std::string(s) + "' (expected l1 or l2)");
}

double distance(std::span<const double> x, std::span<const double> y, Norm norm) {
  double s = 0.0;
  if (norm == Norm::L1) {
    for (std::size_t k = 0; k < x.size(); ++k) s += std::abs(x[k] - y[k]);
    return s;
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

struct Singular {
  std::size_t i;
  std::size_t j;
};

// Power of a distance given either its square (euclidean) or its value (l1).
inline double kernel_from_sq(double d2, double alpha) {
  if (alpha == 1.0) return std::sqrt(d2);
  if (alpha == 2.0) return d2;
  if (d2 == 0.0) return 0.0;
  return std::pow(d2, 0.5 * alpha);
}

inline double kernel_from_dist(double d, double alpha) {
  if (alpha == 1.0) return d;
  if (d == 0.0) return 0.0;
  return std::pow(d, alpha);
}

double direct_sum(const WeightedSampleSet& a, const WeightedSampleSet& b, double alpha, Norm norm,
                  bool exclude_diagonal) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t dim = a.dim();
  const double* xa = a.coords().data();
  const double* xb = b.coords().data();
  const bool singular_possible = alpha < 0.0;
  const double r2 = kSingularRadius * kSingularRadius;

  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  std::vector<std::optional<Singular>> bad(blocks);

  parallel_for_blocks(n, kReductionBlock, [&](std::size_t begin, std::size_t end) {
    CompensatedSum s;
    const std::size_t blk = begin / kReductionBlock;
    for (std::size_t i = begin; i < end; ++i) {
      const double* xi = xa + i * dim;
      CompensatedSum row;
      for (std::size_t j = 0; j < m; ++j) {
        if (exclude_diagonal && i == j) continue;
        const double* yj = xb + j * dim;
        double k;
        if (norm == Norm::Euclidean) {
          double d2 = 0.0;
          for (std::size_t c = 0; c < dim; ++c) {
            const double d = xi[c] - yj[c];
            d2 += d * d;
          }
          if (singular_possible && d2 < r2) {
            bad[blk] = Singular{i, j};
            return;
          }
          k = kernel_from_sq(d2, alpha);
        } else {
          double d1 = 0.0;
          for (std::size_t c = 0; c < dim; ++c) d1 += std::abs(xi[c] - yj[c]);
          if (singular_possible && d1 < kSingularRadius) {
            bad[blk] = Singular{i, j};
            return;
          }
          k = kernel_from_dist(d1, alpha);
        }
        row += b.weight(j) * k;
      }
      s += a.weight(i) * row.value();
    }
    partial[blk] = s.value();
  });

  for (const auto& p : bad) {
    if (p) {
      throw SingularPairError(p->i, p->j,
                              "points " + std::to_string(p->i) + " and " + std::to_string(p->j) +
                                  " coincide under a negative-order kernel");
    }
  }
  CompensatedSum total;
  for (double p : partial) total += p;
  return total.value();
}

// 1-D, alpha = 1: sum_i w_i sum_j v_j |x_i - y_j| from prefix sums over sorted y.
double sorted_abs_sum(const WeightedSampleSet& a, const WeightedSampleSet& b) {
  const std::size_t m = b.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t p, std::size_t q) { return b.coord(p, 0) < b.coord(q, 0); });
  std::vector<double> ys(m), cum_w(m + 1, 0.0), cum_wy(m + 1, 0.0);
  CompensatedSum sw, swy;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = order[k];
    ys[k] = b.coord(j, 0);
    sw += b.weight(j);
    swy += b.weight(j) * ys[k];
    cum_w[k + 1] = sw.value();
    cum_wy[k + 1] = swy.value();
  }
  const double total_w = cum_w[m];
  const double total_wy = cum_wy[m];
  return deterministic_sum(a.size(), [&](std::size_t i) {
    const double x = a.coord(i, 0);
    const auto k = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), x) - ys.begin());
    const double below = x * cum_w[k] - cum_wy[k];
    const double above = (total_wy - cum_wy[k]) - x * (total_w - cum_w[k]);
    return a.weight(i) * (below + above);
  });
}

double ordered_sum(const WeightedSampleSet& a, const WeightedSampleSet& b, double alpha, Norm norm,
                   PairwiseMethod method, bool exclude_diagonal) {
  if (method == PairwiseMethod::Auto && a.dim() == 1 && alpha == 1.0) return sorted_abs_sum(a, b);
  return direct_sum(a, b, alpha, norm, exclude_diagonal);
}

void check_alpha(double alpha) {
  if (!std::isfinite(alpha)) throw InvalidArgument("kernel exponent must be finite");
}

}  // namespace

double pairwise_power_sum(const WeightedSampleSet& a, const WeightedSampleSet& b, double alpha, Norm norm,
                          PairwiseMethod method) {
  check_alpha(alpha);
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("pairwise sum of sets with dims " + std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
  }
  if (a.fingerprint() <= b.fingerprint()) return ordered_sum(a, b, alpha, norm, method, false);
  try {
    return ordered_sum(b, a, alpha, norm, method, false);
  } catch (const SingularPairError& e) {
    throw SingularPairError(e.second(), e.first(),
                            "points " + std::to_string(e.second()) + " and " + std::to_string(e.first()) +
                                " coincide under a negative-order kernel");
  }
}

double self_power_sum(const WeightedSampleSet& a, double alpha, Norm norm, PairwiseMethod method) {
  check_alpha(alpha);
  return ordered_sum(a, a, alpha, norm, method, true);
}

}  // namespace divkit
