#pragma once

#include <string_view>

#include "divkit/sample_set.hpp"

namespace divkit {

enum class Norm { Euclidean, L1 };

std::string_view to_string(Norm n);
Norm parse_norm(std::string_view s);  // "l2"/"euclidean" or "l1"

/// Coincidence radius for negative-order kernels.
inline constexpr double kSingularRadius = 1e-12;

enum class PairwiseMethod {
  Auto,    // sorted prefix sums for 1-D, alpha = 1; direct double loop otherwise
  Direct,  // always the O(N M) double loop
};

/// sum_i sum_j w_i v_j |x_i - y_j|^alpha.
///
/// Arguments are put in a canonical order before summing, so swapping them returns the same
/// bits. With alpha < 0 a pair closer than kSingularRadius raises SingularPairError carrying the
/// indices (in argument order).
double pairwise_power_sum(const WeightedSampleSet& a, const WeightedSampleSet& b, double alpha,
                          Norm norm = Norm::Euclidean, PairwiseMethod method = PairwiseMethod::Auto);

/// sum over i != j of w_i w_j |x_i - x_j|^alpha. Equals pairwise_power_sum(a, a, alpha) for
/// alpha > 0; for alpha < 0 it is the finite off-diagonal part of the self-interaction.
double self_power_sum(const WeightedSampleSet& a, double alpha, Norm norm = Norm::Euclidean,
                      PairwiseMethod method = PairwiseMethod::Auto);

/// Distance between two points under the given norm.
double distance(std::span<const double> x, std::span<const double> y, Norm norm);

}  // namespace divkit
