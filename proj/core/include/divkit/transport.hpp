#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "divkit/fourier.hpp"
#include "divkit/report.hpp"
#include "divkit/sample_set.hpp"

namespace divkit::transport {

struct PlanEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<PlanEntry> pairs;  // positive masses only
  double cost = 0.0;             // sum mass * |x_i - y_j|^p
  double order_p = 1.0;
};

nlohmann::json to_json(const TransportPlan& plan);

/// Exact W_p of one-dimensional inputs via the monotone (quantile) coupling.
DivergenceReport wasserstein_1d(const WeightedSampleSet& mu, const WeightedSampleSet& nu, double p);

inline constexpr std::size_t kDefaultMaxSupport = 512;

/// Exact W_p (Euclidean ground cost) by the transportation simplex.
std::pair<DivergenceReport, TransportPlan> wasserstein_lp(const WeightedSampleSet& mu, const WeightedSampleSet& nu,
                                                          double p, std::size_t max_support = kDefaultMaxSupport);

/// Quantile coupling in 1-D, transportation simplex otherwise.
DivergenceReport wasserstein(const WeightedSampleSet& mu, const WeightedSampleSet& nu, double p);

/// Largest |row/column sum - weight| of a plan.
double plan_marginal_error(const TransportPlan& plan, const WeightedSampleSet& mu, const WeightedSampleSet& nu);

struct W1LowerBound {
  double lhs = 0.0;  // energy_sq(alpha = 1) / 2
  double rhs = 0.0;  // W_1
  double slack = 0.0;
};

W1LowerBound check_w1_lower_bound(const WeightedSampleSet& mu, const WeightedSampleSet& nu);

struct W1UpperBound {
  double w1 = 0.0;
  double f_metric = 0.0;  // F_{n+1}
  double f_error = 0.0;
};

W1UpperBound check_w1_upper_bound(const WeightedSampleSet& mu, const WeightedSampleSet& nu,
                                  const fourier::QuadratureSpec& quad = {});

/// Least-squares slope of log w against log f; needs at least four points with f, w > 0.
double loglog_slope(std::span<const double> f, std::span<const double> w);

struct ShiftFamilyFit {
  std::vector<double> shifts;
  std::vector<W1UpperBound> points;
  double slope = 0.0;
};

/// nu_t = mu shifted by t along the first axis, for each t in `shifts`.
ShiftFamilyFit w1_shift_family(const WeightedSampleSet& mu, std::span<const double> shifts,
                               const fourier::QuadratureSpec& quad = {});

}  // namespace divkit::transport
