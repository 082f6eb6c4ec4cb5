#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "divkit/probe.hpp"
#include "divkit/reference_density.hpp"
#include "divkit/report.hpp"
#include "divkit/sample_set.hpp"

namespace divkit::kinetics {

enum class EtaLaw { TwoPoint, UniformSymmetric };
enum class ClampPolicy { Redraw, Truncate };

std::string_view to_string(EtaLaw e);
std::string_view to_string(ClampPolicy c);
EtaLaw parse_eta_law(std::string_view s);          // "two-point" | "uniform"
ClampPolicy parse_clamp_policy(std::string_view s);  // "redraw" | "truncate"

/// Binary trade v* = (1 - e lambda) v + e lambda w + eta v with Var(eta) = e sigma, where e
/// is the grazing scale. Kinetic time advances by 2 e per N interactions, so each agent
/// accumulates drift lambda and variance sigma per unit time as in the Fokker-Planck limit.
struct TradeParams {
  double lambda = 0.5;
  double sigma = 0.5;
  EtaLaw eta = EtaLaw::TwoPoint;
  ClampPolicy clamp = ClampPolicy::Redraw;
  double grazing = 0.01;
  /// Rescale each traded pair to its pre-trade total, making the ensemble mean exact.
  bool conserve_mean = false;

  double pareto_index() const { return 1.0 + 2.0 * lambda / sigma; }
  void validate() const;
};

struct EnsembleState {
  std::vector<double> wealths;
  double time = 0.0;
  std::uint64_t interactions = 0;
  std::uint64_t seed = 0;
  TradeParams params;
  std::mt19937_64 rng;
  std::uint64_t redraws = 0;
  std::uint64_t truncations = 0;
  /// Sum of the conditional variances of the total-wealth increments (for the mean's SE).
  double increment_variance = 0.0;

  double mean() const;
  /// Standard error of mean() around its initial value.
  double mean_standard_error() const;
};

enum class Initial { Delta, Equilibrium };

/// N agents, all at wealth 1 (Delta) or an iid draw from the equilibrium.
EnsembleState make_ensemble(const TradeParams& params, std::size_t n, std::uint64_t seed,
                            Initial init = Initial::Delta);

/// Applies n_interactions random-pair trades.
void step(EnsembleState& state, std::uint64_t n_interactions);

/// Inverse-Gamma law with shape mu and scale mu - 1 (mean 1), mu = 1 + 2 lambda / sigma.
ReferenceDensity equilibrium_density(const TradeParams& params);

/// Quantile-stratified sample x_i = F^{-1}((i + 1/2) / m), optionally rescaled to mean exactly 1.
WeightedSampleSet equilibrium_sample(const TradeParams& params, std::size_t m = 100000, bool unit_mean = true);

/// Hill estimator of the Pareto index from the k largest values; needs 50 <= k <= size / 2.
double tail_index(std::span<const double> wealths, std::size_t k);

struct TraceOptions {
  std::size_t agents = 10000;
  double horizon = 50.0;
  std::size_t checkpoints = 24;  // geometric in time, plus t = 0
  double first_checkpoint = 0.05;
  std::vector<Probe> probes = {};  // empty: energy:1, fourier:2, w1
  std::uint64_t seed = 1;
  Initial initial = Initial::Delta;
  std::size_t reference_points = 100000;
  std::size_t hill_k = 0;  // 0: 2% of the agents
};

struct Trace {
  TradeParams params;
  TraceOptions options;
  std::vector<std::string> probes;
  std::vector<double> times;
  std::vector<std::vector<DivergenceReport>> reports;  // [checkpoint][probe]
  std::vector<double> means;
  std::vector<double> mean_standard_errors;
  std::vector<double> noise_floor;  // per probe: an iid equilibrium draw of the same size
  double final_tail_index = 0.0;
  std::uint64_t redraws = 0;
  std::uint64_t truncations = 0;
};

/// Evolves an ensemble and compares it with the equilibrium at every checkpoint. Each probe sees
/// the ensemble rescaled to unit mean, so it measures the shape of the law; the ensemble mean
/// itself is reported separately.
Trace relaxation_trace(const TradeParams& params, const TraceOptions& options);

nlohmann::json to_json(const Trace& trace);

struct MonotoneSummary {
  std::size_t begin = 0;  // first checkpoint at or after burn-in
  std::size_t end = 0;    // plateau entry (value <= 2 x noise floor), or the last checkpoint
  std::size_t pairs = 0;
  std::size_t decreasing = 0;
  double fraction = 1.0;
};

MonotoneSummary monotone_summary(const Trace& trace, std::size_t probe, double burn_in);

struct DecayFit {
  double rate = 0.0;  // slope of log(value) against time
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Log-linear fit over the same window as monotone_summary.
DecayFit decay_fit(const Trace& trace, std::size_t probe, double burn_in);

}  // namespace divkit::kinetics
