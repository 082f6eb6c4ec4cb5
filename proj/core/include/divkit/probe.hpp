#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "divkit/fourier.hpp"
#include "divkit/pairwise.hpp"
#include "divkit/report.hpp"
#include "divkit/sample_set.hpp"

namespace divkit {

/// A divergence selector for sample-based families: energy (order alpha), fourier (order s),
/// wasserstein (order p) or cramer.
struct Probe {
  Family family = Family::Energy;
  double order = 1.0;
  Norm norm = Norm::Euclidean;
  fourier::QuadratureSpec quad{};
  double moment_tol = 1e-8;

  /// Canonical text form, e.g. "energy:1", "fourier:2", "w1", "cramer".
  std::string label() const;
};

/// Parses "energy:A", "fourier:S", "wasserstein:P", "wP" (e.g. "w1") or "cramer".
Probe parse_probe(std::string_view text);
/// Comma-separated list of probes.
std::vector<Probe> parse_probes(std::string_view text);

/// Energy reports energy_sq; Wasserstein uses the quantile coupling in 1-D and the
/// transportation simplex otherwise.
DivergenceReport evaluate(const Probe& probe, const WeightedSampleSet& mu, const WeightedSampleSet& nu);

}  // namespace divkit
