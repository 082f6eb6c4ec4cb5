#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "divkit/report.hpp"
#include "divkit/sample_set.hpp"

namespace divkit::fourier {

/// Number of leading moment orders that must coincide for F_s to be finite near the origin:
/// 0 when s < n + 2, floor((s - n)/2) otherwise, minus one when (s - n)/2 is an integer.
int required_matching_order(double s, std::size_t n);

struct FourierOrder {
  double s = 2.0;
  std::size_t dim = 1;

  int required_matching() const { return required_matching_order(s, dim); }
  void validate() const;
};

/// Constant c with E_alpha^2 = c * F_{n+alpha}^2 for the transform convention
/// mu^(xi) = int exp(-i x.xi) dmu:  c = 2^alpha pi^{-n/2} Gamma((n+alpha)/2) / |Gamma(-alpha/2)|.
double c_alpha(std::size_t n, double alpha);

/// sum_j w_j exp(-i <x_j, xi>)
std::complex<double> char_fn(const WeightedSampleSet& mu, std::span<const double> xi);

enum class Scheme { Auto, Product, QMC };

/// Treatment of |xi| > R. Bound: no correction, bound by sum|m|^2 |S^{n-1}| R^{n-s}/(s-n).
/// MeanSquare: add the non-oscillating part in closed form, bound the oscillating pair terms.
/// Auto takes whichever bound is smaller.
enum class TailMode { Auto, Bound, MeanSquare };

struct QuadratureSpec {
  double truncation_radius = 0.0;  // R_max; 0 picks it from `tolerance`
  double inner_cutoff = 0.0;       // r_min
  std::size_t radial_points = 0;   // outer radial panels (15 nodes each); 0 = one per oscillation period
  std::size_t angular_points = 0;  // directions per radial node; 0 = adaptive in r
  Scheme scheme = Scheme::Auto;    // Auto: product rule for n <= 3, randomized QMC above
  TailMode tail = TailMode::Auto;
  double tolerance = 1e-4;         // automatic R: tail bound <= tolerance * pilot integral
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  std::size_t randomizations = 16;
  double budget = 4e8;             // cap on (atom x direction-node) evaluations for automatic R
};

inline constexpr double kDefaultMomentTol = 1e-8;

/// sqrt of int_{r_min <= |xi| <= R} |mu^ - nu^|^2 / |xi|^s dxi.
///
/// For s > n the integrand is used as is; the part beyond R is either bounded outright or
/// its mean-square part is added in closed form and the oscillating remainder bounded,
/// whichever bound is smaller. For s <= n the empirical integrand does not decay, so the
/// atomic self-interaction sum m_k^2 is removed (the Fourier image of excluding coincident
/// pairs). error_estimate bounds |value - F_s| combining tail, near-zero, radial and angular
/// errors; all components are listed in the diagnostics.
DivergenceReport fourier_metric(const WeightedSampleSet& mu, const WeightedSampleSet& nu, const FourierOrder& order,
                                const QuadratureSpec& quad = {}, double moment_tol = kDefaultMomentTol);

/// Fixed quadrature layout whose nodal spectra can be cached and reused, for comparing many
/// measures against one reference. The tail beyond R is bounded (no closed-form correction).
class SpectralIntegrator {
 public:
  /// `diameter` sets the oscillation scale of the radial panels; `center` is subtracted from
  /// every point before transforming; `near_zero_order` is the matched-moment order assumed
  /// by the innermost power-law cell.
  SpectralIntegrator(std::size_t dim, double s, double truncation_radius, double diameter,
                     const Eigen::VectorXd& center, const QuadratureSpec& quad = {}, int near_zero_order = 0);
  ~SpectralIntegrator();
  SpectralIntegrator(SpectralIntegrator&&) noexcept;
  SpectralIntegrator& operator=(SpectralIntegrator&&) noexcept;

  using Spectrum = std::vector<std::complex<double>>;

  /// sum_j w_j (exp(-i <x_j - center, xi>) - 1) at every node of the layout.
  Spectrum spectrum(const WeightedSampleSet& set) const;
  DivergenceReport compare(const Spectrum& a, const Spectrum& b) const;

  std::size_t node_count() const;
  double truncation_radius() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace divkit::fourier
