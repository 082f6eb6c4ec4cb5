#include "divkit/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "divkit/errors.hpp"
#include "divkit/parallel.hpp"

namespace divkit::energy {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool is_even_integer(double a) { return std::floor(a) == a && std::fmod(a, 2.0) == 0.0; }

void require_same_dim(const WeightedSampleSet& a, const WeightedSampleSet& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("inputs have dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
}

void require_1d(const WeightedSampleSet& a, const char* what) {
  if (a.dim() != 1) throw InvalidArgument(std::string(what) + " needs one-dimensional input");
}

}  // namespace

int EnergyOrder::k() const { return static_cast<int>(std::floor(alpha / 2.0)); }

int EnergyOrder::sign() const {
  if (alpha < 0.0) return 1;
  return (k() + 1) % 2 == 0 ? 1 : -1;
}

void EnergyOrder::validate() const {
  if (!std::isfinite(alpha)) throw InvalidArgument("energy order must be finite");
  if (is_even_integer(alpha)) {
    throw InvalidArgument("energy order alpha = " + std::to_string(alpha) +
                          " is an even integer; the kernel then only sees moments");
  }
  if (norm == Norm::L1 && alpha != 1.0) throw InvalidArgument("the l1 energy distance is defined for alpha = 1 only");
}

void EnergyOrder::validate(std::size_t dim) const {
  validate();
  if (!(alpha > -static_cast<double>(dim))) {
    throw InvalidArgument("energy order must exceed -dim = -" + std::to_string(dim));
  }
}

DivergenceReport energy_sq(const WeightedSampleSet& mu, const WeightedSampleSet& nu, const EnergyOrder& order,
                           double moment_tol) {
  require_same_dim(mu, nu);
  order.validate(mu.dim());
  const double alpha = order.alpha;

  DivergenceReport r;
  r.family = Family::Energy;
  r.order = alpha;
  r.diagnostics["norm"] = std::string(to_string(order.norm));
  r.diagnostics["k"] = order.k();
  r.diagnostics["sign"] = order.sign();

  if (alpha > 2.0) {
    const int need = order.k();
    if (need > kMaxMomentOrder) {
      throw InvalidArgument("alpha = " + std::to_string(alpha) + " needs moments beyond order 4");
    }
    if (auto mm = moment_mismatch(mu, nu, need, moment_tol)) {
      throw AdmissibilityError("energy distance of order " + std::to_string(alpha) + " needs moments up to order " +
                               std::to_string(need) + " to agree; " + mm->describe());
    }
    r.diagnostics["moments_matched_to"] = need;
    r.diagnostics["moment_tol"] = moment_tol;
  }

  const double cross = pairwise_power_sum(mu, nu, alpha, order.norm);
  const double self_mu = self_power_sum(mu, alpha, order.norm);
  const double self_nu = self_power_sum(nu, alpha, order.norm);

  CompensatedSum raw;
  raw += self_mu;
  raw += self_nu;
  raw += -2.0 * cross;
  const double value = order.sign() * raw.value();

  const double scale = std::max({1.0, std::abs(cross), std::abs(self_mu), std::abs(self_nu)});
  const double window = 1e-10 * scale;
  r.diagnostics["cross"] = cross;
  r.diagnostics["self_mu"] = self_mu;
  r.diagnostics["self_nu"] = self_nu;
  r.diagnostics["unclamped"] = value;
  if (alpha < 0.0) r.diagnostics["self_terms"] = "off_diagonal";

  if (value < -window) {
    if (alpha < 0.0) {
      throw AdmissibilityError("negative-order energy of overlapping empirical measures is not positive (" +
                               std::to_string(value) + "); the off-diagonal self terms do not dominate");
    }
    throw NumericalError("energy_sq evaluated to " + std::to_string(value) + ", beyond the clamp window");
  }
  r.value = value < 0.0 ? 0.0 : value;
  r.diagnostics["clamped"] = value < 0.0;
  r.error_estimate = 8.0 * kEps * (2.0 * std::abs(cross) + std::abs(self_mu) + std::abs(self_nu));
  return r;
}

Eigen::VectorXd energy_sq_location_gradient(const WeightedSampleSet& mu, const WeightedSampleSet& nu_base,
                                            const Eigen::VectorXd& theta, const EnergyOrder& order) {
  require_same_dim(mu, nu_base);
  order.validate(mu.dim());
  if (order.alpha <= 0.0) throw InvalidArgument("location gradient is implemented for alpha > 0");
  const std::size_t dim = mu.dim();
  if (static_cast<std::size_t>(theta.size()) != dim) throw DimensionMismatch("theta has wrong dimension");
  const double alpha = order.alpha;
  const bool l1 = order.norm == Norm::L1;

  // d/dtheta of cross = sum w_i v_j alpha |d|^{alpha-2} (-d), d = x_i - y_j - theta.
  const std::size_t n = mu.size();
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks * dim, 0.0);
  parallel_for_blocks(n, kReductionBlock, [&](std::size_t begin, std::size_t end) {
    std::vector<CompensatedSum> acc(dim);
    std::vector<double> d(dim);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < nu_base.size(); ++j) {
        double norm = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          d[c] = mu.coord(i, c) - nu_base.coord(j, c) - theta(static_cast<Eigen::Index>(c));
          norm += l1 ? std::abs(d[c]) : d[c] * d[c];
        }
        if (norm == 0.0) continue;
        const double w = mu.weight(i) * nu_base.weight(j);
        if (l1) {
          for (std::size_t c = 0; c < dim; ++c)
            if (d[c] != 0.0) acc[c] += -w * (d[c] > 0.0 ? 1.0 : -1.0);
        } else {
          const double f = alpha * std::pow(norm, 0.5 * alpha - 1.0);
          for (std::size_t c = 0; c < dim; ++c) acc[c] += -w * f * d[c];
        }
      }
    }
    const std::size_t blk = begin / kReductionBlock;
    for (std::size_t c = 0; c < dim; ++c) partial[blk * dim + c] = acc[c].value();
  });
  Eigen::VectorXd grad(static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    CompensatedSum s;
    for (std::size_t b = 0; b < blocks; ++b) s += partial[b * dim + c];
    grad(static_cast<Eigen::Index>(c)) = -2.0 * order.sign() * s.value();
  }
  return grad;
}

DivergenceReport cramer(const WeightedSampleSet& mu, const WeightedSampleSet& nu) {
  require_1d(mu, "Cramer distance");
  require_1d(nu, "Cramer distance");

  struct Jump {
    double x;
    double dmu;
    double dnu;
  };
  std::vector<Jump> jumps;
  jumps.reserve(mu.size() + nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) jumps.push_back({mu.coord(i, 0), mu.weight(i), 0.0});
  for (std::size_t j = 0; j < nu.size(); ++j) jumps.push_back({nu.coord(j, 0), 0.0, nu.weight(j)});
  std::stable_sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.x < b.x; });

  CompensatedSum fmu, fnu, integral;
  for (std::size_t k = 0; k + 1 < jumps.size(); ++k) {
    fmu += jumps[k].dmu;
    fnu += jumps[k].dnu;
    const double gap = jumps[k + 1].x - jumps[k].x;
    if (gap == 0.0) continue;
    const double diff = fmu.value() - fnu.value();
    integral += gap * diff * diff;
  }
  const double value_sq = integral.value();

  const double cross = pairwise_power_sum(mu, nu, 1.0);
  const double expectation = 2.0 * cross - self_power_sum(mu, 1.0) - self_power_sum(nu, 1.0);

  DivergenceReport r;
  r.family = Family::Cramer;
  r.order = 2.0;
  r.value = std::sqrt(std::max(value_sq, 0.0));
  const double span = jumps.back().x - jumps.front().x;
  r.error_estimate = value_sq > 0.0 ? 4.0 * kEps * static_cast<double>(jumps.size()) * span / (2.0 * r.value) : 0.0;
  r.diagnostics["integral"] = value_sq;
  r.diagnostics["expectation_form"] = expectation;
  r.diagnostics["expectation_form_equals"] = "2 * value^2";
  return r;
}

double gini_index(const WeightedSampleSet& mu) {
  require_1d(mu, "Gini index");
  const double m = mean(mu)(0);
  if (std::abs(m) <= 1e-12) throw InvalidArgument("Gini index is undefined for zero mean");
  return self_power_sum(mu, 1.0) / (2.0 * m);
}

double gmd(const WeightedSampleSet& mu, const WeightedSampleSet& nu, Norm norm) {
  require_same_dim(mu, nu);
  return pairwise_power_sum(mu, nu, 1.0, norm);
}

double gini_t(const WeightedSampleSet& mu) {
  const auto map = whitening::fit_whitening(mu, whitening::Method::Cholesky);
  const Eigen::VectorXd wm = map.matrix * mean(mu);
  const double mnorm = wm.norm();
  if (mnorm <= 1e-12) throw InvalidArgument("Mahalanobis norm of the mean is zero");
  return self_power_sum(whitening::apply_whitening(map, mu), 1.0, Norm::Euclidean) / (2.0 * mnorm);
}

double gini_l1(const WeightedSampleSet& mu, const whitening::WhiteningMap& zca) {
  const WeightedSampleSet white = whitening::apply_whitening(zca, mu);
  const double mnorm = (zca.matrix * mean(mu)).lpNorm<1>();
  if (mnorm <= 1e-12) throw InvalidArgument("l1 norm of the whitened mean is zero");
  return self_power_sum(white, 1.0, Norm::L1) / (2.0 * mnorm);
}

EnergyGini energy_gini_decomposition(const WeightedSampleSet& mu, const WeightedSampleSet& nu) {
  require_1d(mu, "energy/Gini decomposition");
  require_1d(nu, "energy/Gini decomposition");
  EnergyGini out;
  out.mean_mu = mean(mu)(0);
  out.mean_nu = mean(nu)(0);
  out.gmd_cross = gmd(mu, nu);
  out.gini_mu = gini_index(mu);
  out.gini_nu = gini_index(nu);
  out.energy_sq_1 = 2.0 * out.gmd_cross - 2.0 * out.mean_mu * out.gini_mu - 2.0 * out.mean_nu * out.gini_nu;
  return out;
}

}  // namespace divkit::energy
