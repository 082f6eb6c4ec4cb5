#include "divkit/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>

#include "divkit/errors.hpp"
#include "divkit/fourier.hpp"
#include "divkit/parallel.hpp"

namespace divkit::kinetics {

namespace {

constexpr int kMaxRedraws = 64;

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double draw_eta(const TradeParams& p, std::mt19937_64& rng) {
  const double var = p.grazing * p.sigma;
  if (p.eta == EtaLaw::TwoPoint) return (rng() >> 63) ? std::sqrt(var) : -std::sqrt(var);
  const double a = std::sqrt(3.0 * var);
  return a * (2.0 * unit_uniform(rng) - 1.0);
}

std::size_t draw_index(std::size_t n, std::mt19937_64& rng) {
  // Lemire's multiply-shift with rejection, unbiased for any n.
  const std::uint64_t range = n;
  std::uint64_t x = rng();
  __uint128_t m = static_cast<__uint128_t>(x) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = -range % range;
    while (low < threshold) {
      x = rng();
      m = static_cast<__uint128_t>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

std::vector<Probe> default_probes() { return parse_probes("energy:1,fourier:2,w1"); }

WeightedSampleSet unit_mean(std::vector<double> w) {
  CompensatedSum s;
  for (double x : w) s += x;
  const double m = s.value() / static_cast<double>(w.size());
  for (double& x : w) x /= m;
  return WeightedSampleSet::from_values(std::move(w));
}

/// Evaluates the probes against one fixed reference, caching the reference spectrum for
/// Fourier probes.
class ProbeBank {
 public:
  ProbeBank(std::vector<Probe> probes, const WeightedSampleSet& reference) : probes_(std::move(probes)), ref_(reference) {
    const auto [lo, hi] = std::minmax_element(ref_.coords().begin(), ref_.coords().end());
    const double diameter = std::max(*hi - *lo, 1e-12);
    Eigen::VectorXd center(1);
    center(0) = 0.5 * (*lo + *hi);
    for (const auto& p : probes_) {
      if (p.family != Family::Fourier) {
        fourier_.emplace_back(nullptr);
        spectra_.emplace_back();
        continue;
      }
      fourier::QuadratureSpec q = p.quad;
      if (q.radial_points == 0) q.radial_points = 256;
      const double R = q.truncation_radius > 0.0 ? q.truncation_radius
                                                 : 2.0 * std::numbers::pi * static_cast<double>(q.radial_points) / diameter;
      auto integrator = std::make_shared<fourier::SpectralIntegrator>(1, p.order, R, diameter, center, q, 0);
      spectra_.push_back(integrator->spectrum(ref_));
      fourier_.push_back(std::move(integrator));
    }
  }

  std::vector<DivergenceReport> evaluate_all(const WeightedSampleSet& sample) const {
    std::vector<DivergenceReport> out;
    for (std::size_t k = 0; k < probes_.size(); ++k) {
      if (fourier_[k]) {
        out.push_back(fourier_[k]->compare(fourier_[k]->spectrum(sample), spectra_[k]));
      } else {
        out.push_back(evaluate(probes_[k], sample, ref_));
      }
    }
    return out;
  }

  const std::vector<Probe>& probes() const { return probes_; }

 private:
  std::vector<Probe> probes_;
  const WeightedSampleSet& ref_;
  std::vector<std::shared_ptr<fourier::SpectralIntegrator>> fourier_;
  std::vector<fourier::SpectralIntegrator::Spectrum> spectra_;
};

}  // namespace

std::string_view to_string(EtaLaw e) { return e == EtaLaw::TwoPoint ? "two-point" : "uniform"; }
std::string_view to_string(ClampPolicy c) { return c == ClampPolicy::Redraw ? "redraw" : "truncate"; }

EtaLaw parse_eta_law(std::string_view s) {
  if (s == "two-point" || s == "two_point") return EtaLaw::TwoPoint;
  if (s == "uniform" || s == "uniform-symmetric") return EtaLaw::UniformSymmetric;
  throw InvalidArgument("unknown eta law '" + std::string(s) + "' (expected two-point or uniform)");
}

ClampPolicy parse_clamp_policy(std::string_view s) {
  if (s == "redraw") return ClampPolicy::Redraw;
  if (s == "truncate") return ClampPolicy::Truncate;
  throw InvalidArgument("unknown clamp policy '" + std::string(s) + "' (expected redraw or truncate)");
}

void TradeParams::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
  if (!(grazing > 0.0 && grazing <= 1.0)) throw InvalidArgument("grazing scale must lie in (0, 1]");
}

double EnsembleState::mean() const {
  CompensatedSum s;
  for (double w : wealths) s += w;
  return s.value() / static_cast<double>(wealths.size());
}

double EnsembleState::mean_standard_error() const {
  return std::sqrt(increment_variance) / static_cast<double>(wealths.size());
}

ReferenceDensity equilibrium_density(const TradeParams& params) {
  params.validate();
  return ReferenceDensity::inverse_gamma(params.pareto_index());
}

EnsembleState make_ensemble(const TradeParams& params, std::size_t n, std::uint64_t seed, Initial init) {
  params.validate();
  if (n < 2) throw InvalidArgument("an ensemble needs at least two agents");
  EnsembleState s;
  s.params = params;
  s.seed = seed;
  s.rng.seed(seed);
  if (init == Initial::Delta) {
    s.wealths.assign(n, 1.0);
  } else {
    const ReferenceDensity eq = equilibrium_density(params);
    s.wealths.resize(n);
    for (double& w : s.wealths) {
      double u = unit_uniform(s.rng);
      while (u == 0.0) u = unit_uniform(s.rng);
      w = eq.quantile(u);
    }
  }
  return s;
}

void step(EnsembleState& s, std::uint64_t n_interactions) {
  const TradeParams& p = s.params;
  const std::size_t n = s.wealths.size();
  const double a = p.grazing * p.lambda;
  const double var = p.grazing * p.sigma;
  for (std::uint64_t t = 0; t < n_interactions; ++t) {
    const std::size_t i = draw_index(n, s.rng);
    std::size_t j = draw_index(n - 1, s.rng);
    if (j >= i) ++j;
    const double v = s.wealths[i], w = s.wealths[j];
    double vs = 0.0, ws = 0.0;
    for (int attempt = 0;; ++attempt) {
      const double eta = draw_eta(p, s.rng);
      const double eta_t = draw_eta(p, s.rng);
      vs = (1.0 - a) * v + a * w + eta * v;
      ws = (1.0 - a) * w + a * v + eta_t * w;
      if (vs >= 0.0 && ws >= 0.0) break;
      if (p.clamp == ClampPolicy::Truncate || attempt + 1 >= kMaxRedraws) {
        ++s.truncations;
        vs = std::max(vs, 0.0);
        ws = std::max(ws, 0.0);
        break;
      }
      ++s.redraws;
    }
    if (p.conserve_mean && vs + ws > 0.0) {
      const double f = (v + w) / (vs + ws);
      vs *= f;
      ws *= f;
    } else {
      s.increment_variance += var * (v * v + w * w);
    }
    s.wealths[i] = vs;
    s.wealths[j] = ws;
  }
  s.interactions += n_interactions;
  s.time = 2.0 * p.grazing * static_cast<double>(s.interactions) / static_cast<double>(n);
}

WeightedSampleSet equilibrium_sample(const TradeParams& params, std::size_t m, bool unit) {
  if (m < 2) throw InvalidArgument("equilibrium sample needs at least two points");
  const ReferenceDensity eq = equilibrium_density(params);
  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = eq.quantile((static_cast<double>(i) + 0.5) / static_cast<double>(m));
  return unit ? unit_mean(std::move(x)) : WeightedSampleSet::from_values(std::move(x));
}

double tail_index(std::span<const double> wealths, std::size_t k) {
  if (k < 50) throw InvalidArgument("Hill estimator needs at least 50 order statistics");
  if (2 * k > wealths.size()) throw InvalidArgument("Hill estimator needs k <= N / 2");
  std::vector<double> w(wealths.begin(), wealths.end());
  std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k), w.end(), std::greater<>());
  const double threshold = w[k];
  if (!(threshold > 0.0)) throw InvalidArgument("Hill estimator needs positive order statistics");
  CompensatedSum s;
  for (std::size_t i = 0; i < k; ++i) s += std::log(w[i] / threshold);
  const double h = s.value() / static_cast<double>(k);
  if (!(h > 0.0)) throw NumericalError("Hill estimator is degenerate (tied upper order statistics)");
  return 1.0 / h;
}

Trace relaxation_trace(const TradeParams& params, const TraceOptions& options) {
  params.validate();
  if (options.checkpoints < 2) throw InvalidArgument("need at least two checkpoints");
  if (!(options.horizon > options.first_checkpoint && options.first_checkpoint > 0.0))
    throw InvalidArgument("need 0 < first checkpoint < horizon");

  Trace tr;
  tr.params = params;
  tr.options = options;
  if (tr.options.probes.empty()) tr.options.probes = default_probes();
  for (const auto& p : tr.options.probes) tr.probes.push_back(p.label());

  const WeightedSampleSet reference = equilibrium_sample(params, options.reference_points);
  const ProbeBank bank(tr.options.probes, reference);

  {
    EnsembleState iid = make_ensemble(params, options.agents, options.seed ^ 0x5bd1e995ULL, Initial::Equilibrium);
    const auto floor = bank.evaluate_all(unit_mean(iid.wealths));
    for (const auto& r : floor) tr.noise_floor.push_back(r.value);
  }

  EnsembleState state = make_ensemble(params, options.agents, options.seed, options.initial);
  const double n = static_cast<double>(options.agents);
  auto record = [&] {
    tr.times.push_back(state.time);
    tr.means.push_back(state.mean());
    tr.mean_standard_errors.push_back(state.mean_standard_error());
    tr.reports.push_back(bank.evaluate_all(unit_mean(state.wealths)));
  };
  record();
  const double ratio = options.horizon / options.first_checkpoint;
  for (std::size_t k = 0; k < options.checkpoints; ++k) {
    const double t = options.first_checkpoint *
                     std::pow(ratio, static_cast<double>(k) / static_cast<double>(options.checkpoints - 1));
    const auto target = static_cast<std::uint64_t>(std::llround(t * n / (2.0 * params.grazing)));
    if (target > state.interactions) step(state, target - state.interactions);
    record();
  }
  const std::size_t k = options.hill_k > 0 ? options.hill_k : std::max<std::size_t>(50, options.agents / 50);
  tr.final_tail_index = tail_index(state.wealths, k);
  tr.redraws = state.redraws;
  tr.truncations = state.truncations;
  return tr;
}

nlohmann::json to_json(const Trace& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t c = 0; c < t.times.size(); ++c)
    for (std::size_t p = 0; p < t.probes.size(); ++p)
      rows.push_back({{"time", t.times[c]},
                      {"probe", t.probes[p]},
                      {"value", json_number(t.reports[c][p].value)},
                      {"error_estimate", json_number(t.reports[c][p].error_estimate)}});
  nlohmann::json floor = nlohmann::json::object();
  for (std::size_t p = 0; p < t.probes.size(); ++p) floor[t.probes[p]] = t.noise_floor[p];
  const double s = t.params.sigma, r = -1.0;
  nlohmann::json meta = {
      {"lambda", t.params.lambda},
      {"sigma", t.params.sigma},
      {"pareto_index", t.params.pareto_index()},
      {"eta_law", std::string(to_string(t.params.eta))},
      {"clamp_policy", std::string(to_string(t.params.clamp))},
      {"grazing", t.params.grazing},
      {"conserve_mean", t.params.conserve_mean},
      {"agents", t.options.agents},
      {"horizon", t.options.horizon},
      {"seed", t.options.seed},
      {"initial", t.options.initial == Initial::Delta ? "delta" : "equilibrium"},
      {"reference_points", t.options.reference_points},
      {"reference_scaling", "ensemble_rescaled_to_unit_mean"},
      {"fokker_planck_decay_exponent_r_minus_1", (2.0 * r + 1.0) / 2.0 * (s * (2.0 * r + 3.0) / 2.0 + 2.0)},
      {"final_tail_index", t.final_tail_index},
      {"redraws", t.redraws},
      {"truncations", t.truncations},
  };
  return {{"metadata", meta}, {"noise_floor", floor}, {"means", t.means},
          {"mean_standard_errors", t.mean_standard_errors}, {"trace", rows}};
}

MonotoneSummary monotone_summary(const Trace& t, std::size_t probe, double burn_in) {
  if (probe >= t.probes.size()) throw InvalidArgument("probe index out of range");
  MonotoneSummary m;
  m.begin = 0;
  while (m.begin < t.times.size() && t.times[m.begin] < burn_in) ++m.begin;
  m.end = t.times.empty() ? 0 : t.times.size() - 1;
  for (std::size_t c = m.begin; c < t.times.size(); ++c) {
    if (t.reports[c][probe].value <= 2.0 * t.noise_floor[probe]) {
      m.end = c;
      break;
    }
  }
  for (std::size_t c = m.begin; c < m.end; ++c) {
    ++m.pairs;
    if (t.reports[c + 1][probe].value < t.reports[c][probe].value) ++m.decreasing;
  }
  m.fraction = m.pairs == 0 ? 1.0 : static_cast<double>(m.decreasing) / static_cast<double>(m.pairs);
  return m;
}

DecayFit decay_fit(const Trace& t, std::size_t probe, double burn_in) {
  const MonotoneSummary m = monotone_summary(t, probe, burn_in);
  std::vector<double> x, y;
  for (std::size_t c = m.begin; c <= m.end && c < t.times.size(); ++c) {
    const double v = t.reports[c][probe].value;
    if (v > 0.0) {
      x.push_back(t.times[c]);
      y.push_back(std::log(v));
    }
  }
  DecayFit f;
  f.points = x.size();
  if (x.size() < 3) return f;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.rate = sxy / sxx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace divkit::kinetics
