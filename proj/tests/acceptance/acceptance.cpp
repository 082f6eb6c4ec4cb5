// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned below.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "divkit/bench.hpp"
#include "divkit/energy.hpp"
#include "divkit/fourier.hpp"
#include "divkit/infodiv.hpp"
#include "divkit/kinetics.hpp"
#include "divkit/probe.hpp"
#include "divkit/transport.hpp"
#include "divkit/whitening.hpp"
#include "oracles.hpp"

using namespace divkit;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator()(const std::string& key, T v) {
    if (!first_) out_ << ", ";
    first_ = false;
    out_ << key << '=' << v;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit;
  std::function<Outcome()> run;
};

WeightedSampleSet point(double x) { return WeightedSampleSet::from_values({x}); }

double squared_error(const DivergenceReport& r) { return 2.0 * r.value * r.error_estimate + r.error_estimate * r.error_estimate; }

// ---- 1, 2: Fourier metric on the delta pair -------------------------------------------------

Outcome energy_fourier_identity() {
  Outcome o;
  double worst_ratio = 0.0, worst_rel = 0.0;
  for (double a : {0.5, 1.0, 2.0}) {
    const auto r = fourier::fourier_metric(point(0.0), point(a), {2.0, 1});
    const double c = fourier::c_alpha(1, 1.0);
    const double bound = c * squared_error(r);
    const double miss = std::abs(c * r.value * r.value - 2.0 * a);
    worst_ratio = std::max(worst_ratio, miss / bound);
    worst_rel = std::max(worst_rel, bound / (2.0 * a));
    o.pass = o.pass && miss <= bound && bound / (2.0 * a) <= 1e-3;
  }
  o.detail = Detail()("max |cF^2-2a|/err", worst_ratio)("max err/2a", worst_rel).str();
  return o;
}

Outcome fourier_closed_form() {
  Outcome o;
  double worst = 0.0;
  for (double a : {0.5, 1.0, 2.0}) {
    const auto r = fourier::fourier_metric(point(0.0), point(a), {2.0, 1});
    const double miss = std::abs(r.value * r.value - 2.0 * kPi * a);
    worst = std::max(worst, miss / squared_error(r));
    o.pass = o.pass && miss <= squared_error(r);
  }
  std::vector<double> errs;
  for (int level = 0; level < 3; ++level) {
    fourier::QuadratureSpec q;
    q.tail = fourier::TailMode::Bound;
    q.truncation_radius = 1000.0 * std::pow(2.0, level);
    q.radial_points = static_cast<std::size_t>(160 * std::pow(2.0, level));
    const auto r = fourier::fourier_metric(point(0.0), point(1.0), {2.0, 1}, q);
    errs.push_back(std::abs(r.value * r.value - 2.0 * kPi));
    o.pass = o.pass && std::abs(r.value * r.value - 2.0 * kPi) <= squared_error(r);
  }
  for (std::size_t i = 1; i < errs.size(); ++i) o.pass = o.pass && errs[i] <= 0.5 * errs[i - 1];
  o.detail = Detail()("max miss/err", worst)("refinement errors", std::to_string(errs[0]) + " " + std::to_string(errs[1]) +
                                                                        " " + std::to_string(errs[2]))
                 .str();
  return o;
}

// ---- 3, 4, 5: transport ---------------------------------------------------------------------

Outcome w1_lower_bound() {
  Outcome o;
  const auto edge = transport::check_w1_lower_bound(point(0.0), point(1.0));
  o.pass = std::abs(edge.lhs - 1.0) <= 1e-15 && std::abs(edge.rhs - 1.0) <= 1e-15;
  double min_slack = INFINITY;
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + t % 3;
    const std::size_t na = 8 + rng() % 57, nb = 8 + rng() % 57;
    const auto a = t % 2 ? oracle::uniform_set(rng(), na, n, -1, 1, true) : oracle::gaussian_set(rng(), na, n);
    const auto b = oracle::gaussian_set(rng(), nb, n, 0.1 * static_cast<double>(t % 7), 1.0 + 0.1 * (t % 5));
    const double half_e = 0.5 * energy::energy_sq(a, b, {1.0}).value;
    const double w1 = transport::wasserstein_lp(a, b, 1.0).first.value;
    min_slack = std::min(min_slack, w1 + 1e-9 - half_e);
  }
  o.pass = o.pass && min_slack >= 0.0;
  o.detail = Detail()("edge lhs", edge.lhs)("edge rhs", edge.rhs)("min W1+1e-9-E/2", min_slack).str();
  return o;
}

Outcome w1_upper_exponent() {
  Outcome o;
  const std::vector<double> shifts = {0.4, 0.2, 0.1, 0.05};
  Detail d;
  for (std::size_t n : {1u, 2u}) {
    const auto base = oracle::uniform_set(40 + n, 8, n);
    const auto fit = transport::w1_shift_family(base, shifts);
    const double need = 2.0 / (static_cast<double>(n) + 2.0) - 0.1;
    o.pass = o.pass && fit.slope >= need;
    d("slope n=" + std::to_string(n), fit.slope)("need", need);
  }
  o.detail = d.str();
  return o;
}

// Optimal assignment by enumeration, returned as the permutation.
std::vector<std::size_t> best_permutation(const WeightedSampleSet& a, const WeightedSampleSet& b, double p) {
  std::vector<std::size_t> perm(a.size()), best;
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  double cost = INFINITY;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += std::pow(oracle::norm(a, i, b, perm[i]), p);
    if (c < cost) {
      cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Outcome transport_1d_consistency() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = oracle::uniform_set(s, 30 + s % 20, 1, -1, 1, s % 2 == 0);
    const auto b = oracle::gaussian_set(s + 500, 25 + s % 17, 1, 0.2);
    const double p = s % 3 == 0 ? 1.0 : (s % 3 == 1 ? 2.0 : 1.5);
    worst = std::max(worst, std::abs(transport::wasserstein_1d(a, b, p).value - transport::wasserstein_lp(a, b, p).first.value));
  }
  o.pass = worst <= 1e-10;
  std::size_t agree = 0;
  double cost_gap = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = oracle::uniform_set(s + 900, 3, 2), b = oracle::uniform_set(s + 950, 3, 2);
    const auto perm = best_permutation(a, b, 1.0);
    const auto [r, plan] = transport::wasserstein_lp(a, b, 1.0);
    bool same = true;
    for (const auto& e : plan.pairs)
      if (e.mass > 0.0 && perm[e.i] != e.j) same = false;
    agree += same;
    cost_gap = std::max(cost_gap, std::abs(plan.cost - oracle::permutation_cost(a, b, 1.0)));
  }
  o.pass = o.pass && agree == 20 && cost_gap <= 1e-15;
  o.detail = Detail()("max |quantile-LP|", worst)("3x3 plans equal to permutation argmin", std::to_string(agree) + "/20")(
                 "max cost gap", cost_gap)
                 .str();
  return o;
}

// ---- 6, 7, 8, 9: properties -----------------------------------------------------------------

Outcome scale_sensitivity() {
  Outcome o;
  const auto x = oracle::uniform_set(61, 40, 2), y = oracle::gaussian_set(62, 35, 2, 0.3);
  double worst = 0.0;
  for (double c : {0.1, 3.0, 10.0}) {
    for (double a : {0.5, 1.0, 1.5}) {
      const double base = energy::energy_sq(x, y, {a}).value;
      const double v = energy::energy_sq(x.scaled(c), y.scaled(c), {a}).value;
      worst = std::max(worst, std::abs(v - std::pow(c, a) * base) / (std::pow(c, a) * base));
    }
    for (double p : {1.0, 2.0}) {
      const double base = transport::wasserstein(x, y, p).value;
      worst = std::max(worst, std::abs(transport::wasserstein(x.scaled(c), y.scaled(c), p).value - c * base) / (c * base));
    }
  }
  o.pass = worst <= 1e-12;
  o.detail = Detail()("max relative deviation", worst).str();
  return o;
}

Eigen::MatrixXd random_linear(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
  return a + 2.0 * Eigen::MatrixXd::Identity(n, n);
}

Eigen::VectorXd random_diagonal(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(std::log(0.1), std::log(10.0));
  Eigen::VectorXd q(n);
  for (auto& v : q) v = std::exp(u(rng));
  return q;
}

Outcome whitening_theorems() {
  Outcome o;
  std::mt19937_64 rng(7);
  double stability = 0.0, invariance = 0.0, residual = 0.0;
  for (auto m : {whitening::Method::Cholesky, whitening::Method::ZCAcor}) {
    for (int t = 0; t < 20; ++t) {
      const std::size_t n = 2 + t % 3;
      const auto x = oracle::gaussian_set(rng(), 60, n).transformed(random_linear(rng, n));
      const auto y = oracle::uniform_set(rng(), 50, n, -1, 2).transformed(random_linear(rng, n));
      stability = std::max(stability, whitening::check_scale_stability(m, x, random_diagonal(rng, n)));
      const Eigen::MatrixXd q = random_diagonal(rng, n).asDiagonal(), q2 = random_diagonal(rng, n).asDiagonal();
      const auto probe = parse_probe("energy:1");
      const double base = whitening::whitened_divergence(probe, x, y, m).value;
      invariance = std::max(invariance, std::abs(whitening::whitened_divergence(probe, x.transformed(q), y.transformed(q2), m).value - base));
      residual = std::max(residual, whitening::whitening_residual(whitening::fit_whitening(x, m), covariance(x).matrix));
    }
  }
  o.pass = stability <= 1e-9 && invariance <= 1e-9 && residual <= 1e-8;
  o.detail = Detail()("max stability deviation", stability)("max |D_S(QX,Q'Y)-D_S(X,Y)|", invariance)("max residual", residual).str();
  return o;
}

Outcome sub_additivity() {
  Outcome o;
  std::mt19937_64 rng(8);
  double min_slack = INFINITY;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + t % 3;
    const auto x = oracle::gaussian_set(rng(), 10, n), y = oracle::uniform_set(rng(), 9, n, -1, 2);
    const auto z = oracle::uniform_set(rng(), 8, n), w = oracle::gaussian_set(rng(), 11, n, 0.4, 1.5);
    const auto xz = oracle::convolve(x, z), yw = oracle::convolve(y, w);
    for (double a : {0.5, 1.0, 1.5}) {
      const double lhs = std::sqrt(energy::energy_sq(xz, yw, {a}).value);
      const double rhs = std::sqrt(energy::energy_sq(x, y, {a}).value) + std::sqrt(energy::energy_sq(z, w, {a}).value);
      min_slack = std::min(min_slack, rhs - lhs);
    }
  }
  double convex_slack = INFINITY;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto x = oracle::gaussian_set(s, 12, 1), y = oracle::match_mean_cov(oracle::uniform_set(s + 10, 12, 1), x);
    const auto z = oracle::uniform_set(s + 20, 10, 1), w = oracle::match_mean_cov(oracle::gaussian_set(s + 30, 10, 1), z);
    const double exy = std::sqrt(energy::energy_sq(x, y, {4.5}).value), ezw = std::sqrt(energy::energy_sq(z, w, {4.5}).value);
    for (int k = 1; k <= 9; ++k) {
      const double l = 0.1 * k;
      const double lhs = std::sqrt(energy::energy_sq(oracle::convolve(x, z, std::sqrt(l), std::sqrt(1 - l)),
                                                     oracle::convolve(y, w, std::sqrt(l), std::sqrt(1 - l)), {4.5})
                                       .value);
      convex_slack = std::min(convex_slack, std::sqrt(l) * exy + std::sqrt(1 - l) * ezw - lhs);
    }
  }
  o.pass = min_slack >= -1e-10 && convex_slack >= -1e-10;
  o.detail = Detail()("min convolution slack", min_slack)("min convex slack (alpha=4.5)", convex_slack).str();
  return o;
}

// Mean and standard error over resamples, per coordinate, against `target`.
double max_standard_errors(const std::vector<Eigen::VectorXd>& draws, const Eigen::VectorXd& target) {
  const auto reps = static_cast<double>(draws.size());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < target.size(); ++k) {
    double m = 0.0;
    for (const auto& g : draws) m += g(k) / reps;
    double v = 0.0;
    for (const auto& g : draws) v += (g(k) - m) * (g(k) - m) / (reps - 1);
    worst = std::max(worst, std::abs(m - target(k)) / std::sqrt(v / reps));
  }
  return worst;
}

Outcome unbiased_gradient() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::Matrix2d mix;
  mix << 2.0, 0.0, 0.8, 0.5;
  const auto population = oracle::gaussian_set(90, 400, 2).transformed(mix);
  const auto base = oracle::uniform_set(91, 40, 2, -1, 2).transformed(Eigen::Vector2d(3.0, 0.7).asDiagonal());
  const Eigen::Vector2d theta(0.3, -0.2);
  const energy::EnergyOrder order{1.0};
  std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
  auto resample = [&] {
    std::vector<double> c;
    for (int i = 0; i < 30; ++i) {
      const auto p = population.point(pick(rng));
      c.insert(c.end(), p.begin(), p.end());
    }
    return WeightedSampleSet(2, c);
  };

  const Eigen::VectorXd plain_target = energy::energy_sq_location_gradient(population, base, theta, order);
  std::vector<Eigen::VectorXd> plain;
  for (int r = 0; r < 200; ++r) plain.push_back(energy::energy_sq_location_gradient(resample(), base, theta, order));
  const double plain_se = max_standard_errors(plain, plain_target);

  // Whitened: the sample side uses the whitening map of its law, the model side nu_theta is
  // refitted at theta; grad = W_nu^T grad_shift E(S(mu_N), W_nu base, W_nu theta).
  const auto w_mu = whitening::fit_whitening(population, whitening::Method::ZCAcor);
  const double th[2] = {theta(0), theta(1)};
  const auto w_nu = whitening::fit_whitening(base.shifted(th), whitening::Method::ZCAcor);
  const auto white_base = whitening::apply_whitening(w_nu, base);
  const Eigen::VectorXd white_theta = w_nu.matrix * theta;
  auto white_grad = [&](const WeightedSampleSet& sample) -> Eigen::VectorXd {
    return w_nu.matrix.transpose() *
           energy::energy_sq_location_gradient(whitening::apply_whitening(w_mu, sample), white_base, white_theta, order);
  };
  const Eigen::VectorXd white_target = white_grad(population);
  // independent route: finite difference of the whitened divergence itself
  const auto probe = parse_probe("energy:1");
  double fd_gap = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double h = 1e-5;
    double up[2] = {th[0], th[1]}, dn[2] = {th[0], th[1]};
    up[k] += h;
    dn[k] -= h;
    const double fd = (whitening::whitened_divergence(probe, population, base.shifted(up), whitening::Method::ZCAcor).value -
                       whitening::whitened_divergence(probe, population, base.shifted(dn), whitening::Method::ZCAcor).value) /
                      (2 * h);
    fd_gap = std::max(fd_gap, std::abs(fd - white_target(k)));
  }
  std::vector<Eigen::VectorXd> white;
  for (int r = 0; r < 200; ++r) white.push_back(white_grad(resample()));
  const double white_se = max_standard_errors(white, white_target);

  o.pass = plain_se <= 4.0 && white_se <= 4.0 && fd_gap <= 1e-6;
  o.detail = Detail()("plain |mean-target|/SE", plain_se)("whitened |mean-target|/SE", white_se)("whitened target vs FD", fd_gap).str();
  return o;
}

// ---- 10, 11: kinetics ---------------------------------------------------------------------------

GridDensity perturbed_gaussian(std::mt19937_64& rng, std::size_t nodes, double half_width) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double t = 1.0 + 0.3 * u(rng), eps = 0.4 + 0.2 * u(rng), phase = kPi * u(rng);
  const std::array<double, 3> shift = {0.4 * u(rng), 0.4 * u(rng), 0.4 * u(rng)};
  const std::array<double, 3> k = {1.2 * u(rng), 1.2 * u(rng), 1.2 * u(rng)};
  const double h = 2.0 * half_width / static_cast<double>(nodes - 1);
  std::vector<double> v(nodes * nodes * nodes);
  std::size_t f = 0;
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t j = 0; j < nodes; ++j)
      for (std::size_t l = 0; l < nodes; ++l, ++f) {
        const std::array<double, 3> x = {-half_width + h * static_cast<double>(i), -half_width + h * static_cast<double>(j),
                                         -half_width + h * static_cast<double>(l)};
        double r2 = 0.0, kx = 0.0;
        for (int a = 0; a < 3; ++a) {
          r2 += (x[a] - shift[a]) * (x[a] - shift[a]);
          kx += k[a] * x[a];
        }
        v[f] = std::exp(-r2 / (2.0 * t)) * (1.0 + eps * std::cos(kx + phase));
      }
  return GridDensity({-half_width, -half_width, -half_width}, {h, h, h}, {nodes, nodes, nodes}, v);
}

Outcome kinetic_identities() {
  Outcome o;
  const auto m = GridDensity::sample_box(ReferenceDensity::maxwellian(3, 1.0), 5.5, 64);
  const double im = info::fisher(m);
  o.pass = std::abs(im - 3.0) <= 1e-3;
  std::mt19937_64 rng(10);
  double worst_h = 0.0, worst_i = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto f = perturbed_gaussian(rng, 48, 7.0);
    const auto mf = info::maxwellian_match(f);
    const auto kl = info::kl(f, mf);
    const auto hf = info::entropy_estimate(f);
    const double gap_h = std::abs(kl.value - (mf.entropy() - hf.value));
    const double tol_h = 10.0 * (kl.error_estimate + hf.error);
    const auto rel = info::relative_fisher(f, mf);
    const auto iff = info::fisher_estimate(f);
    const double gap_i = std::abs(rel.value - (iff.value - mf.fisher()));
    const double tol_i = 10.0 * (rel.error_estimate + iff.error);
    worst_h = std::max(worst_h, gap_h / tol_h);
    worst_i = std::max(worst_i, gap_i / tol_i);
    o.pass = o.pass && gap_h <= tol_h && gap_i <= tol_i;
  }
  o.detail = Detail()("I(M, 64^3)", im)("max entropy gap / (10 err)", worst_h)("max Fisher gap / (10 err)", worst_i).str();
  return o;
}

Outcome wealth_relaxation() {
  Outcome o;
  kinetics::TradeParams params{0.5, 0.5};
  kinetics::TraceOptions opt;
  opt.agents = 10000;
  opt.horizon = 50.0;
  const auto trace = kinetics::relaxation_trace(params, opt);
  double worst_mean = 0.0;
  for (std::size_t c = 0; c < trace.means.size(); ++c) {
    const double dev = std::abs(trace.means[c] - 1.0);
    const double se = trace.mean_standard_errors[c];
    worst_mean = std::max(worst_mean, se > 0 ? dev / se : (dev == 0.0 ? 0.0 : INFINITY));
  }
  Detail d;
  d("max |mean-1|/SE", worst_mean);
  o.pass = worst_mean <= 4.0;
  for (std::size_t p = 0; p < trace.probes.size(); ++p) {
    const auto s = kinetics::monotone_summary(trace, p, 0.1);
    o.pass = o.pass && s.fraction >= 0.9 && s.pairs > 0;
    d("monotone " + trace.probes[p], std::to_string(s.decreasing) + "/" + std::to_string(s.pairs));
  }
  const double mu = params.pareto_index();
  o.pass = o.pass && std::abs(trace.final_tail_index - mu) <= 0.2 * mu;
  d("tail index", trace.final_tail_index);
  o.detail = d.str();
  return o;
}

// ---- 12: application ------------------------------------------------------------------------

Outcome application_ordering() {
  Outcome o;
  int wins = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    bench::BenchConfig c;
    c.data_seed = s;
    c.split_seed = 1000 + s;
    const auto sb = bench::run_bench(c);
    bool lins = true;
    for (std::size_t a = 0; a < c.alphas.size(); ++a) lins = lins && sb.rows[sb.winners[a]].kind == bench::ModelKind::LINS;
    wins += lins;
  }
  // rescaling any target column leaves the whitened columns alone
  bench::BenchConfig c;
  const auto data = bench::synth_dataset(c.data_seed, c.rows, c.regime, c.noise);
  const auto ref = bench::run_bench(data, c);
  double drift = 0.0, rmse_change = 0.0;
  const double factors[3] = {1000.0, 0.001, 7.5};
  for (Eigen::Index col = 0; col < data.targets.cols(); ++col) {
    auto scaled = data;
    scaled.targets.col(col) *= factors[col];
    const auto sb = bench::run_bench(scaled, c);
    for (std::size_t r = 0; r < sb.rows.size(); ++r) {
      for (std::size_t a = 0; a < c.alphas.size(); ++a)
        drift = std::max(drift, std::abs(sb.rows[r].energy[a] - ref.rows[r].energy[a]));
      rmse_change = std::max(rmse_change, std::abs(sb.rows[r].rmse - ref.rows[r].rmse));
    }
  }
  o.pass = wins >= 18 && drift <= 1e-9;
  o.detail = Detail()("LINS wins all alphas", std::to_string(wins) + "/20")("max energy drift under rescaling", drift)(
                 "max RMSE change (unconstrained)", rmse_change)
                 .str();
  return o;
}

// ---- 13: CLI determinism --------------------------------------------------------------------

std::string capture(const std::string& cmd) {
  std::string out;
  FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!p) return "<popen failed>";
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return out + "\n<exit " + std::to_string(status) + ">";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome cli_determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "divkit_acceptance";
  fs::create_directories(dir);
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string(), g = (dir / "g.json").string();
  save_samples(a, oracle::uniform_set(1, 60, 2, -1, 1, true));
  save_samples(b, oracle::gaussian_set(2, 50, 2, 0.3));
  GridDensity::sample_box(ReferenceDensity::maxwellian(2, 1.3), 7.0, 81).save(g);
  const std::string white = (dir / "white.csv").string(), plan = (dir / "plan.json").string(),
                    trace = (dir / "trace.json").string();

  struct Cmd {
    const char* module;
    std::string args;
    std::string artifact;
  };
  const std::vector<Cmd> cmds = {
      {"energy", "energy --alpha 1.5 --mu " + a + " --nu " + b, ""},
      {"fourier", "fourier --s 3 --mu " + a + " --nu " + b, ""},
      {"transport", "wasserstein --p 1 --mu " + a + " --nu " + b + " --emit-plan " + plan, plan},
      {"whitening", "whiten --method zca-cor --in " + a + " --out " + white, white},
      {"whitened div", "div --whitened --family energy --alpha 1 --mu " + a + " --nu " + b, ""},
      {"infodiv", "info --what kl --f " + g + " --g " + g, ""},
      {"kinetics", "kinetics --n 2000 --horizon 5 --checkpoints 6 --reference-points 5000 --out " + trace, trace},
      {"bench", "bench --rows 400 --epochs 300", ""},
  };
  std::size_t identical = 0;
  Detail d;
  for (const auto& c : cmds) {
    std::vector<std::string> runs;
    for (const char* threads : {"1", "4", "4"}) {
      const std::string cmd = std::string(DIVKIT_BINARY) + " --seed 11 --threads " + threads + " " + c.args;
      std::string run = capture(cmd);
      if (!c.artifact.empty()) run += slurp(c.artifact);
      runs.push_back(run);
    }
    const bool ok = runs[0] == runs[1] && runs[1] == runs[2] && runs[0].find("<exit 0>") != std::string::npos;
    identical += ok;
    if (!ok) d("differs", c.module);
  }
  o.pass = identical == cmds.size();
  d("bit-identical modules", std::to_string(identical) + "/" + std::to_string(cmds.size()));
  o.detail = d.str();
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "energy-fourier identity on delta pairs", 5, energy_fourier_identity},
      {2, "closed-form Fourier oracle and refinement", 10, fourier_closed_form},
      {3, "W1 lower bound by half energy", 60, w1_lower_bound},
      {4, "W1 upper-bound exponent on shift family", 60, w1_upper_exponent},
      {5, "1-D transport consistency", 10, transport_1d_consistency},
      {6, "scale sensitivity of energy and W_p", 5, scale_sensitivity},
      {7, "whitening theorems", 30, whitening_theorems},
      {8, "sub-additivity by convolution and convex mixing", 60, sub_additivity},
      {9, "unbiased gradient, plain and whitened", 60, unbiased_gradient},
      {10, "kinetic Maxwellian identities", 120, kinetic_identities},
      {11, "wealth-model relaxation", 300, wealth_relaxation},
      {12, "application ordering and unit invariance", 300, application_ordering},
      {13, "CLI determinism across threads and runs", 600, cli_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit;
    const bool pass = o.pass && in_time;
    failed += !pass;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, c.time_limit);
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << " | " << o.detail << " | " << timing
              << (in_time ? "" : " (over time)") << std::endl;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : std::string("acceptance: all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
