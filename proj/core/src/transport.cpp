#include "divkit/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "divkit/energy.hpp"
#include "divkit/errors.hpp"
#include "divkit/parallel.hpp"

namespace divkit::transport {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("Wasserstein order p must be finite and >= 1");
}

double power(double d, double p) { return p == 1.0 ? d : (p == 2.0 ? d * d : std::pow(d, p)); }

double value_error(double cost, double cost_err, double p) {
  const double v = std::pow(cost, 1.0 / p);
  return std::max(std::pow(cost + cost_err, 1.0 / p) - v, v - std::pow(std::max(cost - cost_err, 0.0), 1.0 / p));
}

/// Transportation simplex on a dense m x n cost matrix. Supplies a and demands b must have
/// equal totals. The basis is kept as a spanning tree with exactly m + n - 1 cells.
class TransportationSimplex {
 public:
  TransportationSimplex(std::vector<double> a, std::vector<double> b, std::vector<double> cost)
      : m_(a.size()), n_(b.size()), a_(std::move(a)), b_(std::move(b)), c_(std::move(cost)) {}

  void solve() {
    northwest_corner();
    const std::size_t limit = 50 * (m_ + n_) * (m_ + n_) + 1000;
    std::size_t degenerate_run = 0;
    double cmax = 0.0;
    for (double c : c_) cmax = std::max(cmax, std::abs(c));
    const double tol = 1e-12 * std::max(cmax, 1.0);
    for (iterations_ = 0; iterations_ < limit; ++iterations_) {
      compute_duals();
      const bool use_bland = degenerate_run > m_ + n_;
      bland_used_ = bland_used_ || use_bland;
      std::size_t enter = npos;
      double best = -tol;
      for (std::size_t i = 0; i < m_ && !(use_bland && enter != npos); ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
          const std::size_t cell = i * n_ + j;
          if (in_basis_[cell]) continue;
          const double d = c_[cell] - u_[i] - v_[j];
          if (d < best) {
            best = d;
            enter = cell;
            if (use_bland) break;
          }
        }
      }
      if (enter == npos) return;
      const double theta = pivot(enter, use_bland);
      degenerate_run = theta == 0.0 ? degenerate_run + 1 : 0;
    }
    throw NumericalError("transportation simplex did not converge after " + std::to_string(iterations_) +
                         " pivots (degenerate basis)");
  }

  double flow(std::size_t cell) const { return x_[cell]; }
  bool basic(std::size_t cell) const { return in_basis_[cell]; }
  std::size_t iterations() const { return iterations_; }
  bool bland_used() const { return bland_used_; }

  double dual_residual() {
    compute_duals();
    double r = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) r = std::max(r, u_[i] + v_[j] - c_[i * n_ + j]);
    return r;
  }
  double dual_objective() const {
    CompensatedSum s;
    for (std::size_t i = 0; i < m_; ++i) s += a_[i] * u_[i];
    for (std::size_t j = 0; j < n_; ++j) s += b_[j] * v_[j];
    return s.value();
  }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  void northwest_corner() {
    x_.assign(m_ * n_, 0.0);
    in_basis_.assign(m_ * n_, false);
    basis_.clear();
    std::vector<double> ra = a_, rb = b_;
    std::size_t i = 0, j = 0;
    while (i < m_ && j < n_) {
      const double q = std::min(ra[i], rb[j]);
      const std::size_t cell = i * n_ + j;
      x_[cell] = std::max(q, 0.0);
      in_basis_[cell] = true;
      basis_.push_back(cell);
      ra[i] -= q;
      rb[j] -= q;
      if (i + 1 == m_) {
        ++j;
      } else if (j + 1 == n_) {
        ++i;
      } else if (ra[i] < rb[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Tree nodes: rows 0..m-1, columns m..m+n-1.
  void build_adjacency() {
    adj_.assign(m_ + n_, {});
    for (std::size_t cell : basis_) {
      const std::size_t i = cell / n_, j = cell % n_;
      adj_[i].push_back(cell);
      adj_[m_ + j].push_back(cell);
    }
  }

  void compute_duals() {
    build_adjacency();
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t cell : adj_[node]) {
        const std::size_t i = cell / n_, j = cell % n_;
        if (node < m_) {
          if (seen[m_ + j]) continue;
          v_[j] = c_[cell] - u_[i];
          seen[m_ + j] = 1;
          stack.push_back(m_ + j);
        } else {
          if (seen[i]) continue;
          u_[i] = c_[cell] - v_[j];
          seen[i] = 1;
          stack.push_back(i);
        }
      }
    }
  }

  /// Brings `enter` into the basis; returns the step length.
  double pivot(std::size_t enter, bool bland) {
    const std::size_t ei = enter / n_, ej = enter % n_;
    // Tree path from column ej back to row ei.
    std::vector<std::size_t> parent_cell(m_ + n_, npos);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> queue{ei};
    seen[ei] = 1;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const std::size_t node = queue[h];
      if (node == m_ + ej) break;
      for (std::size_t cell : adj_[node]) {
        const std::size_t other = node < m_ ? m_ + cell % n_ : cell / n_;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_cell[other] = cell;
        queue.push_back(other);
      }
    }
    std::vector<std::size_t> path;  // cells from column ej back to row ei
    for (std::size_t node = m_ + ej; node != ei;) {
      const std::size_t cell = parent_cell[node];
      if (cell == npos) throw NumericalError("transportation basis is not a spanning tree");
      path.push_back(cell);
      node = node < m_ ? m_ + cell % n_ : cell / n_;
    }
    // Cycle: enter (+), path[0] (-), path[1] (+), ...
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = npos;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const double xv = x_[path[k]];
      if (xv < theta || (xv == theta && bland && path[k] < leave)) {
        theta = xv;
        leave = path[k];
      }
    }
    theta = std::max(theta, 0.0);
    x_[enter] = theta;
    for (std::size_t k = 0; k < path.size(); ++k) x_[path[k]] += (k % 2 == 0 ? -theta : theta);
    x_[leave] = 0.0;
    in_basis_[leave] = false;
    in_basis_[enter] = true;
    *std::find(basis_.begin(), basis_.end(), leave) = enter;
    return theta;
  }

  std::size_t m_, n_;
  std::vector<double> a_, b_, c_;
  std::vector<double> x_, u_, v_;
  std::vector<bool> in_basis_;
  std::vector<std::size_t> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::size_t iterations_ = 0;
  bool bland_used_ = false;
};

}  // namespace

nlohmann::json to_json(const TransportPlan& plan) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& e : plan.pairs) pairs.push_back({e.i, e.j, e.mass});
  return {{"order_p", plan.order_p}, {"cost", plan.cost}, {"pairs", pairs}};
}

DivergenceReport wasserstein_1d(const WeightedSampleSet& mu, const WeightedSampleSet& nu, double p) {
  check_p(p);
  if (mu.dim() != 1 || nu.dim() != 1) throw InvalidArgument("wasserstein_1d needs one-dimensional input");
  auto order = [](const WeightedSampleSet& s) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.coord(a, 0) < s.coord(b, 0); });
    return idx;
  };
  const auto im = order(mu), in = order(nu);

  CompensatedSum cost;
  std::size_t a = 0, b = 0;
  double ra = mu.weight(im[0]), rb = nu.weight(in[0]);
  while (a < im.size() && b < in.size()) {
    const bool last_a = a + 1 == im.size(), last_b = b + 1 == in.size();
    double q = std::min(ra, rb);
    if (last_a && last_b) q = std::max(ra, rb);
    if (q > 0.0) cost += q * power(std::abs(mu.coord(im[a], 0) - nu.coord(in[b], 0)), p);
    ra -= q;
    rb -= q;
    if (last_a && last_b) break;
    if ((ra <= 0.0 && !last_a) || last_b) {
      ++a;
      if (a < im.size()) ra += mu.weight(im[a]);
    } else {
      ++b;
      if (b < in.size()) rb += nu.weight(in[b]);
    }
  }
  const double c = std::max(cost.value(), 0.0);

  DivergenceReport r;
  r.family = Family::Wasserstein;
  r.order = p;
  r.value = std::pow(c, 1.0 / p);
  r.error_estimate = value_error(c, 8.0 * kEps * static_cast<double>(mu.size() + nu.size()) * c, p);
  r.diagnostics["method"] = "quantile_coupling";
  r.diagnostics["cost"] = c;
  return r;
}

std::pair<DivergenceReport, TransportPlan> wasserstein_lp(const WeightedSampleSet& mu, const WeightedSampleSet& nu,
                                                          double p, std::size_t max_support) {
  check_p(p);
  if (mu.dim() != nu.dim()) throw DimensionMismatch("inputs have different dimensions");
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0.0) rows.push_back(i);
  for (std::size_t j = 0; j < nu.size(); ++j)
    if (nu.weight(j) > 0.0) cols.push_back(j);
  if (rows.size() * cols.size() > max_support * max_support) {
    throw InvalidArgument("transport instance " + std::to_string(rows.size()) + " x " + std::to_string(cols.size()) +
                          " exceeds max_support^2 = " + std::to_string(max_support * max_support));
  }
  const std::size_t m = rows.size(), n = cols.size();
  std::vector<double> a(m), b(n), cost(m * n);
  for (std::size_t i = 0; i < m; ++i) a[i] = mu.weight(rows[i]);
  for (std::size_t j = 0; j < n; ++j) b[j] = nu.weight(cols[j]);
  {
    CompensatedSum sa, sb;
    for (double x : a) sa += x;
    for (double x : b) sb += x;
    auto big = std::max_element(b.begin(), b.end());
    *big += sa.value() - sb.value();
  }
  parallel_for_blocks(m, 8, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < mu.dim(); ++c) {
          const double d = mu.coord(rows[i], c) - nu.coord(cols[j], c);
          d2 += d * d;
        }
        cost[i * n + j] = power(std::sqrt(d2), p);
      }
  });

  TransportationSimplex lp(a, b, cost);
  lp.solve();

  TransportPlan plan;
  plan.order_p = p;
  CompensatedSum total;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = lp.flow(i * n + j);
      if (x <= 0.0) continue;
      plan.pairs.push_back({rows[i], cols[j], x});
      total += x * cost[i * n + j];
    }
  plan.cost = std::max(total.value(), 0.0);

  const double residual = lp.dual_residual();
  const double gap = std::abs(plan.cost - lp.dual_objective());
  if (residual > 1e-9) {
    throw NumericalError("transport duals are infeasible by " + std::to_string(residual) + " after the simplex stopped");
  }

  DivergenceReport r;
  r.family = Family::Wasserstein;
  r.order = p;
  r.value = std::pow(plan.cost, 1.0 / p);
  r.error_estimate = value_error(plan.cost, gap + 16.0 * kEps * static_cast<double>(m + n) * plan.cost, p);
  r.diagnostics["method"] = "transportation_simplex";
  r.diagnostics["cost"] = plan.cost;
  r.diagnostics["dual_residual"] = residual;
  r.diagnostics["duality_gap"] = gap;
  r.diagnostics["pivots"] = lp.iterations();
  r.diagnostics["bland_fallback"] = lp.bland_used();
  return {r, plan};
}

DivergenceReport wasserstein(const WeightedSampleSet& mu, const WeightedSampleSet& nu, double p) {
  if (mu.dim() == 1 && nu.dim() == 1) return wasserstein_1d(mu, nu, p);
  return wasserstein_lp(mu, nu, p).first;
}

double plan_marginal_error(const TransportPlan& plan, const WeightedSampleSet& mu, const WeightedSampleSet& nu) {
  std::vector<double> row(mu.size(), 0.0), col(nu.size(), 0.0);
  for (const auto& e : plan.pairs) {
    row[e.i] += e.mass;
    col[e.j] += e.mass;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) err = std::max(err, std::abs(row[i] - mu.weight(i)));
  for (std::size_t j = 0; j < col.size(); ++j) err = std::max(err, std::abs(col[j] - nu.weight(j)));
  return err;
}

W1LowerBound check_w1_lower_bound(const WeightedSampleSet& mu, const WeightedSampleSet& nu) {
  W1LowerBound out;
  out.lhs = 0.5 * energy::energy_sq(mu, nu, {1.0, Norm::Euclidean}).value;
  out.rhs = wasserstein(mu, nu, 1.0).value;
  out.slack = out.rhs - out.lhs;
  return out;
}

W1UpperBound check_w1_upper_bound(const WeightedSampleSet& mu, const WeightedSampleSet& nu,
                                  const fourier::QuadratureSpec& quad) {
  W1UpperBound out;
  out.w1 = wasserstein(mu, nu, 1.0).value;
  const auto f = fourier::fourier_metric(mu, nu, {static_cast<double>(mu.dim()) + 1.0, mu.dim()}, quad);
  out.f_metric = f.value;
  out.f_error = f.error_estimate;
  return out;
}

double loglog_slope(std::span<const double> f, std::span<const double> w) {
  if (f.size() != w.size()) throw InvalidArgument("slope fit needs paired samples");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] > 0.0 && w[k] > 0.0) {
      lx.push_back(std::log(f[k]));
      ly.push_back(std::log(w[k]));
    }
  }
  if (lx.size() < 4) throw InvalidArgument("slope fit needs at least four positive points");
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (sxx == 0.0) throw InvalidArgument("slope fit needs distinct metric values");
  return sxy / sxx;
}

ShiftFamilyFit w1_shift_family(const WeightedSampleSet& mu, std::span<const double> shifts,
                               const fourier::QuadratureSpec& quad) {
  if (shifts.size() < 4) throw InvalidArgument("shift family needs at least four members");
  ShiftFamilyFit fit;
  std::vector<double> f, w;
  std::vector<double> t(mu.dim(), 0.0);
  for (double s : shifts) {
    t[0] = s;
    fit.shifts.push_back(s);
    fit.points.push_back(check_w1_upper_bound(mu, mu.shifted(t), quad));
    f.push_back(fit.points.back().f_metric);
    w.push_back(fit.points.back().w1);
  }
  fit.slope = loglog_slope(f, w);
  return fit;
}

}  // namespace divkit::transport
