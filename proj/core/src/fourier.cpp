#include "divkit/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

#include "divkit/errors.hpp"
#include "divkit/parallel.hpp"
#include "divkit/quadrature.hpp"

namespace divkit::fourier {

using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kLadderLevels = 40;
constexpr std::size_t kMaxPairAtoms = 4096;

double sphere_area(std::size_t n) {
  const double h = 0.5 * static_cast<double>(n);
  return 2.0 * std::pow(kPi, h) / std::tgamma(h);
}

bool is_even_integer(double a) { return std::floor(a) == a && std::fmod(a, 2.0) == 0.0; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_double(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

std::vector<std::uint64_t> first_primes(std::size_t count) {
  std::vector<std::uint64_t> p;
  for (std::uint64_t c = 2; p.size() < count; ++c) {
    bool prime = true;
    for (auto q : p) {
      if (q * q > c) break;
      if (c % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) p.push_back(c);
  }
  return p;
}

/// Signed point masses, coordinates already centered.
struct PointMasses {
  std::size_t dim = 1;
  std::vector<double> x;
  std::vector<double> m;
  double msum = 0.0;
  std::size_t size() const { return m.size(); }
};

/// mu - nu as merged signed atoms. Swapping the arguments negates every mass exactly and
/// keeps the atom order, so anything computed from |sigma^|^2 is exactly symmetric.
PointMasses merge_signed(const WeightedSampleSet& mu, const WeightedSampleSet& nu) {
  const std::size_t dim = mu.dim();
  struct Entry {
    std::span<const double> x;
    double w;
    bool first;
  };
  std::vector<Entry> e;
  e.reserve(mu.size() + nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) e.push_back({mu.point(i), mu.weight(i), true});
  for (std::size_t j = 0; j < nu.size(); ++j) e.push_back({nu.point(j), nu.weight(j), false});
  auto less = [](const Entry& a, const Entry& b) {
    return std::lexicographical_compare(a.x.begin(), a.x.end(), b.x.begin(), b.x.end());
  };
  std::sort(e.begin(), e.end(), [&](const Entry& a, const Entry& b) {
    if (less(a, b)) return true;
    if (less(b, a)) return false;
    return a.w < b.w;
  });

  PointMasses pm;
  pm.dim = dim;
  for (std::size_t k = 0; k < e.size();) {
    CompensatedSum p, q;
    std::size_t l = k;
    while (l < e.size() && std::equal(e[l].x.begin(), e[l].x.end(), e[k].x.begin())) {
      (e[l].first ? p : q) += e[l].w;
      ++l;
    }
    const double m = p.value() - q.value();
    if (m != 0.0) {
      pm.x.insert(pm.x.end(), e[k].x.begin(), e[k].x.end());
      pm.m.push_back(m);
    }
    k = l;
  }
  CompensatedSum total;
  for (double m : pm.m) total += m;
  pm.msum = total.value();
  return pm;
}

/// Bounding-box midpoint and diagonal.
std::pair<Eigen::VectorXd, double> box_of(std::size_t dim, const std::vector<double>& x) {
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k % dim);
    lo(c) = std::min(lo(c), x[k]);
    hi(c) = std::max(hi(c), x[k]);
  }
  if (x.empty()) return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)), 0.0};
  return {0.5 * (lo + hi), (hi - lo).norm()};
}

void center_points(std::vector<double>& x, std::size_t dim, const Eigen::VectorXd& c) {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] -= c(static_cast<Eigen::Index>(k % dim));
}

struct Panel {
  double a = 0.0;
  double b = 0.0;
  bool uniform = false;
};

struct DirSet {
  std::vector<double> u;  // count * dim, unit vectors
  std::vector<double> w;  // fine weights
  std::vector<double> wc;  // coarse weights (angular error = |fine - coarse|)
  std::vector<std::uint32_t> rep;
  std::size_t count() const { return w.size(); }
};

struct Layout {
  std::size_t dim = 1;
  double s = 2.0;
  bool dc_removed = false;
  double dc = 0.0;  // sum m_k^2 subtracted from |sigma^|^2 when dc_removed
  int near_order = 0;
  double diameter = 1.0;
  double R = 0.0;
  double r_edge = 0.0;      // lower end of the first panel
  bool inner_model = true;  // [0, r_edge] integrated by the power-law cell (else excluded)
  double uniform_h = 0.0;
  std::vector<Panel> panels;
  bool qmc = false;
  std::size_t reps = 1;
  std::size_t angular_points = 0;
  std::shared_ptr<const DirSet> fixed_dirs;  // QMC set, the same at every radius

  double inner_exponent() const {
    const double base = static_cast<double>(dim) - 1.0 - s;
    return dc_removed ? base : base + 2.0 * (near_order + 1);
  }
};

std::size_t even_count(double x) { return 2 * static_cast<std::size_t>(std::ceil(x)); }

DirSet circle_dirs(const Layout& L, double r) {
  const std::size_t M = L.angular_points > 0 ? 2 * ((L.angular_points + 1) / 2) : even_count(0.6 * L.diameter * r + 8.0);
  DirSet d;
  d.u.resize(2 * M);
  d.w.assign(M, 2.0 * kPi / static_cast<double>(M));
  d.wc.assign(M, 0.0);
  d.rep.assign(M, 0);
  for (std::size_t j = 0; j < M; ++j) {
    const double t = kPi * static_cast<double>(j) / static_cast<double>(M);
    d.u[2 * j] = std::cos(t);
    d.u[2 * j + 1] = std::sin(t);
    if (j % 2 == 0) d.wc[j] = 4.0 * kPi / static_cast<double>(M);
  }
  return d;
}

DirSet sphere_dirs(const Layout& L, double r) {
  const std::size_t P = L.angular_points > 0
                            ? static_cast<std::size_t>(std::ceil(std::sqrt(0.5 * static_cast<double>(L.angular_points))))
                            : static_cast<std::size_t>(std::ceil(0.8 * L.diameter * r + 12.0));
  auto phi_count = [&](double z) {
    if (L.angular_points > 0) return 2 * P;
    return even_count(1.1 * L.diameter * r * std::sqrt(std::max(0.0, 1.0 - z * z)) + 8.0);
  };
  DirSet d;
  auto add_ring = [&](double z, double wz, std::size_t Q, bool coarse) {
    const double sz = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double w = 2.0 * wz * 2.0 * kPi / static_cast<double>(Q);
    for (std::size_t j = 0; j < Q; ++j) {
      const double ph = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(Q);
      d.u.push_back(sz * std::cos(ph));
      d.u.push_back(sz * std::sin(ph));
      d.u.push_back(z);
      d.w.push_back(coarse ? 0.0 : w);
      d.wc.push_back(coarse ? w : 0.0);
      d.rep.push_back(0);
    }
  };
  const quad::Rule fine = quad::gauss_legendre(P);
  for (std::size_t i = 0; i < P; ++i) {
    const double z = 0.5 * (1.0 + fine.x[i]);
    add_ring(z, 0.5 * fine.w[i], phi_count(z), false);
  }
  const quad::Rule coarse = quad::gauss_legendre((P + 1) / 2);
  for (std::size_t i = 0; i < coarse.x.size(); ++i) {
    const double z = 0.5 * (1.0 + coarse.x[i]);
    add_ring(z, 0.5 * coarse.w[i], phi_count(z) / 2, true);
  }
  return d;
}

std::shared_ptr<const DirSet> qmc_dirs(std::size_t dim, std::size_t per_replica, std::size_t reps, std::uint64_t seed) {
  const auto primes = first_primes(dim);
  auto d = std::make_shared<DirSet>();
  const double w = sphere_area(dim) / static_cast<double>(per_replica * reps);
  std::vector<double> shift(dim), z(dim);
  for (std::size_t rho = 0; rho < reps; ++rho) {
    for (std::size_t c = 0; c < dim; ++c) shift[c] = unit_double(splitmix64(seed ^ splitmix64(rho * 1315423911ULL + c)));
    for (std::size_t j = 0; j < per_replica; ++j) {
      double norm = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        double u = radical_inverse(j + 1, primes[c]) + shift[c];
        u -= std::floor(u);
        u = std::clamp(u, 1e-16, 1.0 - 1e-16);
        z[c] = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
        norm += z[c] * z[c];
      }
      norm = std::sqrt(norm);
      for (std::size_t c = 0; c < dim; ++c) d->u.push_back(norm > 0.0 ? z[c] / norm : (c == 0 ? 1.0 : 0.0));
      d->w.push_back(w);
      d->wc.push_back(w);
      d->rep.push_back(static_cast<std::uint32_t>(rho));
    }
  }
  return d;
}

std::shared_ptr<const DirSet> directions(const Layout& L, double r) {
  if (L.qmc) return L.fixed_dirs;
  if (L.dim == 1) {
    static const auto line = std::make_shared<const DirSet>(DirSet{{1.0}, {2.0}, {2.0}, {0}});
    return line;
  }
  if (L.dim == 2) return std::make_shared<const DirSet>(circle_dirs(L, r));
  return std::make_shared<const DirSet>(sphere_dirs(L, r));
}

std::size_t direction_count(const Layout& L, double r) {
  if (L.qmc) return L.fixed_dirs->count();
  if (L.dim == 1) return 1;
  if (L.dim == 2) return L.angular_points > 0 ? L.angular_points : even_count(0.6 * L.diameter * r + 8.0);
  const double P = L.angular_points > 0 ? std::ceil(std::sqrt(0.5 * static_cast<double>(L.angular_points)))
                                        : std::ceil(0.8 * L.diameter * r + 12.0);
  const double Q = L.angular_points > 0 ? 2.0 * P : 2.0 * std::ceil(1.1 * L.diameter * r * 0.785 + 8.0);
  return static_cast<std::size_t>(1.25 * P * Q);
}

Layout make_layout(std::size_t dim, double s, double R, double diameter, const QuadratureSpec& q, bool dc_removed,
                   double dc, int near_order) {
  Layout L;
  L.dim = dim;
  L.s = s;
  L.dc_removed = dc_removed;
  L.dc = dc;
  L.near_order = near_order;
  L.diameter = diameter;
  L.R = R;
  L.angular_points = q.angular_points;
  L.qmc = q.scheme == Scheme::QMC || (q.scheme == Scheme::Auto && dim > 3);
  if (L.qmc) {
    L.reps = q.randomizations;
    L.fixed_dirs = qmc_dirs(dim, q.angular_points > 0 ? q.angular_points : 512, L.reps, q.seed);
  }

  const double period = 2.0 * kPi / diameter;
  const double r1 = std::min(period, R);
  const double rmin = q.inner_cutoff;
  std::vector<Panel> ladder;
  double hi = r1;
  L.inner_model = rmin == 0.0;
  if (rmin < r1) {
    for (int level = 0; level < kLadderLevels; ++level) {
      const double lo = 0.5 * hi;
      if (lo <= rmin) {
        ladder.push_back({rmin, hi, false});
        hi = rmin;
        break;
      }
      ladder.push_back({lo, hi, false});
      hi = lo;
    }
  }
  L.r_edge = rmin >= r1 ? rmin : hi;
  std::reverse(ladder.begin(), ladder.end());
  L.panels = std::move(ladder);

  const double start = std::max(r1, rmin);
  if (R > start) {
    const std::size_t count = q.radial_points > 0
                                  ? q.radial_points
                                  : static_cast<std::size_t>(std::max(1.0, std::ceil((R - start) / period)));
    L.uniform_h = (R - start) / static_cast<double>(count);
    for (std::size_t p = 0; p < count; ++p) {
      const double a = start + L.uniform_h * static_cast<double>(p);
      const double b = p + 1 == count ? R : start + L.uniform_h * static_cast<double>(p + 1);
      L.panels.push_back({a, b, true});
    }
  }
  return L;
}

double layout_cost(const Layout& L, std::size_t atoms) {
  double c = 0.0;
  for (const auto& p : L.panels) c += 15.0 * static_cast<double>(direction_count(L, p.b));
  return c * static_cast<double>(atoms);
}

std::array<double, 15> panel_nodes(const Panel& p) {
  const auto& rule = quad::gauss_kronrod15();
  std::array<double, 15> r{};
  const double h = p.b - p.a;
  for (std::size_t i = 0; i < 15; ++i) r[i] = p.a + 0.5 * h * (1.0 + rule.x[i]);
  return r;
}

/// exp(-i x_k h (1 + x_i)/2) for uniform 1-D panels of width h.
std::vector<cd> uniform_factors(const PointMasses& pm, double h) {
  const auto& rule = quad::gauss_kronrod15();
  std::vector<cd> f(pm.size() * 15);
  for (std::size_t k = 0; k < pm.size(); ++k)
    for (std::size_t i = 0; i < 15; ++i) f[k * 15 + i] = std::polar(1.0, -pm.x[k] * 0.5 * h * (1.0 + rule.x[i]));
  return f;
}

/// out[i * dirs + j] = sum_k m_k (exp(-i r_i <x_k, u_j>) - 1)
void spectrum_at(const PointMasses& pm, std::span<const double> radii, const DirSet& d, std::vector<cd>& out) {
  const std::size_t nd = d.count();
  const std::size_t dim = pm.dim;
  out.assign(radii.size() * nd, cd{});
  std::vector<double> proj(pm.size());
  for (std::size_t j = 0; j < nd; ++j) {
    for (std::size_t k = 0; k < pm.size(); ++k) {
      double t = 0.0;
      for (std::size_t c = 0; c < dim; ++c) t += pm.x[k * dim + c] * d.u[j * dim + c];
      proj[k] = t;
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
      double re = 0.0, im = 0.0;
      for (std::size_t k = 0; k < pm.size(); ++k) {
        const double half = 0.5 * radii[i] * proj[k];
        const double sh = std::sin(half), ch = std::cos(half);
        re -= 2.0 * pm.m[k] * sh * sh;
        im -= 2.0 * pm.m[k] * sh * ch;
      }
      out[i * nd + j] = {re, im};
    }
  }
}

void spectrum_uniform_1d(const PointMasses& pm, const std::vector<cd>& factors, double a, std::vector<cd>& out) {
  std::array<cd, 15> acc{};
  for (std::size_t k = 0; k < pm.size(); ++k) {
    const cd anchor = pm.m[k] * std::polar(1.0, -pm.x[k] * a);
    const cd* f = &factors[k * 15];
    for (std::size_t i = 0; i < 15; ++i) acc[i] += anchor * f[i];
  }
  out.resize(15);
  for (std::size_t i = 0; i < 15; ++i) out[i] = acc[i] - pm.msum;
}

struct PanelOut {
  double k = 0.0;
  double err_radial = 0.0;
  double err_angular = 0.0;
  double sup = 0.0;
  std::vector<double> rep_k;
};

/// Angular integrals of |sigma^|^2 (minus dc) at each radius: fine, |fine - coarse| and per replica.
struct AngularValues {
  std::vector<double> fine, err;
  std::vector<std::vector<double>> rep;
  double sup = 0.0;
};

AngularValues angular(const Layout& L, std::span<const double> radii, const DirSet& d, const std::vector<cd>& spec) {
  const std::size_t nd = d.count();
  AngularValues a;
  a.fine.assign(radii.size(), 0.0);
  a.err.assign(radii.size(), 0.0);
  if (L.qmc) a.rep.assign(radii.size(), std::vector<double>(L.reps, 0.0));
  for (std::size_t i = 0; i < radii.size(); ++i) {
    double f = 0.0, c = 0.0;
    for (std::size_t j = 0; j < nd; ++j) {
      const double sq = std::norm(spec[i * nd + j]);
      const double v = L.dc_removed ? sq - L.dc : sq;
      f += d.w[j] * v;
      c += d.wc[j] * v;
      if (L.qmc) a.rep[i][d.rep[j]] += d.w[j] * v * static_cast<double>(L.reps);
      if (d.w[j] != 0.0) a.sup = std::max(a.sup, std::sqrt(sq) / std::pow(radii[i], L.s));
    }
    a.fine[i] = f;
    a.err[i] = L.qmc ? 0.0 : std::abs(f - c);
  }
  return a;
}

PanelOut integrate_panel(const Layout& L, const Panel& p, const std::array<double, 15>& r, const AngularValues& a) {
  const auto& rule = quad::gauss_kronrod15();
  const double half = 0.5 * (p.b - p.a);
  const double e = static_cast<double>(L.dim) - 1.0 - L.s;
  PanelOut out;
  double k = 0.0, g = 0.0, ang = 0.0;
  if (L.qmc) out.rep_k.assign(L.reps, 0.0);
  for (std::size_t i = 0; i < 15; ++i) {
    const double rw = std::pow(r[i], e);
    k += rule.kronrod[i] * a.fine[i] * rw;
    g += rule.gauss[i] * a.fine[i] * rw;
    ang += rule.kronrod[i] * a.err[i] * rw;
    if (L.qmc)
      for (std::size_t rho = 0; rho < L.reps; ++rho) out.rep_k[rho] += half * rule.kronrod[i] * a.rep[i][rho] * rw;
  }
  out.k = half * k;
  out.err_radial = half * std::abs(k - g);
  out.err_angular = half * ang;
  out.sup = a.sup;
  return out;
}

/// Source of nodal spectra: either computed on the fly from point masses or read from a cache.
struct Evaluation {
  double integral = 0.0;
  double err_radial = 0.0;
  double err_angular = 0.0;
  double inner = 0.0;  // power-law cell value (or excluded estimate)
  double abs_sum = 0.0;
  double qmc_se = 0.0;
  double sup = 0.0;
  std::size_t nodes = 0;
};

template <class PanelSpectrum, class InnerSpectrum>
Evaluation evaluate_layout(const Layout& L, PanelSpectrum&& panel_spectrum, InnerSpectrum&& inner_spectrum) {
  std::vector<PanelOut> outs(L.panels.size());
  std::vector<std::size_t> node_counts(L.panels.size());
  parallel_for_blocks(L.panels.size(), 1, [&](std::size_t begin, std::size_t end) {
    std::vector<cd> spec;
    for (std::size_t p = begin; p < end; ++p) {
      const auto r = panel_nodes(L.panels[p]);
      const auto d = directions(L, L.panels[p].b);
      panel_spectrum(p, r, *d, spec);
      outs[p] = integrate_panel(L, L.panels[p], r, angular(L, r, *d, spec));
      node_counts[p] = 15 * d->count();
    }
  });

  Evaluation ev;
  CompensatedSum total, abs_total;
  std::vector<CompensatedSum> rep_total(L.qmc ? L.reps : 0);
  for (std::size_t p = 0; p < outs.size(); ++p) {
    total += outs[p].k;
    abs_total += std::abs(outs[p].k);
    ev.err_radial += outs[p].err_radial;
    ev.err_angular += outs[p].err_angular;
    ev.sup = std::max(ev.sup, outs[p].sup);
    ev.nodes += node_counts[p];
    for (std::size_t rho = 0; rho < rep_total.size(); ++rho) rep_total[rho] += outs[p].rep_k[rho];
  }

  if (L.r_edge > 0.0) {
    const std::array<double, 1> r0{L.r_edge};
    const auto d = directions(L, L.r_edge);
    std::vector<cd> spec;
    inner_spectrum(r0, *d, spec);
    const AngularValues a = angular(L, r0, *d, spec);
    const double e = L.inner_exponent();
    const double rw = std::pow(L.r_edge, static_cast<double>(L.dim) - 1.0 - L.s);
    ev.inner = a.fine[0] * rw * L.r_edge / (e + 1.0);
    ev.nodes += d->count();
  }
  if (L.inner_model) {
    total += ev.inner;
    abs_total += std::abs(ev.inner);
  }
  ev.integral = total.value();
  ev.abs_sum = abs_total.value();

  if (L.qmc && L.reps > 1) {
    double m = 0.0;
    for (auto& t : rep_total) m += t.value();
    m /= static_cast<double>(L.reps);
    double var = 0.0;
    for (auto& t : rep_total) var += (t.value() - m) * (t.value() - m);
    var /= static_cast<double>(L.reps - 1);
    ev.qmc_se = std::sqrt(var / static_cast<double>(L.reps));
  }
  return ev;
}

Evaluation evaluate_masses(const Layout& L, const PointMasses& pm) {
  std::vector<cd> factors;
  if (L.dim == 1 && L.uniform_h > 0.0) factors = uniform_factors(pm, L.uniform_h);
  return evaluate_layout(
      L,
      [&](std::size_t p, const std::array<double, 15>& r, const DirSet& d, std::vector<cd>& out) {
        const Panel& panel = L.panels[p];
        if (panel.uniform && !factors.empty() && std::abs((panel.b - panel.a) - L.uniform_h) <= 1e-12 * L.uniform_h) {
          spectrum_uniform_1d(pm, factors, panel.a, out);
        } else {
          spectrum_at(pm, r, d, out);
        }
      },
      [&](std::span<const double> r, const DirSet& d, std::vector<cd>& out) { spectrum_at(pm, r, d, out); });
}

/// Bounds on the tail beyond R.
struct TailModel {
  std::size_t dim = 1;
  double s = 2.0;
  double abs_mass = 0.0;  // sum |m_k|
  double sq_mass = 0.0;   // sum m_k^2
  bool pairs = false;     // pair sums available
  double d_min = 0.0;
  // Sums over ordered pairs k != l of |m_k m_l| d^-p for the powers used by dim.
  std::array<double, 3> pair_sum{};

  double area() const { return sphere_area(dim); }
  bool bound_only_allowed() const { return s > static_cast<double>(dim); }

  /// mean-square part beyond R (closed form) when s > n, else zero (removed).
  double ms_correction(double R) const {
    if (!(s > static_cast<double>(dim))) return 0.0;
    const double n = static_cast<double>(dim);
    return sq_mass * area() * std::pow(R, n - s) / (s - n);
  }
  double bound_only(double R) const {
    const double n = static_cast<double>(dim);
    return abs_mass * abs_mass * area() * std::pow(R, n - s) / (s - n);
  }
  /// Oscillating remainder beyond R, from second-mean-value bounds on each pair.
  double oscillating(double R) const {
    if (!pairs) return std::numeric_limits<double>::infinity();
    if (dim == 1) return 2.0 * 2.0 * std::pow(R, -s) * pair_sum[0];
    if (dim == 3) return 4.0 * kPi * 2.0 * std::pow(R, 1.0 - s) * pair_sum[0];
    if (R * d_min < 2.0) return std::numeric_limits<double>::infinity();
    const double c = std::sqrt(2.0 / kPi);
    const double lead = (2.0 + 1.0 / (8.0 * (s - 0.5))) * std::pow(R, 0.5 - s) * pair_sum[0];
    const double r2 = 9.0 / 128.0 * std::pow(R, -0.5 - s) / (s + 0.5) * pair_sum[1];
    const double r3 = 75.0 / 1024.0 * std::pow(R, -1.5 - s) / (s + 1.5) * pair_sum[2];
    return 2.0 * kPi * c * (lead + r2 + r3);
  }
};

TailModel make_tail(const PointMasses& pm, double s) {
  TailModel t;
  t.dim = pm.dim;
  t.s = s;
  CompensatedSum a, q;
  for (double m : pm.m) {
    a += std::abs(m);
    q += m * m;
  }
  t.abs_mass = a.value();
  t.sq_mass = q.value();
  const std::size_t K = pm.size();
  if (pm.dim > 3 || K > kMaxPairAtoms || !(s > 0.5 * (static_cast<double>(pm.dim) - 1.0))) return t;
  t.pairs = true;
  t.d_min = std::numeric_limits<double>::infinity();
  std::array<CompensatedSum, 3> acc;
  const std::size_t dim = pm.dim;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = k + 1; l < K; ++l) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double diff = pm.x[k * dim + c] - pm.x[l * dim + c];
        d2 += diff * diff;
      }
      const double d = std::sqrt(d2);
      t.d_min = std::min(t.d_min, d);
      const double w = 2.0 * std::abs(pm.m[k] * pm.m[l]);
      if (dim == 1) {
        acc[0] += w / d;
      } else if (dim == 3) {
        acc[0] += w / d2;
      } else {
        const double d15 = d * std::sqrt(d);
        acc[0] += w / d15;
        acc[1] += w / (d15 * d);
        acc[2] += w / (d15 * d2);
      }
    }
  }
  for (std::size_t i = 0; i < 3; ++i) t.pair_sum[i] = acc[i].value();
  return t;
}

enum class TailChoice { Bound, Correct };

struct TailResult {
  TailChoice mode = TailChoice::Bound;
  double correction = 0.0;
  double bound = std::numeric_limits<double>::infinity();
};

TailResult choose_tail(const TailModel& t, double R, TailMode mode) {
  TailResult best;
  if (t.bound_only_allowed() && mode != TailMode::MeanSquare) best = {TailChoice::Bound, 0.0, t.bound_only(R)};
  if (mode == TailMode::Bound && t.bound_only_allowed()) return best;
  const double osc = t.oscillating(R);
  if (osc < best.bound) best = {TailChoice::Correct, t.ms_correction(R), osc};
  return best;
}

double sqrt_error(double I, double err) {
  const double F = std::sqrt(std::max(I, 0.0));
  return std::max(std::sqrt(std::max(I + err, 0.0)) - F, F - std::sqrt(std::max(I - err, 0.0)));
}

void validate_spec(const QuadratureSpec& q) {
  if (!(q.truncation_radius >= 0.0) || !std::isfinite(q.truncation_radius))
    throw InvalidArgument("truncation radius must be finite and nonnegative");
  if (!(q.inner_cutoff >= 0.0) || !std::isfinite(q.inner_cutoff))
    throw InvalidArgument("inner cutoff must be finite and nonnegative");
  if (q.truncation_radius > 0.0 && !(q.inner_cutoff < q.truncation_radius))
    throw InvalidArgument("inner cutoff must be below the truncation radius");
  if (q.radial_points != 0 && q.radial_points < 16) throw InvalidArgument("radial point count must be at least 16");
  if (q.angular_points != 0 && q.angular_points < 16) throw InvalidArgument("angular point count must be at least 16");
  if (!(q.tolerance > 0.0 && q.tolerance < 1.0)) throw InvalidArgument("tolerance must lie in (0, 1)");
  if (q.randomizations < 2) throw InvalidArgument("at least two randomizations are needed for a standard error");
  if (!(q.budget > 0.0)) throw InvalidArgument("evaluation budget must be positive");
}

}  // namespace

int required_matching_order(double s, std::size_t n) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("Fourier order s must be positive and finite");
  const double nn = static_cast<double>(n);
  if (s < nn + 2.0) return 0;
  const double h = 0.5 * (s - nn);
  return std::floor(h) == h ? static_cast<int>(h) - 1 : static_cast<int>(std::floor(h));
}

void FourierOrder::validate() const {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("Fourier order s must be positive and finite");
  if (dim == 0) throw InvalidArgument("Fourier order needs a positive dimension");
}

double c_alpha(std::size_t n, double alpha) {
  if (n == 0) throw InvalidArgument("dimension must be positive");
  if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
  if (is_even_integer(alpha)) throw InvalidArgument("c_alpha is undefined for even integer alpha");
  const double nn = static_cast<double>(n);
  if (!(alpha > -nn)) throw InvalidArgument("alpha must exceed -n");
  return std::exp(alpha * std::numbers::ln2 - 0.5 * nn * std::log(kPi) + std::lgamma(0.5 * (nn + alpha)) -
                  std::lgamma(-0.5 * alpha));
}

cd char_fn(const WeightedSampleSet& mu, std::span<const double> xi) {
  if (xi.size() != mu.dim()) throw DimensionMismatch("frequency has dimension " + std::to_string(xi.size()));
  for (double v : xi)
    if (!std::isfinite(v)) throw InvalidArgument("frequency must be finite");
  CompensatedSum re, im;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    double t = 0.0;
    for (std::size_t c = 0; c < mu.dim(); ++c) t += mu.coord(j, c) * xi[c];
    re += mu.weight(j) * std::cos(t);
    im += -mu.weight(j) * std::sin(t);
  }
  return {re.value(), im.value()};
}

DivergenceReport fourier_metric(const WeightedSampleSet& mu, const WeightedSampleSet& nu, const FourierOrder& order,
                                const QuadratureSpec& quad, double moment_tol) {
  order.validate();
  validate_spec(quad);
  if (mu.dim() != nu.dim()) throw DimensionMismatch("inputs have different dimensions");
  if (mu.dim() != order.dim) {
    throw DimensionMismatch("Fourier order is for dim " + std::to_string(order.dim) + ", inputs have dim " +
                            std::to_string(mu.dim()));
  }
  const std::size_t n = order.dim;
  const double nn = static_cast<double>(n);
  const double s = order.s;

  const int required = order.required_matching();
  if (required > kMaxMomentOrder) throw InvalidArgument("s needs moments beyond order 4 to match");
  if (auto mm = moment_mismatch(mu, nu, required, moment_tol)) {
    throw AdmissibilityError("F_s with s = " + std::to_string(s) + " needs moments up to order " +
                             std::to_string(required) + " to agree; " + mm->describe());
  }
  const int matched = matched_moment_order(mu, nu, kMaxMomentOrder, moment_tol);
  const bool dc_removed = !(s > nn);
  if (s == nn) throw InvalidArgument("s = n is not supported (the kernel is logarithmic)");
  if (s > nn && s >= nn + 2.0 * matched + 2.0) {
    throw AdmissibilityError("F_s is infinite: with moments matched to order " + std::to_string(matched) +
                             " the integrand is not integrable at 0 for s >= n + 2l + 2 = " +
                             std::to_string(nn + 2.0 * matched + 2.0));
  }
  if (dc_removed && (n > 3 || !(s > 0.5 * (nn - 1.0)))) {
    throw InvalidArgument("s <= n is supported for n <= 3 and s > (n - 1)/2 only");
  }

  DivergenceReport r;
  r.family = Family::Fourier;
  r.order = s;
  auto& diag = r.diagnostics;
  diag["admissibility"] = {{"required_matching", required},
                           {"matched_orders", matched},
                           {"admissible", true},
                           {"regularization", dc_removed ? "self_interaction_removed" : "none"}};

  PointMasses pm = merge_signed(mu, nu);
  if (pm.size() == 0) {
    r.value = 0.0;
    r.error_estimate = 0.0;
    diag["integral"] = 0.0;
    diag["integral_error"] = 0.0;
    diag["identical_inputs"] = true;
    return r;
  }
  auto [center, diameter] = box_of(n, pm.x);
  if (!(diameter > 0.0)) diameter = 1.0;
  center_points(pm.x, n, center);

  const TailModel tail = make_tail(pm, s);
  if (dc_removed && !tail.pairs) {
    throw AdmissibilityError("s <= n needs the pairwise tail bound, available for at most " +
                             std::to_string(kMaxPairAtoms) + " distinct atoms");
  }
  const double dc = dc_removed ? tail.sq_mass : 0.0;
  const int near = std::min(matched, kMaxMomentOrder);
  auto layout_for = [&](double R) { return make_layout(n, s, R, diameter, quad, dc_removed, dc, near); };

  const double period = 2.0 * kPi / diameter;
  bool capped = false;
  double R = quad.truncation_radius;
  Evaluation ev;
  Layout L;
  if (R > 0.0) {
    L = layout_for(R);
    ev = evaluate_masses(L, pm);
  } else {
    double R0 = std::max(16.0 * period, 2.0 * quad.inner_cutoff);
    if (n == 2 && dc_removed) R0 = std::max(R0, 2.0 / tail.d_min);
    L = layout_for(R0);
    ev = evaluate_masses(L, pm);
    const double target = quad.tolerance * std::abs(ev.integral);
    R = R0;
    while (choose_tail(tail, R, quad.tail).bound > target) {
      if (layout_cost(layout_for(2.0 * R), pm.size()) > quad.budget) {
        capped = true;
        break;
      }
      R *= 2.0;
    }
    if (R != R0) {
      L = layout_for(R);
      ev = evaluate_masses(L, pm);
    }
  }

  const TailResult tr = choose_tail(tail, R, quad.tail);
  if (!std::isfinite(tr.bound)) {
    throw InvalidArgument("no tail bound is available at R = " + std::to_string(R) +
                          "; increase the truncation radius (need R * min pair distance >= 2)");
  }
  const double I = ev.integral + tr.correction;
  const double near_zero = std::abs(ev.inner);
  const double rounding = 64.0 * kEps * (ev.abs_sum + std::abs(tr.correction));
  const double err_I = tr.bound + near_zero + ev.err_radial + ev.err_angular + 3.0 * ev.qmc_se + rounding;

  if (I < -err_I) {
    if (dc_removed) {
      throw AdmissibilityError("regularized F_s^2 is negative (" + std::to_string(I) +
                               "); the inputs overlap too much for s <= n");
    }
    throw NumericalError("F_s^2 evaluated to " + std::to_string(I));
  }
  r.value = std::sqrt(std::max(I, 0.0));
  r.error_estimate = sqrt_error(I, err_I);

  diag["integral"] = I;
  diag["integral_error"] = err_I;
  diag["tail_mode"] = tr.mode == TailChoice::Bound ? "bounded" : "mean_square_added";
  diag["tail_correction"] = tr.correction;
  diag["tail_bound"] = tr.bound;
  diag["near_zero_bound"] = near_zero;
  diag["near_zero_model"] = L.inner_model ? "power_law_cell" : "excluded";
  diag["quadrature_error"] = ev.err_radial;
  diag["angular_error"] = ev.err_angular;
  if (L.qmc) {
    diag["qmc_standard_error"] = ev.qmc_se;
    diag["randomizations"] = L.reps;
  }
  diag["rounding_error"] = rounding;
  diag["R_max"] = R;
  diag["r_min"] = quad.inner_cutoff;
  diag["truncation_capped"] = capped;
  diag["panels"] = L.panels.size();
  diag["nodes"] = ev.nodes;
  diag["atoms"] = pm.size();
  diag["scheme"] = L.qmc ? "randomized_qmc" : (n == 1 ? "exact_two_point" : "product");
  diag["sup_form_grid_max"] = ev.sup;
  return r;
}

struct SpectralIntegrator::Impl {
  Layout layout;
  Eigen::VectorXd center;
  std::vector<std::shared_ptr<const DirSet>> dirs;  // per panel, then the inner node
  std::vector<std::size_t> offset;                  // start of each block in a spectrum
  std::size_t total = 0;
};

SpectralIntegrator::SpectralIntegrator(std::size_t dim, double s, double truncation_radius, double diameter,
                                       const Eigen::VectorXd& center, const QuadratureSpec& quad, int near_zero_order)
    : impl_(std::make_unique<Impl>()) {
  validate_spec(quad);
  if (dim == 0 || static_cast<std::size_t>(center.size()) != dim) throw DimensionMismatch("center has wrong dimension");
  if (!(s > static_cast<double>(dim))) throw InvalidArgument("cached spectra need s > n");
  if (!(truncation_radius > 0.0) || !(diameter > 0.0))
    throw InvalidArgument("truncation radius and diameter must be positive");
  impl_->layout = make_layout(dim, s, truncation_radius, diameter, quad, false, 0.0, near_zero_order);
  impl_->center = center;
  const Layout& L = impl_->layout;
  for (const auto& p : L.panels) {
    impl_->dirs.push_back(directions(L, p.b));
    impl_->offset.push_back(impl_->total);
    impl_->total += 15 * impl_->dirs.back()->count();
  }
  impl_->dirs.push_back(directions(L, L.r_edge));
  impl_->offset.push_back(impl_->total);
  impl_->total += impl_->dirs.back()->count();
}

SpectralIntegrator::~SpectralIntegrator() = default;
SpectralIntegrator::SpectralIntegrator(SpectralIntegrator&&) noexcept = default;
SpectralIntegrator& SpectralIntegrator::operator=(SpectralIntegrator&&) noexcept = default;

std::size_t SpectralIntegrator::node_count() const { return impl_->total; }
double SpectralIntegrator::truncation_radius() const { return impl_->layout.R; }

SpectralIntegrator::Spectrum SpectralIntegrator::spectrum(const WeightedSampleSet& set) const {
  const Layout& L = impl_->layout;
  if (set.dim() != L.dim) throw DimensionMismatch("sample dimension does not match the integrator");
  PointMasses pm;
  pm.dim = L.dim;
  pm.x = set.coords();
  center_points(pm.x, L.dim, impl_->center);
  pm.m = set.weights();
  CompensatedSum total;
  for (double m : pm.m) total += m;
  pm.msum = total.value();

  std::vector<cd> factors;
  if (L.dim == 1 && L.uniform_h > 0.0) factors = uniform_factors(pm, L.uniform_h);
  Spectrum out(impl_->total);
  parallel_for_blocks(L.panels.size(), 1, [&](std::size_t begin, std::size_t end) {
    std::vector<cd> block;
    for (std::size_t p = begin; p < end; ++p) {
      const Panel& panel = L.panels[p];
      if (panel.uniform && !factors.empty()) {
        spectrum_uniform_1d(pm, factors, panel.a, block);
      } else {
        spectrum_at(pm, panel_nodes(panel), *impl_->dirs[p], block);
      }
      std::copy(block.begin(), block.end(), out.begin() + static_cast<std::ptrdiff_t>(impl_->offset[p]));
    }
  });
  std::vector<cd> inner;
  const std::array<double, 1> r0{L.r_edge};
  spectrum_at(pm, r0, *impl_->dirs.back(), inner);
  std::copy(inner.begin(), inner.end(), out.begin() + static_cast<std::ptrdiff_t>(impl_->offset.back()));
  return out;
}

DivergenceReport SpectralIntegrator::compare(const Spectrum& a, const Spectrum& b) const {
  if (a.size() != impl_->total || b.size() != impl_->total) throw InvalidArgument("spectra do not match the layout");
  const Layout& L = impl_->layout;
  auto copy_diff = [&](std::size_t block, std::size_t len, std::vector<cd>& out) {
    const std::size_t o = impl_->offset[block];
    out.resize(len);
    for (std::size_t i = 0; i < len; ++i) out[i] = a[o + i] - b[o + i];
  };
  const Evaluation ev = evaluate_layout(
      L,
      [&](std::size_t p, const std::array<double, 15>&, const DirSet& d, std::vector<cd>& out) {
        copy_diff(p, 15 * d.count(), out);
      },
      [&](std::span<const double>, const DirSet& d, std::vector<cd>& out) {
        copy_diff(impl_->offset.size() - 1, d.count(), out);
      });

  const double n = static_cast<double>(L.dim);
  const double tail = 4.0 * sphere_area(L.dim) * std::pow(L.R, n - L.s) / (L.s - n);
  const double I = ev.integral;
  const double err_I = tail + std::abs(ev.inner) + ev.err_radial + ev.err_angular + 3.0 * ev.qmc_se +
                       64.0 * kEps * ev.abs_sum;
  DivergenceReport r;
  r.family = Family::Fourier;
  r.order = L.s;
  r.value = std::sqrt(std::max(I, 0.0));
  r.error_estimate = sqrt_error(I, err_I);
  r.diagnostics["integral"] = I;
  r.diagnostics["integral_error"] = err_I;
  r.diagnostics["tail_mode"] = "bounded";
  r.diagnostics["tail_bound"] = tail;
  r.diagnostics["near_zero_bound"] = std::abs(ev.inner);
  r.diagnostics["quadrature_error"] = ev.err_radial;
  r.diagnostics["angular_error"] = ev.err_angular;
  r.diagnostics["R_max"] = L.R;
  r.diagnostics["cached"] = true;
  return r;
}

}  // namespace divkit::fourier
