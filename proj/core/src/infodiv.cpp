#include "divkit/infodiv.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "divkit/errors.hpp"

namespace divkit::info {

namespace {

constexpr double kClamp = 1e-10;
constexpr double kDensityFloor = 1e-300;

// Node values of `ref` on the geometry of `grid`.
std::vector<double> tabulate(const ReferenceDensity& ref, const GridDensity& grid) {
  if (ref.dim() != grid.dim()) throw DimensionMismatch("densities differ in dimension");
  std::vector<double> out(grid.size());
  std::array<double, 3> x{};
  for (std::size_t f = 0; f < grid.size(); ++f) {
    for (std::size_t k = 0; k < grid.dim(); ++k) x[k] = grid.coordinate(f, k);
    out[f] = ref.pdf(std::span<const double>(x.data(), grid.dim()));
  }
  return out;
}

// Central-difference partial derivative of node values v along axis k with half-width `step`
// nodes; only meaningful for nodes at least `step` away from the boundary.
double central(const GridDensity& grid, const std::vector<double>& v, std::size_t f, std::size_t k, std::size_t step) {
  const std::size_t s = grid.stride(k) * step;
  return (v[f + s] - v[f - s]) / (2.0 * grid.spacing()[k] * static_cast<double>(step));
}

bool interior(const GridDensity& grid, std::size_t f, std::size_t margin) {
  const auto idx = grid.index(f);
  for (std::size_t k = 0; k < grid.dim(); ++k)
    if (idx[k] < margin || idx[k] + margin >= grid.shape()[k]) return false;
  return true;
}

double boundary_layer(const GridDensity& grid, const std::vector<double>& g, const IndexBox& box) {
  double cell = 1.0;
  for (double h : grid.spacing()) cell *= h;
  double s = 0.0;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const auto idx = grid.index(f);
    bool inside = true, on_edge = false;
    for (std::size_t k = 0; k < grid.dim(); ++k) {
      if (idx[k] < box.lo[k] || idx[k] > box.hi[k]) inside = false;
      if (idx[k] == box.lo[k] || idx[k] == box.hi[k]) on_edge = true;
    }
    if (inside && on_edge) s += std::abs(g[f]);
  }
  return s * cell;
}

// Integral of the fine integrand over the nodes `crop` away from the boundary, with error
// |fine - coarse| / 3 on the common stride-2 lattice plus the boundary layer.
quad::Estimate grid_integral(const GridDensity& grid, const std::vector<double>& fine,
                             const std::vector<double>& coarse, std::size_t fine_crop, std::size_t coarse_crop) {
  const IndexBox full = cropped_box(grid, fine_crop, 1);
  const IndexBox common = cropped_box(grid, coarse_crop, 2);
  const double value = integrate_region(grid, fine, full, 1);
  const double a = integrate_region(grid, fine, common, 1);
  const double b = integrate_region(grid, coarse, common, 2);
  return {value, std::abs(a - b) / 3.0 + boundary_layer(grid, fine, full)};
}

const GridDensity* grid_of(const Density& d) { return std::get_if<GridDensity>(&d); }
const ReferenceDensity* ref_of(const Density& d) { return std::get_if<ReferenceDensity>(&d); }

// Resolves a pair onto one grid: returns the geometry and both node-value vectors.
struct Resolved {
  const GridDensity* grid;
  std::vector<double> f;
  std::vector<double> g;
};

Resolved resolve(const Density& f, const Density& g) {
  const GridDensity* gf = grid_of(f);
  const GridDensity* gg = grid_of(g);
  if (gf && gg) {
    if (!gf->same_geometry(*gg)) throw InvalidArgument("grid densities must share origin, spacing and shape");
    return {gf, gf->values(), gg->values()};
  }
  if (gf) return {gf, gf->values(), tabulate(*ref_of(g), *gf)};
  if (gg) return {gg, tabulate(*ref_of(f), *gg), gg->values()};
  throw InvalidArgument("pair of closed-form densities has no evaluation grid");
}

DivergenceReport clamp_report(Family family, double value, double error, const char* what) {
  if (value < -kClamp) {
    throw NumericalError(std::string(what) + " evaluated to a negative value beyond the clamp window");
  }
  DivergenceReport r;
  r.family = family;
  r.value = value < 0.0 ? 0.0 : value;
  r.error_estimate = error;
  r.diagnostics["raw_value"] = value;
  r.diagnostics["clamped"] = value < 0.0;
  return r;
}

bool gaussian(const ReferenceDensity& r) { return r.kind() == ReferenceDensity::Kind::Gaussian; }

}  // namespace

quad::Estimate entropy_estimate(const Density& f) {
  if (const auto* ref = ref_of(f)) return {ref->entropy(), 0.0};
  const GridDensity& grid = *grid_of(f);
  std::vector<double> g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = grid.values()[i];
    g[i] = v > 0.0 ? -v * std::log(v) : 0.0;
  }
  return grid_integral(grid, g, g, 0, 0);
}

double entropy(const Density& f) { return entropy_estimate(f).value; }

DivergenceReport kl(const Density& f, const Density& g) {
  const ReferenceDensity* rf = ref_of(f);
  const ReferenceDensity* rg = ref_of(g);
  if (rf && rg) {
    if (!gaussian(*rf) || !gaussian(*rg)) {
      throw InvalidArgument("closed-form KL is only available between Gaussians; tabulate one side on a grid");
    }
    if (rf->dim() != rg->dim()) throw DimensionMismatch("densities differ in dimension");
    const double n = static_cast<double>(rf->dim());
    const double ratio = rf->temperature() / rg->temperature();
    const double shift = (rf->mean() - rg->mean()).squaredNorm();
    auto r = clamp_report(Family::KL, 0.5 * n * (ratio - 1.0 - std::log(ratio)) + shift / (2.0 * rg->temperature()),
                          0.0, "relative entropy");
    r.diagnostics["method"] = "closed_form";
    return r;
  }
  const Resolved p = resolve(f, g);
  std::vector<double> integrand(p.grid->size());
  for (std::size_t i = 0; i < integrand.size(); ++i) {
    const double a = p.f[i];
    if (a <= 0.0) {
      integrand[i] = 0.0;
      continue;
    }
    if (!(p.g[i] > 0.0)) {
      throw AdmissibilityError("relative entropy undefined: g vanishes at grid node " + std::to_string(i) +
                               " where f > 0");
    }
    integrand[i] = a * (std::log(a) - std::log(p.g[i]));
  }
  const auto est = grid_integral(*p.grid, integrand, integrand, 0, 0);
  auto r = clamp_report(Family::KL, est.value, est.error, "relative entropy");
  r.diagnostics["method"] = "grid_trapezoid";
  return r;
}

quad::Estimate fisher_estimate(const Density& f) {
  if (const auto* ref = ref_of(f)) return {ref->fisher(), 0.0};
  const GridDensity& grid = *grid_of(f);
  const auto& v = grid.values();
  auto integrand = [&](std::size_t step) {
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!interior(grid, i, step)) continue;
      double g2 = 0.0;
      for (std::size_t k = 0; k < grid.dim(); ++k) {
        const double d = central(grid, v, i, k, step);
        g2 += d * d;
      }
      out[i] = g2 == 0.0 ? 0.0 : g2 / std::max(v[i], kDensityFloor);
    }
    return out;
  };
  return grid_integral(grid, integrand(1), integrand(2), 1, 2);
}

double fisher(const Density& f) { return fisher_estimate(f).value; }

DivergenceReport relative_fisher(const Density& f, const Density& g) {
  const ReferenceDensity* rf = ref_of(f);
  const ReferenceDensity* rg = ref_of(g);
  if (rf && rg) {
    if (!gaussian(*rf) || !gaussian(*rg)) {
      throw InvalidArgument("closed-form relative Fisher information is only available between Gaussians");
    }
    if (rf->dim() != rg->dim()) throw DimensionMismatch("densities differ in dimension");
    const double a = 1.0 / rg->temperature() - 1.0 / rf->temperature();
    const double n = static_cast<double>(rf->dim());
    const double shift = (rf->mean() - rg->mean()).squaredNorm();
    auto r = clamp_report(Family::Fisher,
                          a * a * n * rf->temperature() + shift / (rg->temperature() * rg->temperature()), 0.0,
                          "relative Fisher information");
    r.diagnostics["method"] = "closed_form";
    return r;
  }

  const Resolved p = resolve(f, g);
  const GridDensity& grid = *p.grid;
  const std::size_t d = grid.dim();
  // Scores come from central differences for tabulated sides and analytically otherwise.
  auto integrand = [&](std::size_t step) {
    std::vector<double> out(grid.size(), 0.0);
    std::array<double, 3> x{};
    std::array<double, 3> sf{}, sg{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!interior(grid, i, step)) continue;
      const double fi = p.f[i];
      const double gi = p.g[i];
      if (fi <= 0.0) continue;
      if (!(gi > 0.0)) {
        throw AdmissibilityError("relative Fisher information undefined: g vanishes at grid node " +
                                 std::to_string(i));
      }
      for (std::size_t k = 0; k < d; ++k) x[k] = grid.coordinate(i, k);
      const std::span<const double> xs(x.data(), d);
      if (rf) {
        rf->score(xs, std::span<double>(sf.data(), d));
      } else {
        for (std::size_t k = 0; k < d; ++k) sf[k] = central(grid, p.f, i, k, step) / std::max(fi, kDensityFloor);
      }
      if (rg) {
        rg->score(xs, std::span<double>(sg.data(), d));
      } else {
        for (std::size_t k = 0; k < d; ++k) sg[k] = central(grid, p.g, i, k, step) / std::max(gi, kDensityFloor);
      }
      double s2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) s2 += (sf[k] - sg[k]) * (sf[k] - sg[k]);
      out[i] = s2 * fi;
    }
    return out;
  };
  const auto est = grid_integral(grid, integrand(1), integrand(2), 1, 2);
  auto r = clamp_report(Family::Fisher, est.value, est.error, "relative Fisher information");
  r.diagnostics["method"] = "grid_central_difference";
  return r;
}

ReferenceDensity maxwellian_match(const GridDensity& f) {
  const std::size_t d = f.dim();
  const auto& v = f.values();
  Eigen::VectorXd u(static_cast<Eigen::Index>(d));
  std::vector<double> g(f.size());
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = f.coordinate(i, k) * v[i];
    u(static_cast<Eigen::Index>(k)) = f.integrate(g);
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double dv = f.coordinate(i, k) - u(static_cast<Eigen::Index>(k));
      r2 += dv * dv;
    }
    g[i] = r2 * v[i];
  }
  const double temperature = f.integrate(g) / static_cast<double>(d);
  return ReferenceDensity::gaussian(std::move(u), temperature);
}

}  // namespace divkit::info
