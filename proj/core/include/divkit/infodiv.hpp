#pragma once

#include <variant>

#include "divkit/grid_density.hpp"
#include "divkit/quadrature.hpp"
#include "divkit/reference_density.hpp"
#include "divkit/report.hpp"

namespace divkit::info {

/// Either a tabulated or a closed-form density. Mixed pairs are evaluated on the grid.
using Density = std::variant<GridDensity, ReferenceDensity>;

/// -int f log f. Grid densities use the trapezoid rule; the error is a Richardson estimate
/// (fine vs every-other-node lattice) plus the boundary layer of the integrand.
quad::Estimate entropy_estimate(const Density& f);
double entropy(const Density& f);

/// int f log(f / g), clamped to 0 inside [-1e-10, 0).
DivergenceReport kl(const Density& f, const Density& g);

/// int |grad f|^2 / f with central differences on interior nodes (one-cell crop).
quad::Estimate fisher_estimate(const Density& f);
double fisher(const Density& f);

/// int |grad log f - grad log g|^2 f.
DivergenceReport relative_fisher(const Density& f, const Density& g);

/// Maxwellian with the same mean velocity and temperature as the grid density (unit mass).
ReferenceDensity maxwellian_match(const GridDensity& f);

}  // namespace divkit::info
