#include "divkit/grid_density.hpp"

#include <cmath>
#include <fstream>

#include "divkit/errors.hpp"
#include "divkit/parallel.hpp"

namespace divkit {

GridDensity::GridDensity(std::vector<double> origin, std::vector<double> spacing, std::vector<std::size_t> shape,
                         std::vector<double> values)
    : origin_(std::move(origin)), spacing_(std::move(spacing)), shape_(std::move(shape)), values_(std::move(values)) {
  const std::size_t d = shape_.size();
  if (d < 1 || d > 3) throw InvalidArgument("grid densities support 1 to 3 dimensions");
  if (origin_.size() != d || spacing_.size() != d) {
    throw InvalidArgument("grid origin, spacing and shape must have equal length");
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (!(spacing_[k] > 0.0) || !std::isfinite(spacing_[k])) throw InvalidArgument("grid spacing must be positive");
    if (!std::isfinite(origin_[k])) throw InvalidArgument("grid origin must be finite");
    if (shape_[k] < 3) throw InvalidArgument("grid needs at least 3 nodes per axis");
    total *= shape_[k];
  }
  if (values_.size() != total) {
    throw InvalidArgument("grid has " + std::to_string(values_.size()) + " values, shape needs " +
                          std::to_string(total));
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("grid values must be finite and nonnegative");
  }
  raw_mass_ = integrate(values_);
  if (!(raw_mass_ > 0.0)) throw InvalidArgument("grid density has zero mass");
  for (double& v : values_) v /= raw_mass_;
}

GridDensity GridDensity::sample(const ReferenceDensity& ref, std::vector<double> origin, std::vector<double> spacing,
                                std::vector<std::size_t> shape) {
  if (ref.dim() != shape.size()) throw DimensionMismatch("reference density and grid differ in dimension");
  std::size_t total = 1;
  for (auto s : shape) total *= s;
  std::vector<double> values(total);
  const std::size_t d = shape.size();
  std::array<double, 3> x{};
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    for (std::size_t k = d; k-- > 0;) {
      x[k] = origin[k] + spacing[k] * static_cast<double>(rem % shape[k]);
      rem /= shape[k];
    }
    values[f] = ref.pdf(std::span<const double>(x.data(), d));
  }
  return GridDensity(std::move(origin), std::move(spacing), std::move(shape), std::move(values));
}

GridDensity GridDensity::sample_box(const ReferenceDensity& ref, double half_width, std::size_t nodes) {
  const std::size_t d = ref.dim();
  const double h = 2.0 * half_width / static_cast<double>(nodes - 1);
  return sample(ref, std::vector<double>(d, -half_width), std::vector<double>(d, h), std::vector<std::size_t>(d, nodes));
}

std::array<std::size_t, 3> GridDensity::index(std::size_t flat) const noexcept {
  std::array<std::size_t, 3> idx{};
  for (std::size_t k = dim(); k-- > 0;) {
    idx[k] = flat % shape_[k];
    flat /= shape_[k];
  }
  return idx;
}

std::size_t GridDensity::flat(const std::array<std::size_t, 3>& idx) const noexcept {
  std::size_t f = 0;
  for (std::size_t k = 0; k < dim(); ++k) f = f * shape_[k] + idx[k];
  return f;
}

std::size_t GridDensity::stride(std::size_t k) const noexcept {
  std::size_t s = 1;
  for (std::size_t j = k + 1; j < dim(); ++j) s *= shape_[j];
  return s;
}

double GridDensity::coordinate(std::size_t flat_index, std::size_t k) const noexcept {
  return origin_[k] + spacing_[k] * static_cast<double>(index(flat_index)[k]);
}

double GridDensity::integrate(const std::vector<double>& g) const {
  return integrate_region(*this, g, cropped_box(*this, 0, 1), 1);
}

bool GridDensity::same_geometry(const GridDensity& other) const {
  return shape_ == other.shape_ && origin_ == other.origin_ && spacing_ == other.spacing_;
}

IndexBox cropped_box(const GridDensity& grid, std::size_t crop, std::size_t stride) {
  IndexBox box;
  for (std::size_t k = 0; k < grid.dim(); ++k) {
    const std::size_t n = grid.shape()[k];
    if (n < 2 * crop + stride + 1) throw InvalidArgument("grid too small for the requested sub-lattice");
    box.lo[k] = crop;
    box.hi[k] = crop + ((n - 1 - 2 * crop) / stride) * stride;
  }
  return box;
}

double integrate_region(const GridDensity& grid, const std::vector<double>& g, const IndexBox& box,
                        std::size_t stride) {
  const std::size_t d = grid.dim();
  std::array<std::size_t, 3> count{1, 1, 1};
  double cell = 1.0;
  for (std::size_t k = 0; k < d; ++k) {
    if (box.hi[k] <= box.lo[k] || (box.hi[k] - box.lo[k]) % stride != 0 || box.hi[k] >= grid.shape()[k]) {
      throw InvalidArgument("invalid integration box");
    }
    count[k] = (box.hi[k] - box.lo[k]) / stride + 1;
    cell *= grid.spacing()[k] * static_cast<double>(stride);
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= count[k];
  return deterministic_sum(total, [&](std::size_t m) {
    std::array<std::size_t, 3> idx{};
    double w = cell;
    std::size_t rem = m;
    for (std::size_t k = d; k-- > 0;) {
      const std::size_t c = rem % count[k];
      rem /= count[k];
      if (c == 0 || c + 1 == count[k]) w *= 0.5;
      idx[k] = box.lo[k] + stride * c;
    }
    return w * g[grid.flat(idx)];
  });
}

GridDensity GridDensity::from_json(const nlohmann::json& j) {
  try {
    return GridDensity(j.at("origin").get<std::vector<double>>(), j.at("spacing").get<std::vector<double>>(),
                       j.at("shape").get<std::vector<std::size_t>>(), j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("grid JSON: ") + e.what());
  }
}

nlohmann::json GridDensity::to_json() const {
  return {{"origin", origin_}, {"spacing", spacing_}, {"shape", shape_}, {"values", values_}};
}

GridDensity GridDensity::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, std::string("grid JSON: ") + e.what());
  }
  return from_json(j);
}

void GridDensity::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << to_json().dump();
}

}  // namespace divkit
