#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "divkit/reference_density.hpp"

namespace divkit {

/// Probability density tabulated on a regular 1-D to 3-D grid, values in row-major order
/// (last axis fastest). Normalized to unit trapezoidal mass on construction.
class GridDensity {
 public:
  GridDensity(std::vector<double> origin, std::vector<double> spacing, std::vector<std::size_t> shape,
              std::vector<double> values);

  /// Tabulates `ref` on the grid origin + spacing * index.
  static GridDensity sample(const ReferenceDensity& ref, std::vector<double> origin, std::vector<double> spacing,
                            std::vector<std::size_t> shape);
  /// Symmetric grid of `nodes` points per axis on [-half_width, half_width]^dim.
  static GridDensity sample_box(const ReferenceDensity& ref, double half_width, std::size_t nodes);

  static GridDensity from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static GridDensity load(const std::string& path);
  void save(const std::string& path) const;

  std::size_t dim() const noexcept { return shape_.size(); }
  const std::vector<double>& origin() const noexcept { return origin_; }
  const std::vector<double>& spacing() const noexcept { return spacing_; }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  /// Mass before normalization (trapezoidal).
  double raw_mass() const noexcept { return raw_mass_; }

  /// Multi-index of flat node `flat`.
  std::array<std::size_t, 3> index(std::size_t flat) const noexcept;
  std::size_t flat(const std::array<std::size_t, 3>& idx) const noexcept;
  /// Coordinate of node `flat` along axis k.
  double coordinate(std::size_t flat, std::size_t k) const noexcept;
  /// Flat-index step along axis k.
  std::size_t stride(std::size_t k) const noexcept;

  /// Trapezoidal integral of per-node values g (same layout as values()).
  double integrate(const std::vector<double>& g) const;

  bool same_geometry(const GridDensity& other) const;

 private:
  std::vector<double> origin_;
  std::vector<double> spacing_;
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
  double raw_mass_ = 0.0;
};

/// Index box [lo_k, hi_k] per axis; (hi_k - lo_k) must be a positive multiple of the stride.
struct IndexBox {
  std::array<std::size_t, 3> lo{};
  std::array<std::size_t, 3> hi{};
};

/// Trapezoidal integral of per-node values g over the nodes lo + stride * m inside `box`.
double integrate_region(const GridDensity& grid, const std::vector<double>& g, const IndexBox& box,
                        std::size_t stride);

/// Largest box obtained by dropping `crop` nodes at both ends of every axis and then trimming
/// the top so that the extent is a multiple of `stride`.
IndexBox cropped_box(const GridDensity& grid, std::size_t crop, std::size_t stride);

}  // namespace divkit
