#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simplexscan/geometry.hpp"

namespace simplexscan {

// A measurable subset of the unit cube [0,1]^(k+n) stored as a union of
// grid cells at dyadic resolution.  Cells are indexed factor-by-factor in
// row-major order: the flat index of a cell is
//   sum_i partial_i * stride_i
// where partial_i is the row-major cell index inside factor i's block of
// k_i+1 axes, so per-factor partial indices can be combined cheaply in the
// counting kernels.
class GridSet {
 public:
  // cells may be empty (all false); resolution must be a power of two in
  // [2, 1024].
  GridSet(ProductShape shape, int resolution);

  static GridSet full(ProductShape shape, int resolution);
  // Axis-aligned corner box with density as close to delta as one cell
  // layer allows.
  static GridSet subcube(ProductShape shape, int resolution, double delta);
  // Independent cell flips with probability delta (counter-based stream).
  static GridSet random(ProductShape shape, int resolution, double delta,
                        std::uint64_t seed);
  // Cells whose center's squared norm lies within `width` of a multiple of
  // `period` (exploratory family with no product structure).
  static GridSet shell(ProductShape shape, int resolution, double width,
                       double period);
  // Explicit run-length-encoded cell list: runs of consecutive true flat
  // indices, each run a (start, length) pair.
  static GridSet explicit_runs(
      ProductShape shape, int resolution,
      const std::vector<std::pair<std::uint64_t, std::uint64_t>>& runs);

  // Point membership: false outside [0,1]^(k+n); boundary points on the
  // right/top faces belong to the last cell layer.
  bool membership(std::span<const double> point) const;

  // Partial flat index of factor i's block given that factor's k_i+1
  // coordinates, or -1 when the coordinates leave [0,1]^(k_i+1).
  std::int64_t factor_cell(int factor, const double* coords) const;
  bool cell_value(std::uint64_t flat) const { return cells_[flat] != 0; }
  std::uint64_t factor_stride(int factor) const { return strides_[factor]; }
  std::uint64_t factor_cells(int factor) const { return factor_cells_[factor]; }

  const ProductShape& shape() const { return shape_; }
  int resolution() const { return resolution_; }
  int dim() const { return shape_.domain_dim(); }
  std::uint64_t total_cells() const { return cells_.size(); }
  std::uint64_t true_count() const { return true_count_; }
  double density() const;

  void set_cell(std::uint64_t flat, bool value);
  // Exact union with another set over the same grid.
  GridSet set_union(const GridSet& other) const;
  bool is_subset_of(const GridSet& other) const;

  std::vector<std::pair<std::uint64_t, std::uint64_t>> to_runs() const;
  std::string to_rle_json() const;
  static GridSet from_rle_json(const std::string& text);

  const std::vector<std::uint8_t>& raw_cells() const { return cells_; }

 private:
  ProductShape shape_;
  int resolution_;
  std::vector<std::uint64_t> strides_;       // per factor
  std::vector<std::uint64_t> factor_cells_;  // resolution^(k_i+1) per factor
  std::vector<std::uint8_t> cells_;
  std::uint64_t true_count_ = 0;
};

}  // namespace simplexscan
