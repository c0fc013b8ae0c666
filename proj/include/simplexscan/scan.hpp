#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simplexscan/counting.hpp"
#include "simplexscan/dyadic.hpp"
#include "simplexscan/grid_set.hpp"

namespace simplexscan {

// Exact mollification/iteration schedule for a density floor delta in
// (0, 1/2] and constants C1 in (0,1], C2 >= 1, C3 >= 1:
//   epsilon = (C1 delta^kappa)^2 / (3 C3)^2
//   J       = floor((3 C2 C1^-1 epsilon^-(rho+1) delta^-kappa)^(2^n)) + 1
// computed in exact rational / big-integer arithmetic (J overflows 64-bit
// integers already in the smallest nontrivial cases).
struct Schedule {
  BigRational delta;
  BigRational C1, C2, C3;
  BigRational epsilon;
  BigInt J;
  std::uint64_t kappa = 0;
  std::uint64_t rho = 0;
  int n = 0;

  double epsilon_double() const;
  std::string J_string() const;
};

Schedule make_schedule(const BigRational& delta, const ProductShape& shape,
                       const BigRational& C1 = BigRational(1),
                       const BigRational& C2 = BigRational(1),
                       const BigRational& C3 = BigRational(1));

// Exact decimal-to-rational parsing ("0.3" -> 3/10); accepts an optional
// sign, digits, and an optional fractional part.
BigRational rational_from_decimal(const std::string& text);

// One dilation of the scan: the raw-form estimate, the witnesses found among
// the estimate's own samples, and the detection flag (estimate above three
// standard errors, or at least one exact witness).
struct ScanPoint {
  double lambda = 0.0;
  FormEstimate estimate;
  std::vector<Witness> witnesses;
  bool detected = false;
};

struct ScanInterval {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  int first_index = 0;
  int last_index = 0;
};

struct ScanReport {
  std::vector<ScanPoint> points;
  std::vector<ScanInterval> intervals;  // maximal runs of detected dilations
};

// Sweeps a geometric grid of dilations with common random numbers: each
// sample's unit-scale configuration draw is shared by every dilation, so the
// detected set varies smoothly across the grid.
ScanReport scan_lambda(const GridSet& A,
                       const std::vector<SimplexData>& simplices,
                       double lambda_min, double lambda_max, int grid_points,
                       std::uint64_t samples, RngStream stream,
                       int workers = default_workers(),
                       std::size_t max_witnesses_per_lambda = 4);

// Deterministic exhaustive search for one exact witness: a grid of base
// points (cell centers of base_grid per axis) crossed with Haar rotation
// draws, returning the first witness in (rotation, base point) order.
// Throws ScaleTooLarge when k+n > 4 or base_grid > 64.
std::optional<Witness> witness_oracle(const GridSet& A,
                                      const std::vector<SimplexData>& simplices,
                                      double lambda, int rotation_samples,
                                      int base_grid, RngStream stream);

}  // namespace simplexscan
