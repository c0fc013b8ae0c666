#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <vector>

#include "simplexscan/counting.hpp"
#include "simplexscan/grid_set.hpp"

namespace simplexscan {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// Dyadic scale index of a dilation: the unique positive integer m with
// lambda in (2^-m, 2^-(m-1)].
int dyadic_scale_index(double lambda);

// One dyadic cube's worth of the averaged-count chain, all in exact
// rational arithmetic.
struct CubeEntry {
  std::uint64_t cube_index = 0;
  BigRational average;         // mean of the indicator over the cube
  BigRational avg_pow_kappa;   // average^kappa
  BigRational config_integral; // averaged count of complete configurations
};

// Exact evaluation of the chain
//   2^{-m(k+n)} sum_Q I(Q)  >=  2^{-m(k+n)} sum_Q avg(Q)^kappa  >=  |A|^kappa
// where I(Q) is the normalized number of cell assignments whose full
// hypergraph of membership checks lands in A.  The per-cube inequality
// I(Q) >= avg(Q)^kappa holds cube by cube (with equality when n = 1).
struct JensenChain {
  int m = 0;              // dyadic scale index
  int cube_side = 0;      // cells per cube edge, resolution / 2^m
  BigRational lhs;        // averaged configuration count
  BigRational mid;        // averaged kappa-th powers
  BigRational rhs;        // |A|^kappa
  bool per_cube_ok = false;
  bool chain_ok = false;
  std::vector<CubeEntry> per_cube;
};

// Throws ResolutionTooCoarse when 2^m exceeds the grid resolution.
JensenChain jensen_chain(const GridSet& A, double lambda);

// Mollified-form estimate at full smoothing (eps = 1) together with the
// exact structural floor density^kappa it is compared against.
struct StructuredFloor {
  FormEstimate estimate;
  double floor = 0.0;
};

StructuredFloor structured_floor(const GridSet& A,
                                 const std::vector<SimplexData>& simplices,
                                 double lambda, std::uint64_t samples,
                                 RngStream stream,
                                 int workers = default_workers());

}  // namespace simplexscan
