#pragma once

#include <cstdint>
#include <vector>

namespace simplexscan {

// A nondegenerate simplex with one vertex at the origin, described by its k
// nonzero vertices v^1..v^k in R^k, plus everything the iterated-sphere
// sampler needs:
//   unit_dirs       u^j = v^j/|v^j|
//   beta[j]         coefficients of the projection of u^j onto
//                   span{u^1..u^{j-1}} expressed in the u-basis (j-1 entries)
//   residual_radii  rho_j = dist(u^j, span{u^1..u^{j-1}}), rho_1 = 1
//   gram            k x k row-major matrix of v^l . v^m
//   diameter        largest pairwise distance over {0, v^1..v^k}
//   embedded_dim    k+1, the ambient dimension configurations live in
struct SimplexData {
  int k = 0;
  std::vector<std::vector<double>> vertices;
  std::vector<double> gram;
  std::vector<std::vector<double>> unit_dirs;
  std::vector<std::vector<double>> beta;
  std::vector<double> residual_radii;
  double diameter = 0.0;
  int embedded_dim = 0;

  double gram_at(int l, int m) const { return gram[std::size_t(l) * k + m]; }
};

// Validates the vertex list and precomputes the derived quantities.
// Throws DimensionMismatch if any vertex is not k-dimensional and
// DegenerateSimplex if the Gram determinant is at most 1e-10 * scale^(2k)
// with scale = max |v^j|.
SimplexData validate_simplex(const std::vector<std::vector<double>>& vertices);

// Shape of a product of simplices: per-factor vertex counts K = (k_1..k_n)
// and the derived combinatorial constants.
struct ProductShape {
  std::vector<int> K;
  int n = 0;                       // number of factors
  int k = 0;                       // sum of k_i
  std::vector<int> factor_dims;    // k_i + 1, the per-factor block dimension
  std::uint64_t kappa = 1;         // prod (k_i + 1): points per configuration
  std::uint64_t rho = 0;           // sum k_i (k_i + 2)
  std::uint64_t ambient_dim = 0;   // sum (k_i + 1)^2

  int domain_dim() const { return k + n; }  // dimension of the base domain
};

ProductShape product_shape(const std::vector<int>& K);
ProductShape product_shape(const std::vector<SimplexData>& simplices);

// --------- small dense linear algebra helpers (row-major) ---------

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm(const std::vector<double>& a);

// Determinant by LU with partial pivoting; matrix is n x n row-major and is
// consumed by the elimination.
double lu_determinant(std::vector<double> m, int n);

// Solves the SPD system G x = b in place via Cholesky; G is n x n row-major.
std::vector<double> spd_solve(std::vector<double> g, std::vector<double> b,
                              int n);

}  // namespace simplexscan
