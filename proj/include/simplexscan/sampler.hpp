#pragma once

#include <vector>

#include "simplexscan/geometry.hpp"
#include "simplexscan/rng.hpp"

namespace simplexscan {

// One draw from the spherical configuration measure of a simplex at dilation
// lambda: points y^1..y^k in R^(k+1) with pairwise inner products
// y^l . y^m = lambda^2 v^l . v^m.
struct Configuration {
  std::vector<std::vector<double>> points;
  double lambda = 0.0;
  enum class Source { IteratedSphere, HaarRotation } source =
      Source::IteratedSphere;
};

// Configuration after convolving the measure with the Gaussian profile at
// width eps*lambda: perturbed = y^j + w^j with w^j per-coordinate noise of
// standard deviation eps*lambda/sqrt(2 pi).
struct MollifiedConfiguration {
  Configuration base;
  std::vector<std::vector<double>> perturbed_points;
  double eps = 0.0;
};

// Step j of the iterated construction: a uniform point on the sphere of
// radius lambda*|v^j|*rho_j centered at lambda*|v^j|*sum_m beta_{j,m} *
// prior[m]/|prior[m]|, inside the affine plane through that center
// orthogonal to span{prior points}.  prior holds y^1..y^(j-1).
// Throws DegeneratePrior when the prior points are numerically dependent.
std::vector<double> sample_conditional_sphere(
    const SimplexData& simplex, double lambda,
    const std::vector<std::vector<double>>& prior, RngStream& stream);

// Full configuration by iterating the conditional-sphere step.
Configuration sample_configuration(const SimplexData& simplex, double lambda,
                                   RngStream& stream);

// Reference sampler: y^j = lambda * R * (v^j, 0) for a Haar-distributed
// rotation R in SO(k+1), drawn by QR of a Gaussian matrix with diagonal-sign
// correction and a determinant fix-up.
Configuration sample_rotation_oracle(const SimplexData& simplex, double lambda,
                                     RngStream& stream);

MollifiedConfiguration mollify(const Configuration& config, double eps,
                               RngStream& stream);

// Largest |y^l . y^m - lambda^2 v^l . v^m| over all pairs.
double gram_residual(const Configuration& config, const SimplexData& simplex);

// Haar-distributed rotation matrix in SO(d), row-major.
std::vector<double> haar_rotation(int d, RngStream& stream);

// Orthonormal basis (as rows) of the orthogonal complement of the span of
// the given vectors in R^d, built from the Householder QR of the column
// matrix of the vectors.  Throws DegeneratePrior if the vectors are
// numerically dependent (pivot below 1e-10 relative scale).
std::vector<std::vector<double>> orthogonal_complement(
    const std::vector<std::vector<double>>& vectors, int d);

}  // namespace simplexscan
