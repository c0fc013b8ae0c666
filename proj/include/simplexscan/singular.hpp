#pragma once

#include <cstdint>
#include <vector>

#include "simplexscan/counting.hpp"
#include "simplexscan/grid_set.hpp"
#include "simplexscan/parallel.hpp"
#include "simplexscan/rng.hpp"
#include "simplexscan/stats.hpp"

namespace simplexscan {

// Parameters of the smoothed multilinear forms built from the Gaussian
// profile g(x) = exp(-pi |x|^2):
//
//   Xi_{L,a,alpha}      the fully smoothed form: base points on the cube,
//                       vertex-slot displacements Gaussian at width
//                       a*alpha_i^r.
//   Theta^{(v)}         minus the log-scale integral over s in [a,b] of the
//                       same integrand with the Gaussian on one vertex slot
//                       of factor v replaced by the Laplacian kernel
//                       (Delta g), summed over that factor's slots.
//   Theta~^{(v,w,m)}    the absolute-value majorant of one (v,w) slot with
//                       the m-th derivative kernel split across an auxiliary
//                       convolution point, with averaging profile phi either
//                       g or |d_m g|.
//
// L holds the per-factor slot counts (1 <= l_i <= k_i); alpha[i] holds
// l_i + 1 width multipliers for slots 0..l_i (slot 0 is only used as the phi
// width of the majorant form); all multipliers must be >= 1.  The scale
// window must satisfy b >= 2a > 0.  w and m are 1-based.
struct ThetaSpec {
  int v = 0;
  std::vector<int> L;
  double a = 0.0;
  double b = 0.0;
  std::vector<std::vector<double>> alpha;
  int w = 1;
  int m = 1;
  enum class Phi { Gauss, AbsPartial } phi = Phi::AbsPartial;
};

void validate_theta_spec(const ThetaSpec& spec, const ProductShape& shape,
                         bool tilde);

// Monte Carlo estimate of Theta^{(v)}: log-uniform scale draw, uniform base
// points, Gaussian slot displacements; the Laplacian kernel contributes the
// weight 4 pi^2 |G|^2 - 2 pi d per slot, where G is the standard draw (the
// scale cancels).
FormEstimate estimate_theta(const ThetaSpec& spec, const GridSet& A,
                            std::uint64_t samples, RngStream stream,
                            int workers = default_workers());

struct TildeEstimate {
  FormEstimate estimate;
  // Upward bias bound: the absolute value of the noisy inner integral
  // estimate biases the outer mean up by at most the mean inner standard
  // error (times the outer weights).
  double bias_bound = 0.0;
};

TildeEstimate estimate_theta_tilde(const ThetaSpec& spec, const GridSet& A,
                                   std::uint64_t samples, RngStream stream,
                                   int workers = default_workers(),
                                   int inner_samples = 64);

FormEstimate estimate_xi(const std::vector<int>& L, double a,
                         const std::vector<std::vector<double>>& alpha,
                         const GridSet& A, std::uint64_t samples,
                         RngStream stream, int workers = default_workers());

// Telescoping check: sum over factors z of Theta^{(z)} minus
// 2 pi (Xi_a - Xi_b), evaluated as a single residual integrand under fully
// shared randomness (same scale draw, base points, and standard normals for
// every term), so the residual's own standard error is the combined one.
struct TelescopingReport {
  double residual = 0.0;
  double std_err = 0.0;
  double theta_sum = 0.0;
  double xi_a = 0.0;
  double xi_b = 0.0;
  std::uint64_t samples = 0;
};

TelescopingReport check_telescoping(const std::vector<int>& L, double a,
                                    double b,
                                    const std::vector<std::vector<double>>& alpha,
                                    const GridSet& A, std::uint64_t samples,
                                    RngStream stream,
                                    int workers = default_workers());

// Heat-flow identity: (Delta g)_{t lambda} = 2 pi t d/dt g_{t lambda},
// checked at the given points with a central finite difference of step
// 1e-4 * t.  Returns the maximum error relative to the largest kernel
// magnitude over the point set.
double check_heat_identity(double t, double lambda, int dim,
                           const std::vector<std::vector<double>>& points);

// Scale-split bookkeeping for the derivative-kernel factorization at dyadic
// index j (lambda_j in (2^-j, 2^-(j-1)]): the small width s must lie in
// [2^-(j+5) t, 2^-(j+4) t], and then
//   r = sqrt(t^2 lambda_j^2 - s^2),  c = t^2 lambda_j^2 / (s r)
// recombine the two derivative kernels into the Laplacian kernel at width
// t lambda_j.  Throws BadWindow when s leaves the window.
struct ScaleSplit {
  int j = 0;
  double t = 0.0;
  double s = 0.0;
  double lambda_j = 0.0;
  double r = 0.0;
  double c = 0.0;

  ScaleSplit(double t, double s, double lambda_j);
};

// Residuals of the two convolution identities over a grid of offsets,
// each relative to the largest left-hand magnitude on the grid:
//   half-kernel:  -1/2 (Delta g)_{sqrt(2) s} = sum_m (d_m g)_s (*) (d_m g)_s
//                 (correlation form), and
//   split kernel: (Delta g)_{t lambda_j} = c sum_m (d_m g)_r * (d_m g)_s.
// Convolutions are evaluated by dense tensor quadrature in dims 1-2 and by
// the Gaussian closed-form composition in higher dims.
struct ConvIdentityReport {
  double khh_residual = 0.0;
  double gkh_residual = 0.0;
};

ConvIdentityReport check_conv_identities(
    double s, double t, double lambda_j, int dim,
    const std::vector<std::vector<double>>& offsets);

// Aggregated mollification-error growth: for each dyadic index j the paired
// difference |N^eps - N^1| at lambda_j = 1.5 * 2^-j under common random
// numbers, and the partial sums over j <= J for each requested J, with a
// log-log fit of sum against J restricted to sums above 3 sigma.
struct GrowthRow {
  int j = 0;
  double lambda = 0.0;
  double n_eps = 0.0;
  double n_one = 0.0;
  double abs_diff = 0.0;
  double std_err = 0.0;
};

struct GrowthSum {
  int J = 0;
  double sum = 0.0;
  double sigma = 0.0;
};

struct GrowthReport {
  std::vector<GrowthRow> rows;
  std::vector<GrowthSum> sums;
  LoglogFit fit;
};

GrowthReport growth_probe(const GridSet& A,
                          const std::vector<SimplexData>& simplices,
                          double epsilon, const std::vector<int>& J_list,
                          std::uint64_t samples, RngStream stream,
                          int workers = default_workers());

}  // namespace simplexscan
