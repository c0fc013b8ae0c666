#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "simplexscan/geometry.hpp"
#include "simplexscan/grid_set.hpp"
#include "simplexscan/parallel.hpp"
#include "simplexscan/rng.hpp"
#include "simplexscan/sampler.hpp"
#include "simplexscan/stats.hpp"

namespace simplexscan {

// A Monte Carlo estimate of one of the multilinear forms, with the seed of
// the stream that produced it.  The value is invariant under re-partitioning
// of samples across workers for a fixed seed.
struct FormEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

// The index set of the multilinear counting form: all maps h that pick, for
// each factor i, a vertex index h(i) in {0..l_i}.  Member tuples are stored
// flat, n entries per member, in odometer order.
struct HypergraphIndex {
  std::vector<int> L;
  int n = 0;
  std::vector<int> members;  // size() = count * n
  std::uint64_t count = 0;

  static HypergraphIndex over(const std::vector<int>& L);
  static HypergraphIndex full(const ProductShape& shape);  // l_i = k_i
  const int* member(std::uint64_t idx) const { return &members[idx * n]; }
};

// Exact witness of a detected configuration: base points x_i and simplex
// points y_i^r with all kappa membership checks true.
struct Witness {
  std::uint64_t sample_index = 0;
  double lambda = 0.0;
  std::vector<std::vector<double>> base;                   // per factor
  std::vector<std::vector<std::vector<double>>> offsets;   // per factor, per r
};

bool verify_witness(const GridSet& A, const std::vector<SimplexData>& simplices,
                    double lambda, const Witness& witness,
                    double gram_tol = 1e-9);

// Scale-free raw material for one sample of the counting form: uniform base
// points, configurations drawn at lambda = 1, and standard-normal noise for
// mollification.  The conditional-sphere construction is positively
// homogeneous in lambda (centers and radii are linear in it, direction draws
// are scale-free), so one unit-scale draw serves a whole grid of dilations
// under common random numbers.
class CountingKernel {
 public:
  CountingKernel(const GridSet& A, const std::vector<SimplexData>& simplices);

  struct Draw {
    std::vector<std::vector<double>> base;        // x_i^0, one per factor
    std::vector<Configuration> unit_configs;      // lambda = 1
    std::vector<std::vector<double>> noise;       // per factor, k_i*(k_i+1) normals
  };

  void draw(RngStream stream, Draw& out) const;
  // Product of the kappa membership indicators at dilation lambda and
  // mollification width eps (eps = 0 means the raw measure).
  bool indicator(const Draw& draw, double lambda, double eps) const;
  // Same, also materializing the witness payload.
  bool indicator_witness(const Draw& draw, double lambda, double eps,
                         Witness* witness) const;

  const GridSet& set() const { return *A_; }
  const std::vector<SimplexData>& simplices() const { return *simplices_; }
  const HypergraphIndex& index() const { return H_; }

 private:
  const GridSet* A_;
  const std::vector<SimplexData>* simplices_;
  HypergraphIndex H_;
  std::vector<std::uint64_t> starts_;  // offsets into the partial-index table
};

// Monte Carlo estimate of the counting form at dilation lambda: base points
// uniform on the unit cube (the h = 0 indicators localize them exactly),
// configuration points from the spherical measure, mollified by eps when
// eps > 0.  Throws BadScale unless lambda in (0,1] and eps in [0,1].
FormEstimate estimate_N(const GridSet& A,
                        const std::vector<SimplexData>& simplices,
                        double lambda, double eps, std::uint64_t samples,
                        RngStream stream, int workers = default_workers(),
                        std::vector<Witness>* witnesses = nullptr,
                        std::size_t max_witnesses = 8);

// Paired-difference estimates |N^0 - N^eps| for several widths under common
// random numbers: the same base points, configurations, and noise normals
// are reused for every eps, with the noise scaled by eps*lambda.
struct DecayPoint {
  double eps = 0.0;
  double abs_diff = 0.0;   // |mean(I_0 - I_eps)|
  double std_err = 0.0;    // standard error of the paired difference
};

struct DecayReport {
  std::vector<DecayPoint> points;
  FormEstimate base;  // the eps = 0 estimate
  LoglogFit fit;      // log-log fit over points with |diff| > 3 std_err
};

DecayReport check_uniform_decay(const GridSet& A,
                                const std::vector<SimplexData>& simplices,
                                double lambda,
                                const std::vector<double>& eps_list,
                                std::uint64_t samples, RngStream stream,
                                int workers = default_workers());

}  // namespace simplexscan
