#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "simplexscan/counting.hpp"
#include "simplexscan/errors.hpp"

using namespace simplexscan;

namespace {

constexpr double kPi = std::numbers::pi;

// Overlap probability for a uniform base point and one planar offset of
// length lambda and uniform angle inside the unit square:
//   P(lambda) = 1 - (4/pi) lambda + lambda^2 / pi.
double square_overlap(double lambda) {
  return 1.0 - 4.0 * lambda / kPi + lambda * lambda / kPi;
}

// Simpson rule on [lo, hi] with an even number of panels.
template <class F>
double simpson(F f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i)
    acc += f(lo + i * h) * ((i % 2) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_SUITE("counting") {

TEST_CASE("hypergraph index enumerates vertex maps in odometer order") {
  const HypergraphIndex h = HypergraphIndex::over({1, 2});
  REQUIRE(h.count == 6);
  const int want[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}};
  for (std::uint64_t i = 0; i < 6; ++i) {
    CHECK(h.member(i)[0] == want[i][0]);
    CHECK(h.member(i)[1] == want[i][1]);
  }
  const ProductShape shape = product_shape(std::vector<int>{2, 1});
  CHECK(HypergraphIndex::full(shape).count == shape.kappa);
}

TEST_CASE("empty set counts zero, full set matches the overlap law") {
  const ProductShape shape = product_shape(std::vector<int>{1});
  const std::vector<SimplexData> segment = {validate_simplex({{1.0}})};

  const GridSet empty(shape, 8);
  const FormEstimate zero =
      estimate_N(empty, segment, 0.5, 0.0, 20000, RngStream(1));
  CHECK(zero.value == 0.0);
  CHECK(zero.std_err == 0.0);

  const GridSet full = GridSet::full(shape, 8);
  for (double lambda : {0.2, 0.6}) {
    const FormEstimate est =
        estimate_N(full, segment, lambda, 0.0, 200000, RngStream(2));
    const double want = square_overlap(lambda);
    CHECK(std::fabs(est.value - want) <=
          5.0 * est.std_err + 1e-12);
    CHECK(est.std_err < 2e-3);
  }
}

TEST_CASE("mollified full-cube estimate matches quadrature") {
  // Full cube, one segment factor: for a fixed angle the offset in each
  // coordinate is lambda*c + eps*lambda*w/sqrt(2pi) with w standard normal.
  // Base-point overlap integrates to prod (1-|offset|)_+, so the target is
  // a 1-d Gaussian integral per coordinate inside an angular average.
  const ProductShape shape = product_shape(std::vector<int>{1});
  const std::vector<SimplexData> segment = {validate_simplex({{1.0}})};
  const GridSet full = GridSet::full(shape, 8);
  const double lambda = 0.4, eps = 1.0;

  auto coord_factor = [&](double mean_offset) {
    const double sigma = eps * lambda / std::sqrt(2.0 * kPi);
    auto f = [&](double w) {
      const double z = mean_offset + sigma * w;
      const double overlap = std::max(0.0, 1.0 - std::fabs(z));
      return overlap * std::exp(-0.5 * w * w) / std::sqrt(2.0 * kPi);
    };
    return simpson(f, -8.0, 8.0, 512);
  };
  auto angle_term = [&](double theta) {
    return coord_factor(lambda * std::cos(theta)) *
           coord_factor(lambda * std::sin(theta));
  };
  const double want = simpson(angle_term, 0.0, 2.0 * kPi, 720) / (2.0 * kPi);

  const FormEstimate est =
      estimate_N(full, segment, lambda, eps, 300000, RngStream(5));
  CHECK(std::fabs(est.value - want) <= 5.0 * est.std_err);
}

TEST_CASE("scale guards") {
  const ProductShape shape = product_shape(std::vector<int>{1});
  const GridSet full = GridSet::full(shape, 4);
  const std::vector<SimplexData> segment = {validate_simplex({{1.0}})};
  CHECK_THROWS_AS(estimate_N(full, segment, 0.0, 0.0, 10, RngStream(1)),
                  BadScale);
  CHECK_THROWS_AS(estimate_N(full, segment, 1.5, 0.0, 10, RngStream(1)),
                  BadScale);
  CHECK_THROWS_AS(estimate_N(full, segment, 0.5, -0.1, 10, RngStream(1)),
                  BadScale);
  CHECK_THROWS_AS(estimate_N(full, segment, 0.5, 1.1, 10, RngStream(1)),
                  BadScale);
}

TEST_CASE("estimates are reproducible and worker-invariant") {
  const ProductShape shape = product_shape(std::vector<int>{1, 1});
  const GridSet A = GridSet::random(shape, 8, 0.45, 21);
  const std::vector<SimplexData> simplices = {validate_simplex({{1.0}}),
                                              validate_simplex({{0.7}})};
  const FormEstimate a =
      estimate_N(A, simplices, 0.3, 0.1, 50000, RngStream(9), 1);
  const FormEstimate b =
      estimate_N(A, simplices, 0.3, 0.1, 50000, RngStream(9), 4);
  CHECK(a.value == b.value);      // bitwise, not approximately
  CHECK(a.std_err == b.std_err);
  CHECK(a.value > 0.0);
}

TEST_CASE("witnesses verify and honor the cap") {
  const ProductShape shape = product_shape(std::vector<int>{1});
  const GridSet A = GridSet::subcube(shape, 16, 0.3);
  const std::vector<SimplexData> segment = {validate_simplex({{1.0}})};
  std::vector<Witness> witnesses;
  const FormEstimate est = estimate_N(A, segment, 0.25, 0.0, 40000,
                                      RngStream(33), 2, &witnesses, 5);
  CHECK(est.value > 0.0);
  REQUIRE(!witnesses.empty());
  CHECK(witnesses.size() <= 5);
  for (const Witness& w : witnesses) {
    CHECK(w.sample_index < 40000);
    CHECK(w.lambda == 0.25);
    CHECK(verify_witness(A, segment, 0.25, w));
    // Corrupt a coordinate: the membership or Gram check must fail.
    Witness broken = w;
    broken.offsets[0][0][0] += 0.1;
    CHECK_FALSE(verify_witness(A, segment, 0.25, broken));
  }
}

TEST_CASE("paired decay differences shrink with the width") {
  const ProductShape shape = product_shape(std::vector<int>{1});
  const GridSet A = GridSet::random(shape, 16, 0.3, 41);
  const std::vector<SimplexData> segment = {validate_simplex({{1.0}})};
  const DecayReport rep = check_uniform_decay(
      A, segment, 0.2, {0.4, 0.05}, 150000, RngStream(6));
  REQUIRE(rep.points.size() == 2);
  CHECK(rep.base.value > 0.0);
  // A 8x narrower mollifier perturbs the indicator far less.
  CHECK(rep.points[1].abs_diff < rep.points[0].abs_diff);
  CHECK(rep.points[0].std_err > 0.0);
}

}  // TEST_SUITE
