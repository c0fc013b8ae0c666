#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "simplexscan/errors.hpp"
#include "simplexscan/geometry.hpp"
#include "simplexscan/rng.hpp"
#include "simplexscan/sampler.hpp"
#include "simplexscan/stats.hpp"

using namespace simplexscan;

namespace {

const std::vector<std::vector<double>> kEquilateral = {
    {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
const std::vector<std::vector<double>> kRightAngle = {{1.0, 0.0}, {0.0, 1.0}};

double max_abs_gram(const SimplexData& s) {
  double m = 0.0;
  for (double g : s.gram) m = std::max(m, std::fabs(g));
  return m;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("segment configurations live on the exact circle") {
  const SimplexData seg = validate_simplex({{1.0}});
  RngStream stream(3);
  const double lambda = 0.35;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const Configuration c = sample_configuration(seg, lambda, stream);
    REQUIRE(c.points.size() == 1);
    REQUIRE(c.points[0].size() == 2);
    const double r = std::hypot(c.points[0][0], c.points[0][1]);
    CHECK(std::fabs(r - lambda) <= 1e-14);
    sx += c.points[0][0];
    sy += c.points[0][1];
  }
  // Uniform angle: the mean offset vanishes like lambda/sqrt(2n).
  CHECK(std::fabs(sx / 20000.0) < 5.0 * lambda / std::sqrt(2.0 * 20000));
  CHECK(std::fabs(sy / 20000.0) < 5.0 * lambda / std::sqrt(2.0 * 20000));
}

TEST_CASE("both samplers satisfy the Gram law") {
  RngStream stream(7);
  for (const auto& verts :
       {std::vector<std::vector<double>>{{0.8}},
        kEquilateral,
        std::vector<std::vector<double>>{
            {0.9, 0.1, 0.0}, {0.2, 1.1, 0.3}, {-0.4, 0.2, 0.7}}}) {
    const SimplexData s = validate_simplex(verts);
    for (double lambda : {0.25, 1.0}) {
      const double tol = 1e-9 * lambda * lambda * max_abs_gram(s);
      double worst_iter = 0.0, worst_rot = 0.0;
      for (int i = 0; i < 2000; ++i) {
        const Configuration a = sample_configuration(s, lambda, stream);
        const Configuration b = sample_rotation_oracle(s, lambda, stream);
        worst_iter = std::max(worst_iter, gram_residual(a, s));
        worst_rot = std::max(worst_rot, gram_residual(b, s));
      }
      CHECK(worst_iter <= tol);
      CHECK(worst_rot <= tol);
    }
  }
}

TEST_CASE("vertex order does not break the construction") {
  const SimplexData s = validate_simplex(
      {{0.5, std::sqrt(3.0) / 2.0}, {1.0, 0.0}});  // swapped equilateral
  RngStream stream(11);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i)
    worst = std::max(worst,
                     gram_residual(sample_configuration(s, 0.6, stream), s));
  CHECK(worst <= 1e-9 * 0.36 * max_abs_gram(s));
}

TEST_CASE("iterated and rotation samplers agree in distribution") {
  const std::size_t N = 6000;
  for (const auto& verts : {kEquilateral, kRightAngle}) {
    const SimplexData s = validate_simplex(verts);
    RngStream a(101), b(202);
    std::vector<double> stat1_a, stat1_b, stat2_a, stat2_b;
    for (std::size_t i = 0; i < N; ++i) {
      const Configuration ca = sample_configuration(s, 0.8, a);
      const Configuration cb = sample_rotation_oracle(s, 0.8, b);
      auto stats = [](const Configuration& c, std::vector<double>& s1,
                      std::vector<double>& s2) {
        const auto& y1 = c.points[0];
        const auto& y2 = c.points[1];
        const double n1 = std::sqrt(dot(y1, y1));
        s1.push_back(y1[0] / n1);
        const double proj = dot(y2, y1) / (n1 * n1);
        s2.push_back(y2[0] - proj * y1[0]);
      };
      stats(ca, stat1_a, stat2_a);
      stats(cb, stat1_b, stat2_b);
    }
    const double crit = ks_critical_value(0.01, N, N);
    CHECK(ks_statistic(stat1_a, stat1_b) < crit);
    CHECK(ks_statistic(stat2_a, stat2_b) < crit);
  }
}

TEST_CASE("mollification adds Gaussian noise of width eps*lambda") {
  const SimplexData s = validate_simplex(kEquilateral);
  RngStream stream(13);
  const double lambda = 0.5, eps = 0.2;
  const double want_var =
      (eps * lambda) * (eps * lambda) / (2.0 * std::numbers::pi);
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  for (int i = 0; i < 20000; ++i) {
    const Configuration c = sample_configuration(s, lambda, stream);
    const MollifiedConfiguration m = mollify(c, eps, stream);
    for (std::size_t r = 0; r < c.points.size(); ++r)
      for (std::size_t a = 0; a < c.points[r].size(); ++a) {
        const double w = m.perturbed_points[r][a] - c.points[r][a];
        sum += w;
        sumsq += w * w;
        ++n;
      }
  }
  const double mean = sum / double(n);
  const double var = sumsq / double(n) - mean * mean;
  CHECK(std::fabs(mean) < 5.0 * std::sqrt(want_var / double(n)));
  CHECK(var == doctest::Approx(want_var).epsilon(0.05));
}

TEST_CASE("Haar rotations are orthogonal with determinant one") {
  RngStream stream(17);
  for (int d : {2, 3, 4}) {
    for (int rep = 0; rep < 20; ++rep) {
      const std::vector<double> R = haar_rotation(d, stream);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double e = 0.0;
          for (int a = 0; a < d; ++a)
            e += R[std::size_t(i) * d + a] * R[std::size_t(j) * d + a];
          CHECK(std::fabs(e - (i == j ? 1.0 : 0.0)) < 1e-12);
        }
      CHECK(lu_determinant(R, d) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("degenerate priors are rejected") {
  CHECK_THROWS_AS(
      orthogonal_complement({{1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}}, 3),
      DegeneratePrior);
  const auto basis = orthogonal_complement({{1.0, 0.0, 0.0}}, 3);
  REQUIRE(basis.size() == 2);
  for (const auto& q : basis) {
    CHECK(std::fabs(q[0]) < 1e-12);
    CHECK(std::fabs(dot(q, q) - 1.0) < 1e-12);
  }
}

}  // TEST_SUITE
