#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "simplexscan/errors.hpp"
#include "simplexscan/grid_set.hpp"
#include "simplexscan/rng.hpp"

using namespace simplexscan;

TEST_SUITE("grid_set") {

TEST_CASE("construction guards") {
  const ProductShape shape = product_shape(std::vector<int>{1});
  CHECK_THROWS_AS(GridSet(shape, 3), Error);     // not a power of two
  CHECK_THROWS_AS(GridSet(shape, 1), Error);     // too coarse
  CHECK_THROWS_AS(GridSet(shape, 2048), Error);  // beyond the cap
  // Grids above 2^28 cells are rejected: 6 axes at resolution 64.
  CHECK_THROWS_AS(GridSet(product_shape(std::vector<int>{2, 2}), 64), Error);
  CHECK_NOTHROW(GridSet(product_shape(std::vector<int>{2, 2}), 16));
}

TEST_CASE("full set membership and boundary convention") {
  const GridSet g = GridSet::full(product_shape(std::vector<int>{1}), 4);
  CHECK(g.density() == doctest::Approx(1.0));
  CHECK(g.true_count() == 16);
  const double in[] = {0.25, 0.75};
  const double corner[] = {1.0, 1.0};  // top faces belong to the last cells
  const double out1[] = {-0.001, 0.5};
  const double out2[] = {0.5, 1.0001};
  CHECK(g.membership(in));
  CHECK(g.membership(corner));
  CHECK_FALSE(g.membership(out1));
  CHECK_FALSE(g.membership(out2));
}

TEST_CASE("corner subcube hits the closest one-layer density") {
  // delta = 1/4 on a 2-axis grid of resolution 2: exactly one cell per axis.
  const GridSet g =
      GridSet::subcube(product_shape(std::vector<int>{1}), 2, 0.25);
  CHECK(g.true_count() == 1);
  CHECK(g.density() == doctest::Approx(0.25));
  const double inside[] = {0.49, 0.49};
  const double outside[] = {0.5 + 1e-6, 0.25};
  CHECK(g.membership(inside));
  CHECK_FALSE(g.membership(outside));

  // Resolution 64, measure 0.3 on two axes: side round(64*sqrt(0.3)) = 35.
  const GridSet h =
      GridSet::subcube(product_shape(std::vector<int>{1}), 64, 0.3);
  CHECK(h.true_count() == 35ull * 35ull);
  CHECK(h.density() == doctest::Approx(35.0 * 35.0 / 4096.0));
  CHECK_THROWS_AS(
      GridSet::subcube(product_shape(std::vector<int>{1}), 64, 1.5),
      InfeasibleDensity);
}

TEST_CASE("random fill matches the requested density") {
  const ProductShape shape = product_shape(std::vector<int>{1});
  const GridSet g = GridSet::random(shape, 32, 0.3, 77);
  const double n = double(g.total_cells());
  const double sd = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::fabs(g.density() - 0.3) < 5.0 * sd);
  // Same seed, same set; different seed, different set.
  const GridSet h = GridSet::random(shape, 32, 0.3, 77);
  CHECK(g.raw_cells() == h.raw_cells());
  const GridSet k = GridSet::random(shape, 32, 0.3, 78);
  CHECK(g.raw_cells() != k.raw_cells());
}

TEST_CASE("factor cells compose into flat membership") {
  const ProductShape shape = product_shape(std::vector<int>{1, 1});
  const GridSet g = GridSet::random(shape, 4, 0.4, 5);
  RngStream stream(9);
  for (int rep = 0; rep < 2000; ++rep) {
    std::vector<double> p(4);
    for (double& c : p) c = 1.2 * stream.next_uniform() - 0.1;
    bool inside = true;
    for (double c : p) inside = inside && (c >= 0.0 && c <= 1.0);
    std::uint64_t flat = 0;
    bool composed = inside;
    if (inside) {
      const std::int64_t c0 = g.factor_cell(0, p.data());
      const std::int64_t c1 = g.factor_cell(1, p.data() + 2);
      REQUIRE(c0 >= 0);
      REQUIRE(c1 >= 0);
      flat = std::uint64_t(c0) * g.factor_stride(0) +
             std::uint64_t(c1) * g.factor_stride(1);
      composed = g.cell_value(flat);
    } else {
      // At least one factor must report the point outside.
      const bool out0 = g.factor_cell(0, p.data()) < 0;
      const bool out1 = g.factor_cell(1, p.data() + 2) < 0;
      CHECK((out0 || out1));
      composed = false;
    }
    CHECK(g.membership(p) == composed);
  }
}

TEST_CASE("set algebra") {
  const ProductShape shape = product_shape(std::vector<int>{1});
  const GridSet a = GridSet::random(shape, 8, 0.3, 1);
  const GridSet b = GridSet::random(shape, 8, 0.3, 2);
  const GridSet u = a.set_union(b);
  CHECK(a.is_subset_of(u));
  CHECK(b.is_subset_of(u));
  CHECK_FALSE(u.is_subset_of(a));
  for (std::uint64_t i = 0; i < u.total_cells(); ++i)
    CHECK(u.cell_value(i) == (a.cell_value(i) || b.cell_value(i)));
}

TEST_CASE("run-length round trip") {
  const ProductShape shape = product_shape(std::vector<int>{2});
  const GridSet g = GridSet::random(shape, 8, 0.25, 3);
  const auto runs = g.to_runs();
  std::uint64_t covered = 0;
  for (const auto& [start, len] : runs) {
    CHECK(len > 0);
    covered += len;
    CHECK(start + len <= g.total_cells());
  }
  CHECK(covered == g.true_count());

  const GridSet back = GridSet::from_rle_json(g.to_rle_json());
  CHECK(back.resolution() == g.resolution());
  CHECK(back.raw_cells() == g.raw_cells());

  const GridSet rebuilt = GridSet::explicit_runs(shape, 8, runs);
  CHECK(rebuilt.raw_cells() == g.raw_cells());
  CHECK_THROWS_AS(
      GridSet::explicit_runs(shape, 8, {{rebuilt.total_cells(), 2}}), Error);
}

TEST_CASE("shell family is nonempty and respects membership") {
  const ProductShape shape = product_shape(std::vector<int>{1});
  const GridSet g = GridSet::shell(shape, 16, 0.05, 0.25);
  CHECK(g.true_count() > 0);
  CHECK(g.true_count() < g.total_cells());
}

}  // TEST_SUITE
