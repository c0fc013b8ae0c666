// Benchmark of the OpenMP Monte Carlo kernels against the serial reference
// path.  Both share the blocked summation tree, so beyond timing, the runs
// must agree bit for bit; the table reports times, speedup, and that check.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "simplexscan/counting.hpp"
#include "simplexscan/dyadic.hpp"
#include "simplexscan/geometry.hpp"
#include "simplexscan/grid_set.hpp"
#include "simplexscan/parallel.hpp"
#include "simplexscan/rng.hpp"
#include "simplexscan/scan.hpp"
#include "simplexscan/singular.hpp"

using namespace simplexscan;
using Clock = std::chrono::steady_clock;

namespace {

struct Row {
  std::string name;
  double serial_s = 0.0;
  double parallel_s = 0.0;
  bool identical = false;
};

template <class F>
double timed(F&& f) {
  const auto t0 = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t scale = 1;
  if (argc > 1) scale = std::strtoull(argv[1], nullptr, 10);
  if (scale < 1) scale = 1;
  const int workers = default_workers();
  std::printf("parallel workers: %d (serial reference: 1)\n", workers);
  std::printf("sample scale factor: %llu\n\n", (unsigned long long)scale);

  const SimplexData seg = validate_simplex({{1.0}});
  const SimplexData tri =
      validate_simplex({{1.0, 0.0}, {0.5, 0.8660254037844386}});
  std::vector<Row> rows;

  {  // counting form, two factors
    const GridSet A =
        GridSet::random(product_shape(std::vector<int>{1, 1}), 16, 0.4, 11);
    const std::vector<SimplexData> simplices = {seg, seg};
    const std::uint64_t n = 1000000 * scale;
    FormEstimate serial, parallel;
    Row r;
    r.name = "counting form (2 factors, mollified)";
    r.serial_s = timed([&] {
      serial = estimate_N(A, simplices, 0.35, 0.1, n, RngStream(1), 1);
    });
    r.parallel_s = timed([&] {
      parallel = estimate_N(A, simplices, 0.35, 0.1, n, RngStream(1), workers);
    });
    r.identical =
        serial.value == parallel.value && serial.std_err == parallel.std_err;
    rows.push_back(r);
  }

  {  // counting form, one triangle factor
    const GridSet A =
        GridSet::random(product_shape(std::vector<int>{2}), 32, 0.45, 12);
    const std::vector<SimplexData> simplices = {tri};
    const std::uint64_t n = 1000000 * scale;
    FormEstimate serial, parallel;
    Row r;
    r.name = "counting form (triangle factor)";
    r.serial_s = timed([&] {
      serial = estimate_N(A, simplices, 0.3, 0.0, n, RngStream(2), 1);
    });
    r.parallel_s = timed([&] {
      parallel = estimate_N(A, simplices, 0.3, 0.0, n, RngStream(2), workers);
    });
    r.identical =
        serial.value == parallel.value && serial.std_err == parallel.std_err;
    rows.push_back(r);
  }

  {  // dilation scan under common random numbers
    const GridSet A = GridSet::subcube(product_shape(std::vector<int>{1}), 32, 0.3);
    const std::vector<SimplexData> simplices = {seg};
    const std::uint64_t n = 400000 * scale;
    ScanReport serial, parallel;
    Row r;
    r.name = "dilation scan (8 grid points)";
    r.serial_s = timed([&] {
      serial = scan_lambda(A, simplices, 0.3, 0.8, 8, n, RngStream(3), 1);
    });
    r.parallel_s = timed([&] {
      parallel = scan_lambda(A, simplices, 0.3, 0.8, 8, n, RngStream(3), workers);
    });
    bool same = serial.points.size() == parallel.points.size();
    for (std::size_t i = 0; same && i < serial.points.size(); ++i)
      same = serial.points[i].estimate.value == parallel.points[i].estimate.value &&
             serial.points[i].detected == parallel.points[i].detected;
    r.identical = same;
    rows.push_back(r);
  }

  {  // telescoping residual with shared randomness
    const GridSet A =
        GridSet::random(product_shape(std::vector<int>{1, 1}), 8, 0.5, 13);
    const std::uint64_t n = 400000 * scale;
    const std::vector<std::vector<double>> alpha = {{1.0, 1.0}, {1.0, 1.0}};
    TelescopingReport serial, parallel;
    Row r;
    r.name = "telescoping residual";
    r.serial_s = timed([&] {
      serial = check_telescoping({1, 1}, 0.25, 0.5, alpha, A, n, RngStream(4), 1);
    });
    r.parallel_s = timed([&] {
      parallel =
          check_telescoping({1, 1}, 0.25, 0.5, alpha, A, n, RngStream(4), workers);
    });
    r.identical = serial.residual == parallel.residual &&
                  serial.std_err == parallel.std_err;
    rows.push_back(r);
  }

  std::printf("%-40s %10s %10s %8s %6s\n", "kernel", "serial s", "openmp s",
              "speedup", "match");
  bool all_identical = true;
  for (const Row& r : rows) {
    const double speedup = r.parallel_s > 0.0 ? r.serial_s / r.parallel_s : 0.0;
    std::printf("%-40s %10.3f %10.3f %8.2f %6s\n", r.name.c_str(), r.serial_s,
                r.parallel_s, speedup, r.identical ? "bit" : "DIFF");
    all_identical = all_identical && r.identical;
  }
  if (!all_identical) {
    std::printf("\nserial and OpenMP paths disagreed\n");
    return 1;
  }
  return 0;
}
