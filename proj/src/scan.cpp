#include "simplexscan/scan.hpp"

#include <cctype>
#include <cmath>
#include <cstddef>

#include "simplexscan/errors.hpp"
#include "simplexscan/sampler.hpp"

namespace simplexscan {

namespace {

BigRational rat_pow(BigRational base, std::uint64_t e) {
  BigRational out(1);
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

}  // namespace

double Schedule::epsilon_double() const {
  return epsilon.convert_to<double>();
}

std::string Schedule::J_string() const { return J.str(); }

Schedule make_schedule(const BigRational& delta, const ProductShape& shape,
                       const BigRational& C1, const BigRational& C2,
                       const BigRational& C3) {
  if (!(delta > 0) || delta > BigRational(1, 2))
    throw BadDelta("density floor must lie in (0, 1/2]");
  if (!(C1 > 0) || C1 > 1) throw BadSpec("C1 must lie in (0, 1]");
  if (C2 < 1) throw BadSpec("C2 must be >= 1");
  if (C3 < 1) throw BadSpec("C3 must be >= 1");

  Schedule s;
  s.delta = delta;
  s.C1 = C1;
  s.C2 = C2;
  s.C3 = C3;
  s.kappa = shape.kappa;
  s.rho = shape.rho;
  s.n = shape.n;

  const BigRational delta_kappa = rat_pow(delta, s.kappa);
  const BigRational num = C1 * delta_kappa;
  const BigRational den = BigRational(3) * C3;
  s.epsilon = (num * num) / (den * den);

  const BigRational base = BigRational(3) * C2 / C1 *
                           rat_pow(BigRational(1) / s.epsilon, s.rho + 1) /
                           delta_kappa;
  const BigRational total = rat_pow(base, std::uint64_t(1) << unsigned(s.n));
  s.J = numerator(total) / denominator(total) + 1;
  return s;
}

BigRational rational_from_decimal(const std::string& text) {
  std::size_t lo = 0, hi = text.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(text[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(text[hi - 1])))
    --hi;
  std::size_t pos = lo;
  bool negative = false;
  if (pos < hi && (text[pos] == '+' || text[pos] == '-')) {
    negative = (text[pos] == '-');
    ++pos;
  }
  std::string digits;
  unsigned frac_digits = 0;
  bool seen_dot = false;
  for (; pos < hi; ++pos) {
    const char c = text[pos];
    if (c == '.') {
      if (seen_dot)
        throw ConfigError("not a decimal number: \"" + text + "\"");
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_dot) ++frac_digits;
    } else {
      throw ConfigError("not a decimal number: \"" + text + "\"");
    }
  }
  if (digits.empty())
    throw ConfigError("not a decimal number: \"" + text + "\"");
  // A leading zero would make the big-integer constructor read the digits as
  // octal; trim to the canonical decimal form first.
  const std::size_t first = digits.find_first_not_of('0');
  digits = (first == std::string::npos) ? "0" : digits.substr(first);
  const BigInt num(digits);
  const BigInt den = boost::multiprecision::pow(BigInt(10), frac_digits);
  BigRational q(num, den);
  if (negative) q = -q;
  return q;
}

ScanReport scan_lambda(const GridSet& A,
                       const std::vector<SimplexData>& simplices,
                       double lambda_min, double lambda_max, int grid_points,
                       std::uint64_t samples, RngStream stream, int workers,
                       std::size_t max_witnesses_per_lambda) {
  if (!(lambda_min > 0.0) || lambda_max > 1.0 || lambda_min > lambda_max)
    throw BadScale("dilation window must satisfy 0 < min <= max <= 1");
  if (grid_points < 1) throw BadSpec("scan needs at least one grid point");
  if (samples == 0) throw BadSpec("scan needs at least one sample");

  std::vector<double> lambdas(std::size_t(grid_points), 0.0);
  if (grid_points == 1) {
    lambdas[0] = lambda_min;
  } else {
    const double log_lo = std::log(lambda_min);
    const double log_hi = std::log(lambda_max);
    for (int g = 0; g < grid_points; ++g)
      lambdas[std::size_t(g)] =
          std::exp(log_lo + (log_hi - log_lo) * double(g) /
                                double(grid_points - 1));
    lambdas.front() = lambda_min;
    lambdas.back() = lambda_max;
  }

  CountingKernel kernel(A, simplices);
  RngStream op = stream.substream("scan.lambda");
  const std::size_t G = lambdas.size();

  auto acc = mc_accumulate(
      samples, G,
      [&](std::uint64_t i, double* out) {
        thread_local CountingKernel::Draw draw;
        kernel.draw(op.substream(i), draw);
        for (std::size_t g = 0; g < G; ++g)
          out[g] = kernel.indicator(draw, lambdas[g], 0.0) ? 1.0 : 0.0;
      },
      workers);

  ScanReport report;
  report.points.resize(G);
  std::size_t wanted_total = 0;
  std::vector<std::size_t> wanted(G, 0);
  for (std::size_t g = 0; g < G; ++g) {
    ScanPoint& p = report.points[g];
    p.lambda = lambdas[g];
    p.estimate.value = acc.mean(g);
    p.estimate.std_err = acc.std_err(g);
    p.estimate.samples = samples;
    p.estimate.seed = stream.key();
    if (p.estimate.value > 0.0) {
      wanted[g] = max_witnesses_per_lambda;
      wanted_total += wanted[g];
    }
  }

  // Deterministic witness pass: rescan the same substreams in sample order
  // and keep the first hits per dilation.  Every dilation with a positive
  // estimate had at least one hitting sample, so it gets a witness here.
  CountingKernel::Draw draw;
  Witness w;
  for (std::uint64_t i = 0; i < samples && wanted_total > 0; ++i) {
    kernel.draw(op.substream(i), draw);
    for (std::size_t g = 0; g < G; ++g) {
      if (wanted[g] == 0) continue;
      if (kernel.indicator_witness(draw, lambdas[g], 0.0, &w)) {
        w.sample_index = i;
        report.points[g].witnesses.push_back(w);
        --wanted[g];
        --wanted_total;
      }
    }
  }

  for (std::size_t g = 0; g < G; ++g) {
    ScanPoint& p = report.points[g];
    p.detected = (p.estimate.value > 3.0 * p.estimate.std_err) ||
                 !p.witnesses.empty();
  }

  for (std::size_t g = 0; g < G; ++g) {
    if (!report.points[g].detected) continue;
    std::size_t h = g;
    while (h + 1 < G && report.points[h + 1].detected) ++h;
    ScanInterval iv;
    iv.lambda_lo = report.points[g].lambda;
    iv.lambda_hi = report.points[h].lambda;
    iv.first_index = int(g);
    iv.last_index = int(h);
    report.intervals.push_back(iv);
    g = h;
  }
  return report;
}

std::optional<Witness> witness_oracle(const GridSet& A,
                                      const std::vector<SimplexData>& simplices,
                                      double lambda, int rotation_samples,
                                      int base_grid, RngStream stream) {
  const ProductShape& shape = A.shape();
  if (shape.domain_dim() > 4)
    throw ScaleTooLarge("witness oracle handles base dimension <= 4");
  if (base_grid > 64)
    throw ScaleTooLarge("witness oracle handles base grids up to 64");
  if (base_grid < 2) throw BadSpec("base grid must have at least 2 cells");
  if (rotation_samples < 1)
    throw BadSpec("witness oracle needs at least one rotation draw");
  if (!(lambda > 0.0) || lambda > 1.0)
    throw BadScale("dilation must lie in (0,1]");

  CountingKernel kernel(A, simplices);
  RngStream op = stream.substream("scan.witness_oracle");
  const int D = shape.domain_dim();
  std::uint64_t base_count = 1;
  for (int a = 0; a < D; ++a) base_count *= std::uint64_t(base_grid);

  CountingKernel::Draw draw;
  draw.base.resize(std::size_t(shape.n));
  draw.noise.resize(std::size_t(shape.n));
  draw.unit_configs.resize(std::size_t(shape.n));
  for (int i = 0; i < shape.n; ++i) {
    draw.base[std::size_t(i)].resize(std::size_t(shape.factor_dims[i]));
    draw.noise[std::size_t(i)].assign(
        std::size_t(shape.K[i]) * std::size_t(shape.factor_dims[i]), 0.0);
  }

  std::vector<int> idx(std::size_t(D), 0);
  Witness w;
  for (int rot = 0; rot < rotation_samples; ++rot) {
    RngStream rs = op.substream(std::uint64_t(rot));
    for (int i = 0; i < shape.n; ++i) {
      RngStream fs = rs.substream(std::uint64_t(i));
      draw.unit_configs[std::size_t(i)] =
          sample_rotation_oracle(simplices[std::size_t(i)], 1.0, fs);
    }
    std::fill(idx.begin(), idx.end(), 0);
    for (std::uint64_t b = 0; b < base_count; ++b) {
      int axis = 0;
      for (int i = 0; i < shape.n; ++i)
        for (int a = 0; a < shape.factor_dims[i]; ++a, ++axis)
          draw.base[std::size_t(i)][std::size_t(a)] =
              (double(idx[std::size_t(axis)]) + 0.5) / double(base_grid);
      if (kernel.indicator_witness(draw, lambda, 0.0, &w)) {
        w.sample_index = std::uint64_t(rot) * base_count + b;
        return w;
      }
      int pos = D - 1;
      while (pos >= 0 && ++idx[std::size_t(pos)] >= base_grid) {
        idx[std::size_t(pos)] = 0;
        --pos;
      }
    }
  }
  return std::nullopt;
}

}  // namespace simplexscan
