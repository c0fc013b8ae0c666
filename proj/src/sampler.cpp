#include "simplexscan/sampler.hpp"

#include <cmath>

#include "simplexscan/errors.hpp"

namespace simplexscan {

namespace {

constexpr double kInvSqrtTwoPi = 0x1.9884533d43651p-2;  // 1/sqrt(2 pi)

// Householder QR of the d x p column matrix (columns = `cols`), in place.
// Returns the reflector vectors (each of length d, leading zeros implicit via
// the start offset = column index) and writes the R diagonal to rdiag.
std::vector<std::vector<double>> householder_qr(
    std::vector<std::vector<double>>& cols, int d,
    std::vector<double>* rdiag) {
  const int p = int(cols.size());
  double scale = 0.0;
  for (const auto& c : cols) scale = std::max(scale, norm(c));
  std::vector<std::vector<double>> reflectors;
  reflectors.reserve(p);
  for (int c = 0; c < p; ++c) {
    double xn = 0.0;
    for (int r = c; r < d; ++r) xn += cols[c][r] * cols[c][r];
    xn = std::sqrt(xn);
    if (xn <= 1e-10 * std::max(scale, 1e-300))
      throw DegeneratePrior("dependent directions in complement construction");
    const double sign = cols[c][c] >= 0.0 ? 1.0 : -1.0;
    const double alpha = -sign * xn;
    std::vector<double> v(d, 0.0);
    for (int r = c; r < d; ++r) v[r] = cols[c][r];
    v[c] -= alpha;
    const double vn = norm(v);
    if (vn > 0.0)
      for (double& t : v) t /= vn;
    for (int cc = c; cc < p; ++cc) {
      double proj = 0.0;
      for (int r = c; r < d; ++r) proj += v[r] * cols[cc][r];
      for (int r = c; r < d; ++r) cols[cc][r] -= 2.0 * proj * v[r];
    }
    if (rdiag) rdiag->push_back(alpha);
    reflectors.push_back(std::move(v));
  }
  return reflectors;
}

// Applies Q = H_1 ... H_p to e_index.
std::vector<double> q_column(const std::vector<std::vector<double>>& reflectors,
                             int d, int index) {
  std::vector<double> w(d, 0.0);
  w[index] = 1.0;
  for (int c = int(reflectors.size()) - 1; c >= 0; --c) {
    const auto& v = reflectors[c];
    double proj = 0.0;
    for (int r = c; r < d; ++r) proj += v[r] * w[r];
    for (int r = c; r < d; ++r) w[r] -= 2.0 * proj * v[r];
  }
  return w;
}

std::vector<double> unit_sphere_direction(int d, RngStream& stream) {
  std::vector<double> dir(d);
  double len = 0.0;
  do {
    len = 0.0;
    for (int i = 0; i < d; ++i) {
      dir[i] = stream.next_normal();
      len += dir[i] * dir[i];
    }
    len = std::sqrt(len);
  } while (len < 1e-12);
  for (double& t : dir) t /= len;
  return dir;
}

}  // namespace

std::vector<std::vector<double>> orthogonal_complement(
    const std::vector<std::vector<double>>& vectors, int d) {
  const int p = int(vectors.size());
  if (p >= d) throw DegeneratePrior("no orthogonal complement left");
  std::vector<std::vector<double>> cols = vectors;
  for (const auto& c : cols)
    if (int(c.size()) != d)
      throw DimensionMismatch("complement vectors must live in dimension d");
  auto reflectors = householder_qr(cols, d, nullptr);
  std::vector<std::vector<double>> basis;
  basis.reserve(d - p);
  for (int i = p; i < d; ++i) basis.push_back(q_column(reflectors, d, i));
  return basis;
}

std::vector<double> sample_conditional_sphere(
    const SimplexData& simplex, double lambda,
    const std::vector<std::vector<double>>& prior, RngStream& stream) {
  const int d = simplex.embedded_dim;
  const int j = int(prior.size());  // 0-based step index
  if (j >= simplex.k)
    throw DimensionMismatch("conditional step index exceeds simplex size");
  for (const auto& x : prior)
    if (int(x.size()) != d)
      throw DimensionMismatch("prior point dimension must be k+1");

  const double vlen = norm(simplex.vertices[j]);
  const double radius = lambda * vlen * simplex.residual_radii[j];

  std::vector<double> point(d, 0.0);
  if (j == 0) {
    // First step: plain sphere of radius lambda*|v^1| about the origin.
    const auto dir = unit_sphere_direction(d, stream);
    for (int t = 0; t < d; ++t) point[t] = radius * dir[t];
    return point;
  }

  for (int m = 0; m < j; ++m) {
    const double pn = norm(prior[m]);
    if (pn <= 1e-10) throw DegeneratePrior("prior point too close to the origin");
    const double c = lambda * vlen * simplex.beta[j][m] / pn;
    for (int t = 0; t < d; ++t) point[t] += c * prior[m][t];
  }

  const auto basis = orthogonal_complement(prior, d);
  const auto dir = unit_sphere_direction(int(basis.size()), stream);
  for (std::size_t b = 0; b < basis.size(); ++b)
    for (int t = 0; t < d; ++t) point[t] += radius * dir[b] * basis[b][t];
  return point;
}

Configuration sample_configuration(const SimplexData& simplex, double lambda,
                                   RngStream& stream) {
  Configuration config;
  config.lambda = lambda;
  config.source = Configuration::Source::IteratedSphere;
  config.points.reserve(simplex.k);
  for (int j = 0; j < simplex.k; ++j)
    config.points.push_back(
        sample_conditional_sphere(simplex, lambda, config.points, stream));
  return config;
}

std::vector<double> haar_rotation(int d, RngStream& stream) {
  std::vector<std::vector<double>> cols(d, std::vector<double>(d));
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) cols[c][r] = stream.next_normal();
  std::vector<double> rdiag;
  auto reflectors = householder_qr(cols, d, &rdiag);
  std::vector<double> q(std::size_t(d) * d);
  for (int c = 0; c < d; ++c) {
    auto col = q_column(reflectors, d, c);
    const double sign = rdiag[c] >= 0.0 ? 1.0 : -1.0;
    for (int r = 0; r < d; ++r) q[r * d + c] = sign * col[r];
  }
  if (lu_determinant(q, d) < 0.0)
    for (int r = 0; r < d; ++r) q[r * d + (d - 1)] = -q[r * d + (d - 1)];
  return q;
}

Configuration sample_rotation_oracle(const SimplexData& simplex, double lambda,
                                     RngStream& stream) {
  const int d = simplex.embedded_dim;
  const auto rot = haar_rotation(d, stream);
  Configuration config;
  config.lambda = lambda;
  config.source = Configuration::Source::HaarRotation;
  config.points.resize(simplex.k, std::vector<double>(d, 0.0));
  for (int j = 0; j < simplex.k; ++j)
    for (int r = 0; r < d; ++r) {
      double s = 0.0;
      // embedded vertex (v^j, 0): last rotation column never contributes
      for (int c = 0; c < d - 1; ++c) s += rot[r * d + c] * simplex.vertices[j][c];
      config.points[j][r] = lambda * s;
    }
  return config;
}

MollifiedConfiguration mollify(const Configuration& config, double eps,
                               RngStream& stream) {
  if (eps < 0.0) throw BadScale("mollification width must be nonnegative");
  MollifiedConfiguration m;
  m.base = config;
  m.eps = eps;
  const double std_dev = eps * config.lambda * kInvSqrtTwoPi;
  m.perturbed_points = config.points;
  for (auto& p : m.perturbed_points)
    for (double& t : p) t += std_dev * stream.next_normal();
  return m;
}

double gram_residual(const Configuration& config, const SimplexData& simplex) {
  double worst = 0.0;
  for (int l = 0; l < simplex.k; ++l)
    for (int m = 0; m < simplex.k; ++m) {
      const double target =
          config.lambda * config.lambda * simplex.gram_at(l, m);
      worst = std::max(
          worst, std::fabs(dot(config.points[l], config.points[m]) - target));
    }
  return worst;
}

}  // namespace simplexscan
