#include "simplexscan/geometry.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "simplexscan/errors.hpp"

namespace simplexscan {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double lu_determinant(std::vector<double> m, int n) {
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(m[r * n + c]) > std::fabs(m[piv * n + c])) piv = r;
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(m[c * n + j], m[piv * n + j]);
      det = -det;
    }
    const double p = m[c * n + c];
    if (p == 0.0) return 0.0;
    det *= p;
    for (int r = c + 1; r < n; ++r) {
      const double f = m[r * n + c] / p;
      for (int j = c; j < n; ++j) m[r * n + j] -= f * m[c * n + j];
    }
  }
  return det;
}

std::vector<double> spd_solve(std::vector<double> g, std::vector<double> b,
                              int n) {
  // Cholesky G = L L^T, stored in the lower triangle of g.
  for (int c = 0; c < n; ++c) {
    for (int r = c; r < n; ++r) {
      double s = g[r * n + c];
      for (int j = 0; j < c; ++j) s -= g[r * n + j] * g[c * n + j];
      if (r == c) {
        if (s <= 0.0) throw DegenerateSimplex("Gram matrix not positive definite");
        g[c * n + c] = std::sqrt(s);
      } else {
        g[r * n + c] = s / g[c * n + c];
      }
    }
  }
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < r; ++j) b[r] -= g[r * n + j] * b[j];
    b[r] /= g[r * n + r];
  }
  for (int r = n - 1; r >= 0; --r) {
    for (int j = r + 1; j < n; ++j) b[r] -= g[j * n + r] * b[j];
    b[r] /= g[r * n + r];
  }
  return b;
}

SimplexData validate_simplex(const std::vector<std::vector<double>>& vertices) {
  const int k = int(vertices.size());
  if (k < 1) throw DimensionMismatch("simplex needs at least one nonzero vertex");
  for (const auto& v : vertices)
    if (int(v.size()) != k)
      throw DimensionMismatch("vertex dimension " + std::to_string(v.size()) +
                              " does not match vertex count " +
                              std::to_string(k));

  SimplexData s;
  s.k = k;
  s.embedded_dim = k + 1;
  s.vertices = vertices;

  s.gram.assign(std::size_t(k) * k, 0.0);
  double scale = 0.0;
  for (int l = 0; l < k; ++l) {
    for (int m = 0; m < k; ++m) s.gram[l * k + m] = dot(vertices[l], vertices[m]);
    scale = std::max(scale, std::sqrt(s.gram[l * k + l]));
  }
  if (scale == 0.0) throw DegenerateSimplex("all vertices at the origin");

  const double det = lu_determinant(s.gram, k);
  double threshold = 1e-10;
  for (int i = 0; i < 2 * k; ++i) threshold *= scale;
  if (det <= threshold)
    throw DegenerateSimplex("Gram determinant " + std::to_string(det) +
                            " at or below degeneracy threshold");

  s.unit_dirs.resize(k);
  for (int j = 0; j < k; ++j) {
    const double len = norm(vertices[j]);
    s.unit_dirs[j].resize(k);
    for (int c = 0; c < k; ++c) s.unit_dirs[j][c] = vertices[j][c] / len;
  }

  // Orthonormalize the unit directions (modified Gram-Schmidt with one
  // re-orthogonalization pass) to get the residual distances rho_j, then
  // solve the normal equations in the u-basis for the projection
  // coefficients beta_{j,m}.
  s.residual_radii.resize(k);
  s.beta.resize(k);
  std::vector<std::vector<double>> ortho;  // orthonormal basis of the spans
  for (int j = 0; j < k; ++j) {
    std::vector<double> w = s.unit_dirs[j];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : ortho) {
        const double c = dot(w, e);
        for (int t = 0; t < k; ++t) w[t] -= c * e[t];
      }
    const double r = norm(w);
    s.residual_radii[j] = (j == 0) ? 1.0 : r;
    if (j > 0) {
      // Unit-direction Gram of u^1..u^j restricted to the first j entries.
      std::vector<double> ug(std::size_t(j) * j), rhs(j);
      for (int a = 0; a < j; ++a) {
        for (int b = 0; b < j; ++b)
          ug[a * j + b] = dot(s.unit_dirs[a], s.unit_dirs[b]);
        rhs[a] = dot(s.unit_dirs[j], s.unit_dirs[a]);
      }
      s.beta[j] = spd_solve(std::move(ug), std::move(rhs), j);
    }
    if (r > 1e-14) {
      for (int t = 0; t < k; ++t) w[t] /= r;
      ortho.push_back(std::move(w));
    }
  }

  s.diameter = 0.0;
  for (int l = 0; l < k; ++l) {
    s.diameter = std::max(s.diameter, norm(vertices[l]));
    for (int m = l + 1; m < k; ++m) {
      double d2 = 0.0;
      for (int c = 0; c < k; ++c) {
        const double d = vertices[l][c] - vertices[m][c];
        d2 += d * d;
      }
      s.diameter = std::max(s.diameter, std::sqrt(d2));
    }
  }
  return s;
}

ProductShape product_shape(const std::vector<int>& K) {
  if (K.empty()) throw DimensionMismatch("product shape needs at least one factor");
  ProductShape p;
  p.K = K;
  p.n = int(K.size());
  for (int ki : K) {
    if (ki < 1) throw DimensionMismatch("factor vertex count must be >= 1");
    p.k += ki;
    p.factor_dims.push_back(ki + 1);
    p.kappa *= std::uint64_t(ki + 1);
    p.rho += std::uint64_t(ki) * std::uint64_t(ki + 2);
    p.ambient_dim += std::uint64_t(ki + 1) * std::uint64_t(ki + 1);
  }
  return p;
}

ProductShape product_shape(const std::vector<SimplexData>& simplices) {
  std::vector<int> K;
  K.reserve(simplices.size());
  for (const auto& s : simplices) K.push_back(s.k);
  return product_shape(K);
}

}  // namespace simplexscan
