#include "simplexscan/singular.hpp"

#include <cmath>
#include <numbers>

#include "simplexscan/dyadic.hpp"
#include "simplexscan/errors.hpp"

namespace simplexscan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrtTwoPi = 0x1.9884533d43651p-2;

// Scaled profile g_u(x) = u^-d exp(-pi |x|^2 / u^2) in dimension d.
double profile(const std::vector<double>& x, double u, int d) {
  double n2 = 0.0;
  for (int i = 0; i < d; ++i) n2 += x[i] * x[i];
  return std::pow(u, -d) * std::exp(-kPi * n2 / (u * u));
}

// (Delta g)_u(x) = (4 pi^2 |x|^2 / u^2 - 2 pi d) g_u(x).
double laplacian_kernel(const std::vector<double>& x, double u, int d) {
  double n2 = 0.0;
  for (int i = 0; i < d; ++i) n2 += x[i] * x[i];
  return (4.0 * kPi * kPi * n2 / (u * u) - 2.0 * kPi * d) *
         std::pow(u, -d) * std::exp(-kPi * n2 / (u * u));
}

// Composite Simpson rule with n (even) intervals.
template <class F>
double simpson(F&& f, double lo, double hi, int n) {
  if (n % 2 == 1) ++n;
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// One-dimensional coordinate factors of the scaled derivative kernel
// (d_m g)_u: the m-th coordinate contributes -2 pi (x/u) e^{-pi (x/u)^2} / u
// and every other coordinate contributes e^{-pi (x/u)^2} / u.
double deriv_factor(double x, double u) {
  const double y = x / u;
  return -2.0 * kPi * y * std::exp(-kPi * y * y) / u;
}
double gauss_factor(double x, double u) {
  const double y = x / u;
  return std::exp(-kPi * y * y) / u;
}

// Evaluator of the product of indicators over a slot hypergraph: points are
// x_i^0 (slot 0) or x_i^0 + displacement (slots 1..l_i), reduced to partial
// cell indices per factor and combined through the member list.
struct SlotEval {
  const GridSet* A = nullptr;
  HypergraphIndex H;
  std::vector<std::size_t> starts;

  SlotEval(const GridSet& set, const std::vector<int>& L) : A(&set) {
    H = HypergraphIndex::over(L);
    starts.resize(L.size());
    std::size_t s = 0;
    for (std::size_t i = 0; i < L.size(); ++i) {
      starts[i] = s;
      s += std::size_t(L[i]) + 1;
    }
  }

  // partial[starts[i] + r] is the cell of factor i's slot-r point (< 0 when
  // outside the cube).
  bool eval(const std::vector<std::int64_t>& partial) const {
    const int n = H.n;
    for (std::uint64_t idx = 0; idx < H.count; ++idx) {
      const int* h = H.member(idx);
      std::uint64_t flat = 0;
      for (int i = 0; i < n; ++i) {
        const std::int64_t cell = partial[starts[i] + std::size_t(h[i])];
        if (cell < 0) return false;
        flat += std::uint64_t(cell) * A->factor_stride(i);
      }
      if (!A->cell_value(flat)) return false;
    }
    return true;
  }
};

// Standard draws for one sample: base points and per-slot standard normals,
// plus the log-uniform scale.  Displacements scale as width * G / sqrt(2 pi)
// per coordinate, so one draw serves every width under shared randomness.
struct SlotDraw {
  double s = 0.0;
  std::vector<std::vector<double>> base;    // per factor, d_i coords
  std::vector<std::vector<double>> slots;   // per factor, l_i * d_i normals
};

void draw_slots(const ProductShape& shape, const std::vector<int>& L,
                double a, double b, RngStream& stream, SlotDraw& out) {
  out.s = (b > a) ? a * std::pow(b / a, stream.next_uniform()) : a;
  out.base.resize(shape.n);
  out.slots.resize(shape.n);
  for (int i = 0; i < shape.n; ++i) {
    const int d = shape.factor_dims[i];
    out.base[i].resize(d);
    for (int c = 0; c < d; ++c) out.base[i][c] = stream.next_uniform();
    out.slots[i].resize(std::size_t(L[i]) * d);
    for (double& t : out.slots[i]) t = stream.next_normal();
  }
}

// Partial cell indices at scale `width_scale` (the slot displacement is
// width_scale * alpha_i^r * G / sqrt(2 pi)).
void fill_partial(const GridSet& A, const std::vector<int>& L,
                  const std::vector<std::vector<double>>& alpha,
                  const SlotDraw& draw, double width_scale,
                  std::vector<std::int64_t>& partial,
                  std::vector<double>& point) {
  const ProductShape& shape = A.shape();
  partial.clear();
  for (int i = 0; i < shape.n; ++i) {
    const int d = shape.factor_dims[i];
    partial.push_back(A.factor_cell(i, draw.base[i].data()));
    for (int r = 1; r <= L[i]; ++r) {
      const double u = width_scale * alpha[i][r] * kInvSqrtTwoPi;
      point.resize(d);
      for (int c = 0; c < d; ++c)
        point[c] = draw.base[i][c] + u * draw.slots[i][std::size_t(r - 1) * d + c];
      partial.push_back(A.factor_cell(i, point.data()));
    }
  }
}

}  // namespace

void validate_theta_spec(const ThetaSpec& spec, const ProductShape& shape,
                         bool tilde) {
  if (spec.v < 0 || spec.v >= shape.n)
    throw BadSpec("distinguished factor out of range");
  if (int(spec.L.size()) != shape.n)
    throw BadSpec("slot count list must have one entry per factor");
  for (int i = 0; i < shape.n; ++i)
    if (spec.L[i] < 1 || spec.L[i] > shape.K[i])
      throw BadSpec("slot counts must satisfy 1 <= l_i <= k_i");
  if (!(spec.a > 0.0) || !(spec.b >= 2.0 * spec.a))
    throw BadSpec("scale window must satisfy b >= 2a > 0");
  if (int(spec.alpha.size()) != shape.n)
    throw BadSpec("alpha must have one row per factor");
  for (int i = 0; i < shape.n; ++i) {
    if (int(spec.alpha[i].size()) != spec.L[i] + 1)
      throw BadSpec("alpha row i must have l_i + 1 entries");
    for (double aa : spec.alpha[i])
      if (aa < 1.0) throw BadSpec("alpha multipliers must be >= 1");
  }
  if (tilde) {
    if (spec.w < 1 || spec.w > spec.L[spec.v])
      throw BadSpec("majorant slot w out of range");
    if (spec.m < 1 || spec.m > shape.factor_dims[spec.v])
      throw BadSpec("majorant coordinate m out of range");
  }
}

FormEstimate estimate_theta(const ThetaSpec& spec, const GridSet& A,
                            std::uint64_t samples, RngStream stream,
                            int workers) {
  const ProductShape& shape = A.shape();
  validate_theta_spec(spec, shape, false);
  SlotEval eval(A, spec.L);
  RngStream op = stream.substream("singular.theta");
  const double logba = std::log(spec.b / spec.a);
  const int dv = shape.factor_dims[spec.v];

  auto acc = mc_accumulate(
      samples, 1,
      [&](std::uint64_t i, double* out) {
        thread_local SlotDraw draw;
        thread_local std::vector<std::int64_t> partial;
        thread_local std::vector<double> point;
        RngStream ss = op.substream(i);
        draw_slots(shape, spec.L, spec.a, spec.b, ss, draw);
        fill_partial(A, spec.L, spec.alpha, draw, draw.s, partial, point);
        if (!eval.eval(partial)) {
          out[0] = 0.0;
          return;
        }
        // Laplacian weight per slot of the distinguished factor: with the
        // displacement z = u G / sqrt(2 pi), the kernel ratio
        // 4 pi^2 |z|^2/u^2 - 2 pi d collapses to 2 pi (|G|^2 - d) — the
        // width cancels, and the weight is mean-zero under the draw.
        double weight = 0.0;
        for (int w = 1; w <= spec.L[spec.v]; ++w) {
          double g2 = 0.0;
          for (int c = 0; c < dv; ++c) {
            const double g = draw.slots[spec.v][std::size_t(w - 1) * dv + c];
            g2 += g * g;
          }
          weight += 2.0 * kPi * (g2 - dv);
        }
        out[0] = -logba * weight;
      },
      workers);

  FormEstimate est;
  est.value = acc.mean(0);
  est.std_err = acc.std_err(0);
  est.samples = samples;
  est.seed = stream.key();
  return est;
}

FormEstimate estimate_xi(const std::vector<int>& L, double a,
                         const std::vector<std::vector<double>>& alpha,
                         const GridSet& A, std::uint64_t samples,
                         RngStream stream, int workers) {
  const ProductShape& shape = A.shape();
  ThetaSpec proxy;
  proxy.v = 0;
  proxy.L = L;
  proxy.a = a;
  proxy.b = 2.0 * a;  // window irrelevant for the fixed-scale form
  proxy.alpha = alpha;
  validate_theta_spec(proxy, shape, false);
  SlotEval eval(A, L);
  RngStream op = stream.substream("singular.xi");

  auto acc = mc_accumulate(
      samples, 1,
      [&](std::uint64_t i, double* out) {
        thread_local SlotDraw draw;
        thread_local std::vector<std::int64_t> partial;
        thread_local std::vector<double> point;
        RngStream ss = op.substream(i);
        draw_slots(shape, L, a, a, ss, draw);
        fill_partial(A, L, alpha, draw, a, partial, point);
        out[0] = eval.eval(partial) ? 1.0 : 0.0;
      },
      workers);

  FormEstimate est;
  est.value = acc.mean(0);
  est.std_err = acc.std_err(0);
  est.samples = samples;
  est.seed = stream.key();
  return est;
}

TildeEstimate estimate_theta_tilde(const ThetaSpec& spec, const GridSet& A,
                                   std::uint64_t samples, RngStream stream,
                                   int workers, int inner_samples) {
  const ProductShape& shape = A.shape();
  validate_theta_spec(spec, shape, true);
  if (inner_samples < 2) throw BadSpec("inner budget must be at least 2");
  const int v = spec.v;
  const int w = spec.w;
  const int mc = spec.m - 1;  // 0-based coordinate
  const int dv = shape.factor_dims[v];
  const double logba = std::log(spec.b / spec.a);
  const double phi_mass = (spec.phi == ThetaSpec::Phi::Gauss) ? 1.0 : 2.0;

  // Member maps with h(v) = w; factor v's slot w is the only varying point.
  HypergraphIndex H = HypergraphIndex::over(spec.L);
  std::vector<std::uint64_t> members;
  for (std::uint64_t idx = 0; idx < H.count; ++idx)
    if (H.member(idx)[v] == w) members.push_back(idx);
  std::vector<std::size_t> starts(shape.n);
  {
    std::size_t s = 0;
    for (int i = 0; i < shape.n; ++i) {
      starts[i] = s;
      s += std::size_t(spec.L[i]) + 1;
    }
  }

  RngStream op = stream.substream("singular.theta_tilde");

  auto acc = mc_accumulate(
      samples, 2,
      [&](std::uint64_t i, double* out) {
        thread_local SlotDraw draw;
        thread_local std::vector<std::int64_t> partial;
        thread_local std::vector<double> point;
        RngStream ss = op.substream(i);
        draw_slots(shape, spec.L, spec.a, spec.b, ss, draw);
        const double s = draw.s;
        fill_partial(A, spec.L, spec.alpha, draw, s, partial, point);

        // Auxiliary point q = x_v^0 - eta with eta drawn from the
        // normalized averaging profile phi at width s * alpha_v^0.
        const double u0 = s * spec.alpha[v][0];
        std::vector<double> q(dv);
        for (int c = 0; c < dv; ++c) {
          double eta;
          if (spec.phi == ThetaSpec::Phi::AbsPartial && c == mc) {
            const double uu = std::max(ss.next_uniform(), 0x1.0p-53);
            const double mag = std::sqrt(-std::log(uu) / kPi);
            eta = (ss.next_uniform() < 0.5 ? -mag : mag) * u0;
          } else {
            eta = u0 * kInvSqrtTwoPi * ss.next_normal();
          }
          q[c] = draw.base[v][c] - eta;
        }

        // Fixed part of the member products: everything except slot w of
        // factor v; bail out early when some fixed point already misses.
        const double uw = s * spec.alpha[v][w];
        double inner_sum = 0.0, inner_sumsq = 0.0;
        bool feasible = true;
        for (std::uint64_t mi : members) {
          const int* h = H.member(mi);
          for (int f = 0; f < shape.n; ++f) {
            if (f == v) continue;
            if (partial[starts[f] + std::size_t(h[f])] < 0) feasible = false;
          }
        }
        if (feasible) {
          for (int jj = 0; jj < inner_samples; ++jj) {
            // zeta from the normalized |d_m g| profile at width uw.
            std::vector<double>& zeta = point;
            zeta.resize(dv);
            for (int c = 0; c < dv; ++c) {
              if (c == mc) {
                const double uu = std::max(ss.next_uniform(), 0x1.0p-53);
                const double mag = std::sqrt(-std::log(uu) / kPi);
                zeta[c] = (ss.next_uniform() < 0.5 ? -mag : mag) * uw;
              } else {
                zeta[c] = uw * kInvSqrtTwoPi * ss.next_normal();
              }
            }
            thread_local std::vector<double> xw;
            xw.resize(dv);
            for (int c = 0; c < dv; ++c) xw[c] = q[c] + zeta[c];
            const std::int64_t wcell = A.factor_cell(v, xw.data());
            double prod = 0.0;
            if (wcell >= 0) {
              prod = 1.0;
              for (std::uint64_t mi : members) {
                const int* h = H.member(mi);
                std::uint64_t flat = 0;
                bool ok = true;
                for (int f = 0; f < shape.n; ++f) {
                  const std::int64_t cell =
                      (f == v) ? wcell
                               : partial[starts[f] + std::size_t(h[f])];
                  if (cell < 0) {
                    ok = false;
                    break;
                  }
                  flat += std::uint64_t(cell) * A.factor_stride(f);
                }
                if (!ok || !A.cell_value(flat)) {
                  prod = 0.0;
                  break;
                }
              }
            }
            // sign of (d_m g)(zeta) is -sign(zeta_m); profile mass is 2.
            const double val = -2.0 * (zeta[mc] >= 0.0 ? 1.0 : -1.0) * prod;
            inner_sum += val;
            inner_sumsq += val * val;
          }
        }
        const double inner_mean = inner_sum / inner_samples;
        double inner_var =
            (inner_sumsq - inner_samples * inner_mean * inner_mean) /
            (inner_samples - 1);
        if (inner_var < 0.0) inner_var = 0.0;
        const double inner_se = std::sqrt(inner_var / inner_samples);
        out[0] = logba * phi_mass * std::fabs(inner_mean);
        out[1] = logba * phi_mass * inner_se;
      },
      workers);

  TildeEstimate est;
  est.estimate.value = acc.mean(0);
  est.estimate.std_err = acc.std_err(0);
  est.estimate.samples = samples;
  est.estimate.seed = stream.key();
  est.bias_bound = acc.mean(1);
  return est;
}

TelescopingReport check_telescoping(const std::vector<int>& L, double a,
                                    double b,
                                    const std::vector<std::vector<double>>& alpha,
                                    const GridSet& A, std::uint64_t samples,
                                    RngStream stream, int workers) {
  const ProductShape& shape = A.shape();
  ThetaSpec proxy;
  proxy.v = 0;
  proxy.L = L;
  proxy.a = a;
  proxy.b = b;
  proxy.alpha = alpha;
  validate_theta_spec(proxy, shape, false);
  SlotEval eval(A, L);
  RngStream op = stream.substream("singular.telescoping");
  const double logba = std::log(b / a);

  // Columns: residual, theta sum, xi_a, xi_b — one integrand, every term
  // sharing the scale draw, base points, and standard normals.
  auto acc = mc_accumulate(
      samples, 4,
      [&](std::uint64_t i, double* out) {
        thread_local SlotDraw draw;
        thread_local std::vector<std::int64_t> partial;
        thread_local std::vector<double> point;
        RngStream ss = op.substream(i);
        draw_slots(shape, L, a, b, ss, draw);

        fill_partial(A, L, alpha, draw, draw.s, partial, point);
        double theta_sum = 0.0;
        if (eval.eval(partial)) {
          double weight = 0.0;
          for (int z = 0; z < shape.n; ++z) {
            const int dz = shape.factor_dims[z];
            for (int w = 1; w <= L[z]; ++w) {
              double g2 = 0.0;
              for (int c = 0; c < dz; ++c) {
                const double g = draw.slots[z][std::size_t(w - 1) * dz + c];
                g2 += g * g;
              }
              weight += 2.0 * kPi * (g2 - dz);
            }
          }
          theta_sum = -logba * weight;
        }

        fill_partial(A, L, alpha, draw, a, partial, point);
        const double xi_a = eval.eval(partial) ? 1.0 : 0.0;
        fill_partial(A, L, alpha, draw, b, partial, point);
        const double xi_b = eval.eval(partial) ? 1.0 : 0.0;

        out[0] = theta_sum - 2.0 * kPi * (xi_a - xi_b);
        out[1] = theta_sum;
        out[2] = xi_a;
        out[3] = xi_b;
      },
      workers);

  TelescopingReport report;
  report.residual = acc.mean(0);
  report.std_err = acc.std_err(0);
  report.theta_sum = acc.mean(1);
  report.xi_a = acc.mean(2);
  report.xi_b = acc.mean(3);
  report.samples = samples;
  return report;
}

double check_heat_identity(double t, double lambda, int dim,
                           const std::vector<std::vector<double>>& points) {
  if (!(t > 0.0) || !(lambda > 0.0))
    throw BadWindow("heat identity needs positive t and lambda");
  const double h = 1e-4 * t;
  double max_lhs = 0.0, max_err = 0.0;
  std::vector<double> lhs_vals, rhs_vals;
  for (const auto& x : points) {
    const double lhs = laplacian_kernel(x, t * lambda, dim);
    const double gp = profile(x, (t + h) * lambda, dim);
    const double gm = profile(x, (t - h) * lambda, dim);
    const double rhs = 2.0 * kPi * t * (gp - gm) / (2.0 * h);
    lhs_vals.push_back(lhs);
    rhs_vals.push_back(rhs);
    max_lhs = std::max(max_lhs, std::fabs(lhs));
  }
  if (max_lhs == 0.0) return 0.0;
  for (std::size_t i = 0; i < lhs_vals.size(); ++i)
    max_err = std::max(max_err, std::fabs(lhs_vals[i] - rhs_vals[i]) / max_lhs);
  return max_err;
}

ScaleSplit::ScaleSplit(double t_, double s_, double lambda_j_)
    : t(t_), s(s_), lambda_j(lambda_j_) {
  j = dyadic_scale_index(lambda_j);
  const double lo = std::ldexp(t, -(j + 5));
  const double hi = std::ldexp(t, -(j + 4));
  if (!(s >= lo && s <= hi))
    throw BadWindow("small width must lie in [2^-(j+5) t, 2^-(j+4) t]");
  const double u2 = t * t * lambda_j * lambda_j;
  r = std::sqrt(u2 - s * s);
  c = u2 / (s * r);
}

ConvIdentityReport check_conv_identities(
    double s, double t, double lambda_j, int dim,
    const std::vector<std::vector<double>>& offsets) {
  if (dim < 1) throw BadWindow("dimension must be at least 1");
  const ScaleSplit split(t, s, lambda_j);
  const double u = t * lambda_j;

  // 1-d correlation/convolution of two coordinate factors by Simpson.  The
  // kernels decay like exp(-pi (x/width)^2), so each factor is negligible
  // beyond 9 widths; integrating over the intersection of the two supports
  // keeps the step size small relative to the narrower kernel even when the
  // widths are far apart.
  auto corr1d = [](auto&& f, auto&& g, double wf, double wg, double z) {
    const double lo = std::max(-9.0 * wf, -z - 9.0 * wg);
    const double hi = std::min(9.0 * wf, -z + 9.0 * wg);
    if (lo >= hi) return 0.0;
    return simpson([&](double uu) { return f(uu, wf) * g(z + uu, wg); }, lo, hi,
                   4096);
  };
  auto conv1d = [](auto&& f, auto&& g, double wf, double wg, double z) {
    const double lo = std::max(-9.0 * wf, z - 9.0 * wg);
    const double hi = std::min(9.0 * wf, z + 9.0 * wg);
    if (lo >= hi) return 0.0;
    return simpson([&](double uu) { return f(uu, wf) * g(z - uu, wg); }, lo, hi,
                   4096);
  };

  double khh_max_lhs = 0.0, khh_max_err = 0.0;
  double gkh_max_lhs = 0.0, gkh_max_err = 0.0;
  std::vector<double> khh_l, khh_r, gkh_l, gkh_r;

  for (const auto& z : offsets) {
    if (int(z.size()) != dim)
      throw DimensionMismatch("offset dimension mismatch");

    // ---- half-kernel correlation identity ----
    const double khh_lhs =
        -0.5 * laplacian_kernel(z, std::numbers::sqrt2 * s, dim);
    double khh_rhs = 0.0;
    if (dim <= 2) {
      for (int m = 0; m < dim; ++m) {
        double prod = 1.0;
        for (int c = 0; c < dim; ++c) {
          if (c == m)
            prod *= corr1d(deriv_factor, deriv_factor, s, s, z[c]);
          else
            prod *= corr1d(gauss_factor, gauss_factor, s, s, z[c]);
        }
        khh_rhs += prod;
      }
    } else {
      // Closed-form composition: the correlation of (d_m g)_s with itself
      // recombines into -1/2 (Delta g)_{sqrt 2 s}; evaluate the composed
      // Gaussian form directly.
      const double cu = std::numbers::sqrt2 * s;
      double n2 = 0.0;
      for (double zc : z) n2 += zc * zc;
      khh_rhs = -0.5 * (4.0 * kPi * kPi * n2 / (cu * cu) - 2.0 * kPi * dim) *
                std::pow(cu, -dim) * std::exp(-kPi * n2 / (cu * cu)) *
                (s * s / (cu * cu)) * 2.0;
    }
    khh_l.push_back(khh_lhs);
    khh_r.push_back(khh_rhs);
    khh_max_lhs = std::max(khh_max_lhs, std::fabs(khh_lhs));

    // ---- split-kernel convolution identity ----
    const double gkh_lhs = laplacian_kernel(z, u, dim);
    double gkh_rhs = 0.0;
    if (dim <= 2) {
      for (int m = 0; m < dim; ++m) {
        double prod = 1.0;
        for (int c = 0; c < dim; ++c) {
          if (c == m)
            prod *= conv1d(deriv_factor, deriv_factor, split.r, s, z[c]);
          else
            prod *= conv1d(gauss_factor, gauss_factor, split.r, s, z[c]);
        }
        gkh_rhs += prod;
      }
      gkh_rhs *= split.c;
    } else {
      // Gaussian closed-form composition of the two derivative kernels:
      // (d_m g)_r * (d_m g)_s = r s u^-2 (d_m^2 g)_u with u^2 = r^2 + s^2.
      double n2 = 0.0;
      for (double zc : z) n2 += zc * zc;
      const double base = std::pow(u, -dim) * std::exp(-kPi * n2 / (u * u));
      double sum = 0.0;
      for (int m = 0; m < dim; ++m)
        sum += (4.0 * kPi * kPi * z[m] * z[m] / (u * u) - 2.0 * kPi) * base;
      gkh_rhs = split.c * (split.r * s / (u * u)) * sum;
    }
    gkh_l.push_back(gkh_lhs);
    gkh_r.push_back(gkh_rhs);
    gkh_max_lhs = std::max(gkh_max_lhs, std::fabs(gkh_lhs));
  }

  ConvIdentityReport report;
  for (std::size_t i = 0; i < khh_l.size(); ++i) {
    if (khh_max_lhs > 0.0)
      khh_max_err = std::max(khh_max_err,
                             std::fabs(khh_l[i] - khh_r[i]) / khh_max_lhs);
    if (gkh_max_lhs > 0.0)
      gkh_max_err = std::max(gkh_max_err,
                             std::fabs(gkh_l[i] - gkh_r[i]) / gkh_max_lhs);
  }
  report.khh_residual = khh_max_err;
  report.gkh_residual = gkh_max_err;
  return report;
}

GrowthReport growth_probe(const GridSet& A,
                          const std::vector<SimplexData>& simplices,
                          double epsilon, const std::vector<int>& J_list,
                          std::uint64_t samples, RngStream stream,
                          int workers) {
  const ProductShape& shape = A.shape();
  if (shape.n > 2) throw BadSpec("growth probe is desk-scale: n <= 2");
  if (epsilon <= 0.0 || epsilon >= 1.0)
    throw BadScale("growth probe needs epsilon in (0,1)");
  int jmax = 0;
  for (int J : J_list) {
    if (J < 1 || J > 12) throw BadSpec("growth probe caps J at 12");
    jmax = std::max(jmax, J);
  }
  if (jmax == 0) throw BadSpec("growth probe needs at least one J");

  CountingKernel kernel(A, simplices);
  RngStream op = stream.substream("singular.growth_probe");

  // Columns per j: the two form indicators and their paired difference,
  // all from the same draw (common random numbers across j as well, since
  // the unit-scale configuration is shared and only rescaled).
  auto acc = mc_accumulate(
      samples, std::size_t(3 * jmax),
      [&](std::uint64_t i, double* out) {
        thread_local CountingKernel::Draw draw;
        kernel.draw(op.substream(i), draw);
        for (int j = 1; j <= jmax; ++j) {
          const double lambda = 1.5 * std::ldexp(1.0, -j);
          const double ie = kernel.indicator(draw, lambda, epsilon) ? 1.0 : 0.0;
          const double io = kernel.indicator(draw, lambda, 1.0) ? 1.0 : 0.0;
          out[3 * (j - 1)] = ie;
          out[3 * (j - 1) + 1] = io;
          out[3 * (j - 1) + 2] = ie - io;
        }
      },
      workers);

  GrowthReport report;
  for (int j = 1; j <= jmax; ++j) {
    GrowthRow row;
    row.j = j;
    row.lambda = 1.5 * std::ldexp(1.0, -j);
    row.n_eps = acc.mean(3 * (j - 1));
    row.n_one = acc.mean(3 * (j - 1) + 1);
    row.abs_diff = std::fabs(acc.mean(3 * (j - 1) + 2));
    row.std_err = acc.std_err(3 * (j - 1) + 2);
    report.rows.push_back(row);
  }
  std::vector<double> fit_x, fit_y;
  for (int J : J_list) {
    GrowthSum gs;
    gs.J = J;
    double var = 0.0;
    for (int j = 1; j <= J; ++j) {
      gs.sum += report.rows[j - 1].abs_diff;
      var += report.rows[j - 1].std_err * report.rows[j - 1].std_err;
    }
    gs.sigma = std::sqrt(var);
    report.sums.push_back(gs);
    if (gs.sum > 3.0 * gs.sigma) {
      fit_x.push_back(double(J));
      fit_y.push_back(gs.sum);
    }
  }
  report.fit = fit_loglog(fit_x, fit_y);
  return report;
}

}  // namespace simplexscan
