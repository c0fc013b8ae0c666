#include "simplexscan/counting.hpp"

#include <cmath>

#include "simplexscan/errors.hpp"

namespace simplexscan {

namespace {
constexpr double kInvSqrtTwoPi = 0x1.9884533d43651p-2;
}

HypergraphIndex HypergraphIndex::over(const std::vector<int>& L) {
  HypergraphIndex h;
  h.L = L;
  h.n = int(L.size());
  h.count = 1;
  for (int l : L) {
    if (l < 0) throw DimensionMismatch("hypergraph bounds must be >= 0");
    h.count *= std::uint64_t(l + 1);
  }
  h.members.resize(h.count * h.n);
  std::vector<int> tuple(h.n, 0);
  for (std::uint64_t idx = 0; idx < h.count; ++idx) {
    for (int i = 0; i < h.n; ++i) h.members[idx * h.n + i] = tuple[i];
    int pos = h.n - 1;
    while (pos >= 0 && ++tuple[pos] > L[pos]) tuple[pos--] = 0;
  }
  return h;
}

HypergraphIndex HypergraphIndex::full(const ProductShape& shape) {
  return over(shape.K);
}

CountingKernel::CountingKernel(const GridSet& A,
                               const std::vector<SimplexData>& simplices)
    : A_(&A), simplices_(&simplices) {
  const ProductShape& shape = A.shape();
  if (int(simplices.size()) != shape.n)
    throw DimensionMismatch("simplex count does not match grid shape");
  for (int i = 0; i < shape.n; ++i)
    if (simplices[i].k + 1 != shape.factor_dims[i])
      throw DimensionMismatch("simplex size does not match grid factor");
  H_ = HypergraphIndex::full(shape);
  starts_.resize(shape.n);
  std::uint64_t s = 0;
  for (int i = 0; i < shape.n; ++i) {
    starts_[i] = s;
    s += std::uint64_t(shape.K[i]) + 1;
  }
}

void CountingKernel::draw(RngStream stream, Draw& out) const {
  const ProductShape& shape = A_->shape();
  out.base.resize(shape.n);
  out.unit_configs.resize(shape.n);
  out.noise.resize(shape.n);
  for (int i = 0; i < shape.n; ++i) {
    const int d = shape.factor_dims[i];
    RngStream fs = stream.substream(std::uint64_t(i));
    out.base[i].resize(d);
    for (int a = 0; a < d; ++a) out.base[i][a] = fs.next_uniform();
    out.unit_configs[i] = sample_configuration((*simplices_)[i], 1.0, fs);
    auto& noise = out.noise[i];
    noise.resize(std::size_t(shape.K[i]) * d);
    for (double& t : noise) t = fs.next_normal();
  }
}

bool CountingKernel::indicator(const Draw& draw, double lambda,
                               double eps) const {
  return indicator_witness(draw, lambda, eps, nullptr);
}

bool CountingKernel::indicator_witness(const Draw& draw, double lambda,
                                       double eps, Witness* witness) const {
  const ProductShape& shape = A_->shape();
  const double noise_scale = eps * lambda * kInvSqrtTwoPi;

  // Per-factor partial cell indices for the base point (r = 0) and each
  // simplex point (r >= 1); any point outside the cube kills the product.
  thread_local std::vector<std::int64_t> partial;
  thread_local std::vector<double> point;
  partial.clear();
  for (int i = 0; i < shape.n; ++i) {
    const int d = shape.factor_dims[i];
    point.resize(d);
    const std::int64_t base_cell = A_->factor_cell(i, draw.base[i].data());
    if (base_cell < 0 && witness == nullptr) return false;
    partial.push_back(base_cell);
    for (int r = 0; r < shape.K[i]; ++r) {
      for (int a = 0; a < d; ++a) {
        double x = draw.base[i][a] + lambda * draw.unit_configs[i].points[r][a];
        if (eps > 0.0) x += noise_scale * draw.noise[i][std::size_t(r) * d + a];
        point[a] = x;
      }
      const std::int64_t cell = A_->factor_cell(i, point.data());
      if (cell < 0 && witness == nullptr) return false;
      partial.push_back(cell);
    }
  }

  // Evaluate the product over all member maps h.
  for (std::uint64_t idx = 0; idx < H_.count; ++idx) {
    const int* h = H_.member(idx);
    std::uint64_t flat = 0;
    bool ok = true;
    for (int i = 0; i < shape.n; ++i) {
      const std::int64_t cell = partial[starts_[i] + std::uint64_t(h[i])];
      if (cell < 0) {
        ok = false;
        break;
      }
      flat += std::uint64_t(cell) * A_->factor_stride(i);
    }
    if (!ok || !A_->cell_value(flat)) return false;
  }

  if (witness != nullptr) {
    witness->lambda = lambda;
    witness->base = draw.base;
    witness->offsets.assign(shape.n, {});
    for (int i = 0; i < shape.n; ++i) {
      const int d = shape.factor_dims[i];
      witness->offsets[i].resize(shape.K[i]);
      for (int r = 0; r < shape.K[i]; ++r) {
        auto& off = witness->offsets[i][r];
        off.resize(d);
        for (int a = 0; a < d; ++a) {
          off[a] = lambda * draw.unit_configs[i].points[r][a];
          if (eps > 0.0)
            off[a] += noise_scale * draw.noise[i][std::size_t(r) * d + a];
        }
      }
    }
  }
  return true;
}

bool verify_witness(const GridSet& A, const std::vector<SimplexData>& simplices,
                    double lambda, const Witness& witness, double gram_tol) {
  const ProductShape& shape = A.shape();
  if (int(witness.base.size()) != shape.n) return false;
  // All kappa membership checks, assembled from base + chosen offsets.
  HypergraphIndex H = HypergraphIndex::full(shape);
  std::vector<double> point(shape.domain_dim());
  for (std::uint64_t idx = 0; idx < H.count; ++idx) {
    const int* h = H.member(idx);
    int axis = 0;
    for (int i = 0; i < shape.n; ++i)
      for (int a = 0; a < shape.factor_dims[i]; ++a, ++axis) {
        double x = witness.base[i][a];
        if (h[i] > 0) x += witness.offsets[i][h[i] - 1][a];
        point[axis] = x;
      }
    if (!A.membership(point)) return false;
  }
  // The offsets must realize the dilated simplex geometry exactly.
  for (int i = 0; i < shape.n; ++i) {
    Configuration c;
    c.lambda = lambda;
    c.points = witness.offsets[i];
    if (gram_residual(c, simplices[i]) > gram_tol) return false;
  }
  return true;
}

FormEstimate estimate_N(const GridSet& A,
                        const std::vector<SimplexData>& simplices,
                        double lambda, double eps, std::uint64_t samples,
                        RngStream stream, int workers,
                        std::vector<Witness>* witnesses,
                        std::size_t max_witnesses) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw BadScale("dilation must lie in (0,1]");
  if (eps < 0.0 || eps > 1.0)
    throw BadScale("mollification width must lie in [0,1]");
  CountingKernel kernel(A, simplices);
  RngStream op = stream.substream("counting.estimate_N");

  const std::uint64_t nblocks = (samples + kMcBlock - 1) / kMcBlock;
  std::vector<std::vector<Witness>> per_block(witnesses ? nblocks : 0);

  auto acc = mc_accumulate(
      samples, 1,
      [&](std::uint64_t i, double* out) {
        thread_local CountingKernel::Draw draw;
        kernel.draw(op.substream(i), draw);
        if (witnesses != nullptr) {
          auto& bucket = per_block[i / kMcBlock];
          if (bucket.size() < max_witnesses) {
            Witness w;
            if (kernel.indicator_witness(draw, lambda, eps, &w)) {
              w.sample_index = i;
              bucket.push_back(std::move(w));
              out[0] = 1.0;
              return;
            }
            out[0] = 0.0;
            return;
          }
        }
        out[0] = kernel.indicator(draw, lambda, eps) ? 1.0 : 0.0;
      },
      workers);

  if (witnesses != nullptr) {
    witnesses->clear();
    for (auto& bucket : per_block) {
      for (auto& w : bucket) {
        if (witnesses->size() >= max_witnesses) break;
        witnesses->push_back(std::move(w));
      }
      if (witnesses->size() >= max_witnesses) break;
    }
  }

  FormEstimate est;
  est.value = acc.mean(0);
  est.std_err = acc.std_err(0);
  est.samples = samples;
  est.seed = stream.key();
  return est;
}

DecayReport check_uniform_decay(const GridSet& A,
                                const std::vector<SimplexData>& simplices,
                                double lambda,
                                const std::vector<double>& eps_list,
                                std::uint64_t samples, RngStream stream,
                                int workers) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw BadScale("dilation must lie in (0,1]");
  for (double e : eps_list)
    if (e <= 0.0 || e > 1.0) throw BadScale("decay widths must lie in (0,1]");
  CountingKernel kernel(A, simplices);
  RngStream op = stream.substream("counting.check_uniform_decay");

  // Columns: I_0, then the paired differences I_0 - I_eps for each width.
  const std::size_t m = eps_list.size();
  auto acc = mc_accumulate(
      samples, 1 + m,
      [&](std::uint64_t i, double* out) {
        thread_local CountingKernel::Draw draw;
        kernel.draw(op.substream(i), draw);
        const double base = kernel.indicator(draw, lambda, 0.0) ? 1.0 : 0.0;
        out[0] = base;
        for (std::size_t c = 0; c < m; ++c) {
          const double val =
              kernel.indicator(draw, lambda, eps_list[c]) ? 1.0 : 0.0;
          out[1 + c] = base - val;
        }
      },
      workers);

  DecayReport report;
  report.base.value = acc.mean(0);
  report.base.std_err = acc.std_err(0);
  report.base.samples = samples;
  report.base.seed = stream.key();
  std::vector<double> fit_x, fit_y;
  for (std::size_t c = 0; c < m; ++c) {
    DecayPoint p;
    p.eps = eps_list[c];
    p.abs_diff = std::fabs(acc.mean(1 + c));
    p.std_err = acc.std_err(1 + c);
    if (p.abs_diff > 3.0 * p.std_err) {
      fit_x.push_back(p.eps);
      fit_y.push_back(p.abs_diff);
    }
    report.points.push_back(p);
  }
  report.fit = fit_loglog(fit_x, fit_y);
  return report;
}

}  // namespace simplexscan
