#include "simplexscan/dyadic.hpp"

#include <cmath>

#include "simplexscan/errors.hpp"

namespace simplexscan {

namespace {

BigInt int_pow(BigInt base, unsigned exp) {
  BigInt out = 1;
  while (exp > 0) {
    if (exp & 1u) out *= base;
    base *= base;
    exp >>= 1u;
  }
  return out;
}

BigRational rational_pow(const BigRational& x, unsigned exp) {
  return BigRational(int_pow(numerator(x), exp), int_pow(denominator(x), exp));
}

// Cell lists of one factor's block inside a dyadic cube: partial flat
// indices of the s^d cells whose per-axis coordinates lie in
// [q_a*s, (q_a+1)*s).
std::vector<std::uint64_t> cube_cells(const std::vector<int>& q, int d, int s,
                                      int resolution) {
  std::vector<std::uint64_t> cells;
  cells.reserve(std::size_t(std::pow(double(s), d)));
  std::vector<int> off(d, 0);
  while (true) {
    std::uint64_t partial = 0;
    for (int a = 0; a < d; ++a)
      partial = partial * resolution + std::uint64_t(q[a] * s + off[a]);
    cells.push_back(partial);
    int pos = d - 1;
    while (pos >= 0 && ++off[pos] == s) off[pos--] = 0;
    if (pos < 0) break;
  }
  return cells;
}

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= std::uint64_t(i);
  return f;
}

// Recursive enumeration of row multisets for the bipartite (n = 2) fast
// path: nondecreasing row tuples with a running AND, pruned when the AND
// empties, each completed multiset weighted by the number of its orderings.
struct BipartiteCounter {
  const std::vector<std::vector<std::uint64_t>>* rows = nullptr;
  int tuple_len = 0;       // k_1 + 1
  unsigned inner_pow = 0;  // k_2 + 1
  BigInt total = 0;

  void run(std::vector<std::uint64_t> column_mask) {
    acc_.assign(std::size_t(tuple_len + 1),
                std::vector<std::uint64_t>(column_mask.size()));
    acc_[0] = std::move(column_mask);
    runs_.clear();
    walk(0, 0);
  }

  // acc_[depth] holds the AND of the rows chosen so far over the valid
  // column mask.
  std::vector<std::vector<std::uint64_t>> acc_;
  std::vector<int> runs_;

 private:
  void walk(std::size_t start, int depth) {
    const std::size_t nrows = rows->size();
    const auto& cur = acc_[depth];
    auto& next = acc_[depth + 1];
    for (std::size_t r = start; r < nrows; ++r) {
      std::uint64_t any = 0;
      const auto& bits = (*rows)[r];
      for (std::size_t w = 0; w < cur.size(); ++w) {
        next[w] = cur[w] & bits[w];
        any |= next[w];
      }
      if (any == 0) continue;  // every extension would contribute zero
      const bool extends_run = (depth > 0 && r == start);
      if (extends_run && runs_.size() > 0 && r == start)
        ++runs_.back();
      else
        runs_.push_back(1);
      if (depth + 1 == tuple_len) {
        std::uint64_t cnt = 0;
        for (std::uint64_t w : next) cnt += std::uint64_t(__builtin_popcountll(w));
        std::uint64_t orderings = factorial(tuple_len);
        for (int run_len : runs_) orderings /= factorial(run_len);
        total += BigInt(orderings) * int_pow(BigInt(cnt), inner_pow);
      } else {
        walk(r, depth + 1);
      }
      if (extends_run)
        --runs_.back();
      else
        runs_.pop_back();
    }
  }
};

}  // namespace

int dyadic_scale_index(double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw BadScale("dilation must lie in (0,1]");
  int m = 1;
  while (std::ldexp(1.0, -m) >= lambda) ++m;
  return m;
}

JensenChain jensen_chain(const GridSet& A, double lambda) {
  const ProductShape& shape = A.shape();
  const int m = dyadic_scale_index(lambda);
  const int cubes_per_axis = 1 << m;
  if (cubes_per_axis > A.resolution())
    throw ResolutionTooCoarse("dyadic cubes finer than the grid resolution");
  const int s = A.resolution() / cubes_per_axis;
  const int n = shape.n;
  const int dim = shape.domain_dim();
  const unsigned kappa = unsigned(shape.kappa);

  JensenChain chain;
  chain.m = m;
  chain.cube_side = s;

  // Cells per factor block and their kappa-exponents.
  std::vector<BigInt> factor_cell_count(n);
  for (int i = 0; i < n; ++i)
    factor_cell_count[i] = int_pow(BigInt(s), unsigned(shape.factor_dims[i]));

  BigRational lhs_sum = 0, mid_sum = 0;
  bool per_cube_ok = true;

  // Odometer over all dyadic product cubes (axis-major, factor blocks in
  // order), matching the flat cell layout.
  std::vector<int> cube_coord(dim, 0);
  std::uint64_t cube_index = 0;
  const int last = n - 1;
  const unsigned inner_pow = unsigned(shape.K[last] + 1);

  while (true) {
    // Per-factor cell lists for this cube.
    std::vector<std::vector<std::uint64_t>> cells(n);
    int axis = 0;
    for (int i = 0; i < n; ++i) {
      const int d = shape.factor_dims[i];
      std::vector<int> q(cube_coord.begin() + axis, cube_coord.begin() + axis + d);
      cells[i] = cube_cells(q, d, s, A.resolution());
      axis += d;
    }

    // Average of the indicator over the cube.
    std::uint64_t true_cells = 0, total_cells = 1;
    {
      std::vector<std::size_t> pos(n, 0);
      for (int i = 0; i < n; ++i) total_cells *= cells[i].size();
      while (true) {
        std::uint64_t flat = 0;
        for (int i = 0; i < n; ++i)
          flat += cells[i][pos[i]] * A.factor_stride(i);
        true_cells += A.cell_value(flat) ? 1 : 0;
        int p = n - 1;
        while (p >= 0 && ++pos[p] == cells[p].size()) pos[p--] = 0;
        if (p < 0) break;
      }
    }
    const BigRational average{BigInt(true_cells), BigInt(total_cells)};

    // Exact configuration integral I(Q) by the factor recursion: assign all
    // vertex slots of factors 1..n-1, then the last factor's slots
    // contribute (number of admissible cells)^(k_n + 1).
    BigInt T = 0;
    if (n == 1) {
      T = int_pow(BigInt(true_cells), inner_pow);
    } else if (n == 2) {
      // Bipartite fast path: bitset rows of factor-1 cells over factor-2
      // cells; complete-structure counts via AND + popcount.
      const std::size_t nrows = cells[0].size();
      const std::size_t ncols = cells[1].size();
      const std::size_t words = (ncols + 63) / 64;
      std::vector<std::vector<std::uint64_t>> rows(
          nrows, std::vector<std::uint64_t>(words, 0));
      for (std::size_t r = 0; r < nrows; ++r)
        for (std::size_t c = 0; c < ncols; ++c) {
          const std::uint64_t flat =
              cells[0][r] * A.factor_stride(0) + cells[1][c] * A.factor_stride(1);
          if (A.cell_value(flat)) rows[r][c / 64] |= std::uint64_t(1) << (c % 64);
        }
      BipartiteCounter counter;
      counter.rows = &rows;
      counter.tuple_len = shape.K[0] + 1;
      counter.inner_pow = inner_pow;
      std::vector<std::uint64_t> all(words, ~std::uint64_t(0));
      if (ncols % 64 != 0) all[words - 1] = (std::uint64_t(1) << (ncols % 64)) - 1;
      counter.run(std::move(all));
      T = counter.total;
    } else {
      // General odometer over the vertex slots of factors 1..n-1.
      std::vector<std::pair<int, int>> slots;  // (factor, vertex index)
      for (int i = 0; i < n - 1; ++i)
        for (int r = 0; r <= shape.K[i]; ++r) slots.emplace_back(i, r);
      std::vector<std::size_t> assign(slots.size(), 0);
      HypergraphIndex Hp =
          HypergraphIndex::over(std::vector<int>(shape.K.begin(), shape.K.end() - 1));
      while (true) {
        std::uint64_t admissible = 0;
        for (std::size_t cpos = 0; cpos < cells[last].size(); ++cpos) {
          bool ok = true;
          for (std::uint64_t hidx = 0; hidx < Hp.count && ok; ++hidx) {
            const int* h = Hp.member(hidx);
            std::uint64_t flat = cells[last][cpos] * A.factor_stride(last);
            for (int i = 0; i < n - 1; ++i) {
              // slot of factor i, vertex h[i]
              std::size_t slot = 0;
              for (int ii = 0; ii < i; ++ii) slot += std::size_t(shape.K[ii]) + 1;
              slot += std::size_t(h[i]);
              flat += cells[i][assign[slot]] * A.factor_stride(i);
            }
            ok = A.cell_value(flat);
          }
          admissible += ok ? 1 : 0;
        }
        T += int_pow(BigInt(admissible), inner_pow);
        int p = int(slots.size()) - 1;
        while (p >= 0 && ++assign[p] == cells[slots[p].first].size())
          assign[p--] = 0;
        if (p < 0) break;
      }
    }

    BigInt denom = 1;
    for (int i = 0; i < n; ++i)
      denom *= int_pow(factor_cell_count[i], unsigned(shape.K[i] + 1));
    const BigRational integral(T, denom);
    const BigRational avg_pow = rational_pow(average, kappa);

    if (integral < avg_pow) per_cube_ok = false;
    lhs_sum += integral;
    mid_sum += avg_pow;
    chain.per_cube.push_back({cube_index, average, avg_pow, integral});

    ++cube_index;
    int pos = dim - 1;
    while (pos >= 0 && ++cube_coord[pos] == cubes_per_axis) cube_coord[pos--] = 0;
    if (pos < 0) break;
  }

  const BigInt cube_count = int_pow(BigInt(cubes_per_axis), unsigned(dim));
  chain.lhs = lhs_sum / BigRational(cube_count);
  chain.mid = mid_sum / BigRational(cube_count);
  chain.rhs = rational_pow(
      BigRational(BigInt(A.true_count()), BigInt(A.total_cells())), kappa);
  chain.per_cube_ok = per_cube_ok;
  chain.chain_ok = per_cube_ok && chain.lhs >= chain.mid && chain.mid >= chain.rhs;
  return chain;
}

StructuredFloor structured_floor(const GridSet& A,
                                 const std::vector<SimplexData>& simplices,
                                 double lambda, std::uint64_t samples,
                                 RngStream stream, int workers) {
  StructuredFloor out;
  out.estimate = estimate_N(A, simplices, lambda, 1.0, samples,
                            stream.substream("dyadic.structured_floor"), workers);
  out.floor = std::pow(A.density(), double(A.shape().kappa));
  return out;
}

}  // namespace simplexscan
