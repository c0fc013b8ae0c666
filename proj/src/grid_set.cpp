#include "simplexscan/grid_set.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "simplexscan/errors.hpp"
#include "simplexscan/rng.hpp"

namespace simplexscan {

namespace {

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

GridSet::GridSet(ProductShape shape, int resolution)
    : shape_(std::move(shape)), resolution_(resolution) {
  if (!power_of_two(resolution_) || resolution_ < 2 || resolution_ > 1024)
    throw Error("resolution must be a power of two in [2, 1024]");
  std::uint64_t total = 1;
  factor_cells_.resize(shape_.n);
  for (int i = 0; i < shape_.n; ++i) {
    std::uint64_t fc = 1;
    for (int a = 0; a < shape_.factor_dims[i]; ++a) fc *= std::uint64_t(resolution_);
    factor_cells_[i] = fc;
    total *= fc;
    if (total > (std::uint64_t(1) << 28))
      throw Error("grid too large: more than 2^28 cells");
  }
  strides_.assign(shape_.n, 1);
  for (int i = shape_.n - 2; i >= 0; --i)
    strides_[i] = strides_[i + 1] * factor_cells_[i + 1];
  cells_.assign(total, 0);
}

double GridSet::density() const {
  return double(true_count_) / double(cells_.size());
}

void GridSet::set_cell(std::uint64_t flat, bool value) {
  if (cells_[flat] && !value) --true_count_;
  if (!cells_[flat] && value) ++true_count_;
  cells_[flat] = value ? 1 : 0;
}

bool GridSet::membership(std::span<const double> point) const {
  if (int(point.size()) != dim())
    throw DimensionMismatch("point dimension does not match grid dimension");
  std::uint64_t flat = 0;
  const double* p = point.data();
  for (int i = 0; i < shape_.n; ++i) {
    const std::int64_t partial = factor_cell(i, p);
    if (partial < 0) return false;
    flat += std::uint64_t(partial) * strides_[i];
    p += shape_.factor_dims[i];
  }
  return cells_[flat] != 0;
}

std::int64_t GridSet::factor_cell(int factor, const double* coords) const {
  std::int64_t idx = 0;
  for (int a = 0; a < shape_.factor_dims[factor]; ++a) {
    const double x = coords[a];
    if (x < 0.0 || x > 1.0) return -1;
    int c = int(x * resolution_);
    if (c >= resolution_) c = resolution_ - 1;  // right/top boundary
    idx = idx * resolution_ + c;
  }
  return idx;
}

GridSet GridSet::full(ProductShape shape, int resolution) {
  GridSet g(std::move(shape), resolution);
  std::fill(g.cells_.begin(), g.cells_.end(), 1);
  g.true_count_ = g.cells_.size();
  return g;
}

GridSet GridSet::subcube(ProductShape shape, int resolution, double delta) {
  GridSet g(std::move(shape), resolution);
  const int d = g.dim();
  if (delta < 0.0 || delta > 1.0) throw InfeasibleDensity("delta outside [0,1]");
  // Corner box with c cells per axis, c chosen so (c/res)^d is the closest
  // achievable density to delta.
  int c = int(std::lround(resolution * std::pow(delta, 1.0 / d)));
  if (c < 1) c = 1;
  if (c > resolution) c = resolution;
  auto box_density = [&](int side) { return std::pow(double(side) / resolution, d); };
  for (int cand = c - 1; cand <= c + 1; ++cand)
    if (cand >= 1 && cand <= resolution &&
        std::fabs(box_density(cand) - delta) < std::fabs(box_density(c) - delta))
      c = cand;
  if (std::fabs(box_density(c) - delta) > 2.0 * d / resolution)
    throw InfeasibleDensity("subcube cannot reach density within 2*dim/resolution");

  // Walk the d-dimensional corner box with an odometer over global axis
  // coordinates and set each covered cell.
  std::vector<int> coord(d, 0);
  while (true) {
    std::uint64_t flat = 0;
    int axis = 0;
    for (int i = 0; i < g.shape_.n; ++i) {
      std::uint64_t partial = 0;
      for (int a = 0; a < g.shape_.factor_dims[i]; ++a)
        partial = partial * resolution + std::uint64_t(coord[axis++]);
      flat += partial * g.strides_[i];
    }
    g.cells_[flat] = 1;
    int pos = d - 1;
    while (pos >= 0 && ++coord[pos] == c) coord[pos--] = 0;
    if (pos < 0) break;
  }
  std::uint64_t cnt = 1;
  for (int i = 0; i < d; ++i) cnt *= std::uint64_t(c);
  g.true_count_ = cnt;
  return g;
}

GridSet GridSet::random(ProductShape shape, int resolution, double delta,
                        std::uint64_t seed) {
  GridSet g(std::move(shape), resolution);
  if (delta < 0.0 || delta > 1.0) throw InfeasibleDensity("delta outside [0,1]");
  RngStream stream = RngStream(seed).substream("grid_set.random");
  std::uint64_t cnt = 0;
  for (std::uint64_t i = 0; i < g.cells_.size(); ++i) {
    const bool on = stream.next_uniform() < delta;
    g.cells_[i] = on ? 1 : 0;
    cnt += on;
  }
  g.true_count_ = cnt;
  // With independent flips the realized density concentrates near delta;
  // reject only wildly infeasible requests per the density contract.
  if (std::fabs(g.density() - delta) > 2.0 * g.dim() / resolution &&
      std::fabs(g.density() - delta) > 0.05)
    throw InfeasibleDensity("random fill landed too far from requested density");
  return g;
}

GridSet GridSet::shell(ProductShape shape, int resolution, double width,
                       double period) {
  GridSet g(std::move(shape), resolution);
  if (width <= 0.0 || period <= 0.0 || width > period / 2.0)
    throw Error("shell needs 0 < width <= period/2");
  const int d = g.dim();
  std::vector<int> coord(d, 0);
  std::uint64_t cnt = 0;
  while (true) {
    double norm2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double x = (coord[a] + 0.5) / resolution;
      norm2 += x * x;
    }
    const double frac = std::fmod(norm2, period);
    const bool on = frac <= width || period - frac <= width;
    if (on) {
      std::uint64_t flat = 0;
      int axis = 0;
      for (int i = 0; i < g.shape_.n; ++i) {
        std::uint64_t partial = 0;
        for (int a = 0; a < g.shape_.factor_dims[i]; ++a)
          partial = partial * resolution + std::uint64_t(coord[axis++]);
        flat += partial * g.strides_[i];
      }
      g.cells_[flat] = 1;
      ++cnt;
    }
    int pos = d - 1;
    while (pos >= 0 && ++coord[pos] == resolution) coord[pos--] = 0;
    if (pos < 0) break;
  }
  g.true_count_ = cnt;
  return g;
}

GridSet GridSet::explicit_runs(
    ProductShape shape, int resolution,
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& runs) {
  GridSet g(std::move(shape), resolution);
  std::uint64_t cnt = 0;
  for (const auto& [start, len] : runs) {
    if (start + len > g.cells_.size())
      throw Error("run extends past the last cell");
    for (std::uint64_t i = start; i < start + len; ++i) {
      if (!g.cells_[i]) ++cnt;
      g.cells_[i] = 1;
    }
  }
  g.true_count_ = cnt;
  return g;
}

GridSet GridSet::set_union(const GridSet& other) const {
  if (other.resolution_ != resolution_ || other.cells_.size() != cells_.size())
    throw DimensionMismatch("union requires matching grids");
  GridSet g(shape_, resolution_);
  std::uint64_t cnt = 0;
  for (std::uint64_t i = 0; i < cells_.size(); ++i) {
    g.cells_[i] = (cells_[i] | other.cells_[i]);
    cnt += g.cells_[i];
  }
  g.true_count_ = cnt;
  return g;
}

bool GridSet::is_subset_of(const GridSet& other) const {
  if (other.cells_.size() != cells_.size()) return false;
  for (std::uint64_t i = 0; i < cells_.size(); ++i)
    if (cells_[i] && !other.cells_[i]) return false;
  return true;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> GridSet::to_runs() const {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> runs;
  std::uint64_t i = 0;
  while (i < cells_.size()) {
    if (cells_[i]) {
      const std::uint64_t start = i;
      while (i < cells_.size() && cells_[i]) ++i;
      runs.emplace_back(start, i - start);
    } else {
      ++i;
    }
  }
  return runs;
}

std::string GridSet::to_rle_json() const {
  nlohmann::json j;
  j["K"] = shape_.K;
  j["resolution"] = resolution_;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& [start, len] : to_runs()) runs.push_back({start, len});
  j["runs"] = std::move(runs);
  return j.dump(2);
}

GridSet GridSet::from_rle_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("K") || !j.contains("resolution") || !j.contains("runs"))
    throw ConfigError("run-length set needs keys 'K', 'resolution', 'runs'");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> runs;
  for (const auto& r : j["runs"]) {
    if (!r.is_array() || r.size() != 2)
      throw ConfigError("each entry of 'runs' must be a [start, length] pair");
    runs.emplace_back(r[0].get<std::uint64_t>(), r[1].get<std::uint64_t>());
  }
  return explicit_runs(product_shape(j["K"].get<std::vector<int>>()),
                       j["resolution"].get<int>(), runs);
}

}  // namespace simplexscan
