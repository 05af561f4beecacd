#include "bendkit/grid.hpp"

#include <atomic>
#include <cmath>
#include <numeric>

namespace bendkit {

namespace {
std::atomic<Exec> g_default_exec{Exec::Parallel};
}

Exec default_exec() noexcept { return g_default_exec.load(std::memory_order_relaxed); }
void set_default_exec(Exec mode) noexcept {
  g_default_exec.store(mode, std::memory_order_relaxed);
}

ChartGrid::ChartGrid(std::vector<std::array<double, 2>> bounds, std::vector<int> resolution,
                     std::vector<bool> periodic) {
  dim_ = static_cast<int>(bounds.size());
  if (dim_ < 1) throw GridError("grid needs at least one axis");
  if (resolution.size() != bounds.size() || periodic.size() != bounds.size())
    throw GridError("bounds/resolution/periodic length mismatch");
  lo_.resize(dim_);
  hi_.resize(dim_);
  h_.resize(dim_);
  res_ = resolution;
  periodic_.resize(dim_);
  for (int d = 0; d < dim_; ++d) {
    lo_[d] = bounds[d][0];
    hi_[d] = bounds[d][1];
    if (!(hi_[d] > lo_[d])) throw GridError("axis " + std::to_string(d) + ": empty interval");
    if (res_[d] < 8)
      throw GridError("axis " + std::to_string(d) + ": resolution must be at least 8");
    periodic_[d] = periodic[d] ? 1 : 0;
    h_[d] = (hi_[d] - lo_[d]) / (periodic_[d] ? res_[d] : res_[d] - 1);
  }
  stride_.assign(dim_, 1);
  for (int d = dim_ - 2; d >= 0; --d) stride_[d] = stride_[d + 1] * res_[d + 1];
  num_nodes_ = stride_[0] * res_[0];
}

double ChartGrid::max_spacing() const {
  double h = 0.0;
  for (double v : h_) h = std::max(h, v);
  return h;
}

void ChartGrid::coords(std::size_t node, std::vector<double>& out) const {
  out.resize(dim_);
  for (int d = 0; d < dim_; ++d) {
    std::size_t q = node / stride_[d];
    out[d] = coord(d, static_cast<int>(q % res_[d]));
  }
}

std::size_t ChartGrid::flat(std::span<const int> idx) const {
  std::size_t node = 0;
  for (int d = 0; d < dim_; ++d) {
    int i = idx[d];
    if (i < 0 || i >= res_[d]) throw GridError("node index out of range");
    node += stride_[d] * static_cast<std::size_t>(i);
  }
  return node;
}

void ChartGrid::unflat(std::size_t node, std::vector<int>& idx) const {
  idx.resize(dim_);
  unflat(node, idx.data());
}

void ChartGrid::unflat(std::size_t node, int* idx) const {
  for (int d = 0; d < dim_; ++d) idx[d] = static_cast<int>((node / stride_[d]) % res_[d]);
}

std::size_t ChartGrid::neighbor(std::size_t node, int axis, int steps) const {
  int i = static_cast<int>((node / stride_[axis]) % res_[axis]);
  int j = i + steps;
  if (periodic_[axis]) {
    j = ((j % res_[axis]) + res_[axis]) % res_[axis];
  } else if (j < 0 || j >= res_[axis]) {
    return npos;
  }
  long long shift = static_cast<long long>(stride_[axis]) * (j - i);
  return static_cast<std::size_t>(static_cast<long long>(node) + shift);
}

bool ChartGrid::same_layout(const ChartGrid& other) const {
  if (dim_ != other.dim_ || res_ != other.res_ || periodic_ != other.periodic_) return false;
  for (int d = 0; d < dim_; ++d)
    if (lo_[d] != other.lo_[d] || hi_[d] != other.hi_[d]) return false;
  return true;
}

GridField::GridField(const ChartGrid& grid, std::vector<int> shape)
    : grid_(grid), shape_(std::move(shape)) {
  comps_ = 1;
  for (int s : shape_) {
    if (s < 1) throw GridError("field shape entries must be positive");
    comps_ *= static_cast<std::size_t>(s);
  }
  data_.assign(grid.num_nodes() * comps_, 0.0);
}

bool GridField::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void GridField::require_finite(const std::string& what) const {
  if (!all_finite()) throw GridError(what + ": non-finite values");
}

double GridField::sup_norm() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

GridField axpy(double a, const GridField& x, double b, const GridField& y) {
  if (!x.grid().same_layout(y.grid()) || x.shape() != y.shape())
    throw GridError("axpy: field layouts differ");
  GridField out(x.grid(), x.shape());
  const std::size_t total = x.raw().size();
  for (std::size_t i = 0; i < total; ++i) out.raw()[i] = a * x.raw()[i] + b * y.raw()[i];
  return out;
}

GridField partial(const GridField& field, int axis, Exec mode) {
  const ChartGrid& grid = field.grid();
  if (axis < 0 || axis >= grid.dim()) throw GridError("partial: axis out of range");
  GridField out(grid, field.shape());
  const double inv2h = 1.0 / (2.0 * grid.spacing(axis));
  const std::size_t comps = field.comps();

  for_each_index(
      grid.num_nodes(),
      [&](std::size_t node) {
        std::size_t up = grid.neighbor(node, axis, +1);
        std::size_t dn = grid.neighbor(node, axis, -1);
        std::span<double> o = out.at(node);
        if (up != ChartGrid::npos && dn != ChartGrid::npos) {
          std::span<const double> fu = field.at(up);
          std::span<const double> fd = field.at(dn);
          for (std::size_t c = 0; c < comps; ++c) o[c] = (fu[c] - fd[c]) * inv2h;
        } else if (dn == ChartGrid::npos) {
          // Second-order one-sided closure whose truncation error matches the
          // central stencil through the h^3 term (+h^2/6 f''', no h^3 part).
          // The error field then stays smooth across the boundary, which keeps
          // iterated derivatives second order up to third derivatives.
          std::span<const double> f0 = field.at(node);
          std::span<const double> f1 = field.at(grid.neighbor(node, axis, +1));
          std::span<const double> f2 = field.at(grid.neighbor(node, axis, +2));
          std::span<const double> f3 = field.at(grid.neighbor(node, axis, +3));
          std::span<const double> f4 = field.at(grid.neighbor(node, axis, +4));
          for (std::size_t c = 0; c < comps; ++c)
            o[c] = (-5.0 * f0[c] + 11.0 * f1[c] - 10.0 * f2[c] + 5.0 * f3[c] - f4[c]) * inv2h;
        } else {
          std::span<const double> f0 = field.at(node);
          std::span<const double> f1 = field.at(grid.neighbor(node, axis, -1));
          std::span<const double> f2 = field.at(grid.neighbor(node, axis, -2));
          std::span<const double> f3 = field.at(grid.neighbor(node, axis, -3));
          std::span<const double> f4 = field.at(grid.neighbor(node, axis, -4));
          for (std::size_t c = 0; c < comps; ++c)
            o[c] = (5.0 * f0[c] - 11.0 * f1[c] + 10.0 * f2[c] - 5.0 * f3[c] + f4[c]) * inv2h;
        }
      },
      mode);
  return out;
}

namespace {

// Per-edge step of the classical fourth-order rule; with the midpoint slope
// interpolated linearly it reduces to h/6 * (k0 + 4*kmid + k1).
void advance_edge(const ChartGrid& grid, const EdgeRhs& rhs, std::size_t from, std::size_t to,
                  std::vector<double>& value, std::vector<double>& k0, std::vector<double>& k1) {
  int axis = -1, step = 0;
  for (int d = 0; d < grid.dim(); ++d) {
    std::size_t up = grid.neighbor(from, d, +1);
    std::size_t dn = grid.neighbor(from, d, -1);
    if (up == to && axis < 0) {
      axis = d;
      step = +1;
    } else if (dn == to && axis < 0) {
      axis = d;
      step = -1;
    }
  }
  if (axis < 0) throw GridError("line_integrate: consecutive path nodes are not adjacent");
  const std::size_t comps = value.size();
  k0.resize(comps);
  k1.resize(comps);
  rhs(from, axis, k0);
  rhs(to, axis, k1);
  const double h = step * grid.spacing(axis);
  for (std::size_t c = 0; c < comps; ++c) {
    const double kmid = 0.5 * (k0[c] + k1[c]);
    value[c] += h / 6.0 * (k0[c] + 4.0 * kmid + k1[c]);
  }
}

}  // namespace

std::vector<double> line_integrate(const ChartGrid& grid, const EdgeRhs& rhs,
                                   std::span<const double> base_value,
                                   std::span<const std::size_t> path) {
  std::vector<double> value(base_value.begin(), base_value.end());
  if (path.size() < 2) return value;
  std::vector<double> k0, k1;
  for (std::size_t s = 0; s + 1 < path.size(); ++s)
    advance_edge(grid, rhs, path[s], path[s + 1], value, k0, k1);
  return value;
}

double loop_residual(const ChartGrid& grid, const EdgeRhs& rhs,
                     std::span<const double> base_value, std::span<const std::size_t> loop) {
  if (loop.size() < 2 || loop.front() != loop.back())
    throw GridError("loop_residual: loop is not closed");
  std::vector<double> end = line_integrate(grid, rhs, base_value, loop);
  double diff = 0.0, base = 0.0;
  for (std::size_t c = 0; c < end.size(); ++c) {
    diff = std::max(diff, std::abs(end[c] - base_value[c]));
    base = std::max(base, std::abs(base_value[c]));
  }
  return diff / std::max(1.0, base);
}

std::vector<std::size_t> cell_loop(const ChartGrid& grid, std::size_t node, int axis_a,
                                   int axis_b) {
  std::size_t a = grid.neighbor(node, axis_a, +1);
  if (a == ChartGrid::npos) throw GridError("cell_loop: cell leaves the grid");
  std::size_t ab = grid.neighbor(a, axis_b, +1);
  if (ab == ChartGrid::npos) throw GridError("cell_loop: cell leaves the grid");
  std::size_t b = grid.neighbor(node, axis_b, +1);
  return {node, a, ab, b, node};
}

GridField sweep_integrate(const ChartGrid& grid, const EdgeRhs& rhs, std::vector<int> shape,
                          std::span<const double> base_value, std::size_t base,
                          std::span<const int> axis_order, Exec mode) {
  if (static_cast<int>(axis_order.size()) != grid.dim())
    throw GridError("sweep_integrate: axis order must list every axis once");
  GridField out(grid, std::move(shape));
  const std::size_t comps = out.comps();
  if (base_value.size() != comps) throw GridError("sweep_integrate: base value shape mismatch");
  std::copy(base_value.begin(), base_value.end(), out.at(base).begin());

  std::vector<int> base_idx(grid.dim());
  grid.unflat(base, base_idx.data());

  // Stage k extends the already-integrated slab along axis_order[k]; every
  // line in a stage starts from an assigned node and walks independently.
  std::vector<std::size_t> seeds{base};
  for (std::size_t stage = 0; stage < axis_order.size(); ++stage) {
    const int axis = axis_order[stage];
    const int res = grid.resolution(axis);
    const int b = base_idx[axis];
    for_each_index(
        seeds.size(),
        [&](std::size_t s) {
          std::size_t start = seeds[s];
          std::vector<double> value(out.at(start).begin(), out.at(start).end());
          std::vector<double> k0, k1;
          if (grid.periodic(axis)) {
            std::size_t cur = start;
            for (int t = 1; t < res; ++t) {
              std::size_t nxt = grid.neighbor(cur, axis, +1);
              advance_edge(grid, rhs, cur, nxt, value, k0, k1);
              std::copy(value.begin(), value.end(), out.at(nxt).begin());
              cur = nxt;
            }
          } else {
            std::size_t cur = start;
            for (int t = b + 1; t < res; ++t) {
              std::size_t nxt = grid.neighbor(cur, axis, +1);
              advance_edge(grid, rhs, cur, nxt, value, k0, k1);
              std::copy(value.begin(), value.end(), out.at(nxt).begin());
              cur = nxt;
            }
            value.assign(out.at(start).begin(), out.at(start).end());
            cur = start;
            for (int t = b - 1; t >= 0; --t) {
              std::size_t nxt = grid.neighbor(cur, axis, -1);
              advance_edge(grid, rhs, cur, nxt, value, k0, k1);
              std::copy(value.begin(), value.end(), out.at(nxt).begin());
              cur = nxt;
            }
          }
        },
        mode);
    if (stage + 1 < axis_order.size()) {
      std::vector<std::size_t> next;
      next.reserve(seeds.size() * res);
      for (std::size_t s : seeds) {
        if (grid.periodic(axis)) {
          std::size_t cur = s;
          for (int t = 0; t < res; ++t) {
            next.push_back(cur);
            cur = grid.neighbor(cur, axis, +1);
          }
        } else {
          for (int t = 0; t < res; ++t) {
            std::size_t cur = grid.neighbor(s, axis, t - b);
            next.push_back(cur);
          }
        }
      }
      seeds = std::move(next);
    }
  }
  return out;
}

}  // namespace bendkit
