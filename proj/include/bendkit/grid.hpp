#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bendkit/parallel.hpp"

namespace bendkit {

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rectangular coordinate chart. Periodic axes identify index r with index 0
// (the upper bound is excluded); non-periodic axes include both endpoints.
class ChartGrid {
 public:
  ChartGrid() = default;
  ChartGrid(std::vector<std::array<double, 2>> bounds, std::vector<int> resolution,
            std::vector<bool> periodic);

  int dim() const noexcept { return dim_; }
  std::size_t num_nodes() const noexcept { return num_nodes_; }
  int resolution(int axis) const { return res_[axis]; }
  const std::vector<int>& resolution() const noexcept { return res_; }
  bool periodic(int axis) const { return periodic_[axis] != 0; }
  double lower(int axis) const { return lo_[axis]; }
  double upper(int axis) const { return hi_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  double max_spacing() const;

  double coord(int axis, int index) const { return lo_[axis] + h_[axis] * index; }
  void coords(std::size_t node, std::vector<double>& out) const;

  std::size_t flat(std::span<const int> idx) const;
  void unflat(std::size_t node, std::vector<int>& idx) const;
  void unflat(std::size_t node, int* idx) const;

  // Flat index of the neighbor `steps` grid steps along `axis`, or npos when
  // the step leaves a non-periodic axis.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t neighbor(std::size_t node, int axis, int steps) const;

  bool same_layout(const ChartGrid& other) const;

 private:
  int dim_ = 0;
  std::vector<double> lo_, hi_, h_;
  std::vector<int> res_;
  std::vector<std::uint8_t> periodic_;
  std::vector<std::size_t> stride_;
  std::size_t num_nodes_ = 0;
};

// Sampled tensor field: one flat row-major value block per node. Owns a copy
// of its chart so fields stay valid independently of the scene they came from.
class GridField {
 public:
  GridField() = default;
  GridField(const ChartGrid& grid, std::vector<int> shape);

  const ChartGrid& grid() const { return grid_; }
  const std::vector<int>& shape() const noexcept { return shape_; }
  std::size_t comps() const noexcept { return comps_; }
  std::size_t num_nodes() const { return grid_.num_nodes(); }

  std::span<double> at(std::size_t node) { return {data_.data() + node * comps_, comps_}; }
  std::span<const double> at(std::size_t node) const {
    return {data_.data() + node * comps_, comps_};
  }
  double& at(std::size_t node, std::size_t comp) { return data_[node * comps_ + comp]; }
  double at(std::size_t node, std::size_t comp) const { return data_[node * comps_ + comp]; }

  std::vector<double>& raw() noexcept { return data_; }
  const std::vector<double>& raw() const noexcept { return data_; }

  bool all_finite() const;
  void require_finite(const std::string& what) const;
  double sup_norm() const;

 private:
  ChartGrid grid_;
  std::vector<int> shape_;
  std::size_t comps_ = 1;
  std::vector<double> data_;
};

GridField axpy(double a, const GridField& x, double b, const GridField& y);

// Second-order partial derivative along one axis: central stencils in the
// interior and across periodic wraps, one-sided second-order stencils on the
// two boundary layers of non-periodic axes.
GridField partial(const GridField& field, int axis, Exec mode = default_exec());

// Derivative provider for path integration: writes d(value)/d(coordinate)
// along `axis` at `node` into `out`.
using EdgeRhs = std::function<void(std::size_t node, int axis, std::span<double> out)>;

// Integrates `rhs` along a path of axis-aligned unit grid steps with the
// classical one-step fourth-order rule per edge (midpoint slope interpolated
// linearly between edge endpoints).
std::vector<double> line_integrate(const ChartGrid& grid, const EdgeRhs& rhs,
                                   std::span<const double> base_value,
                                   std::span<const std::size_t> path);

// Norm of the defect after traversing a closed loop, normalized by
// max(1, |base_value|).
double loop_residual(const ChartGrid& grid, const EdgeRhs& rhs,
                     std::span<const double> base_value, std::span<const std::size_t> loop);

// Closed loop around the elementary cell with lowest corner `node` in the
// (axis_a, axis_b) plane.
std::vector<std::size_t> cell_loop(const ChartGrid& grid, std::size_t node, int axis_a,
                                   int axis_b);

// Deterministic axis-ordered sweep integration of a field with per-node slopes
// given by `rhs`: the line through `base` along axis_order[0] first, then lines
// along axis_order[1] seeded from it, and so on. Lines within one stage are
// independent and run in parallel.
GridField sweep_integrate(const ChartGrid& grid, const EdgeRhs& rhs, std::vector<int> shape,
                          std::span<const double> base_value, std::size_t base,
                          std::span<const int> axis_order, Exec mode = default_exec());

}  // namespace bendkit
