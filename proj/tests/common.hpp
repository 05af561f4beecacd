#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "bendkit/scenes.hpp"

namespace tst {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline bendkit::ChartGrid grid1(double a, double b, int res, bool periodic) {
  return bendkit::ChartGrid({{a, b}}, {res}, {periodic});
}

inline bendkit::ChartGrid grid2(double a0, double b0, double a1, double b1, int r0, int r1,
                                bool p0, bool p1) {
  return bendkit::ChartGrid({{a0, b0}, {a1, b1}}, {r0, r1}, {p0, p1});
}

inline double h2(const bendkit::ChartGrid& grid) {
  double h = grid.max_spacing();
  return h * h;
}

// Scalar field from a callable on chart coordinates.
template <class F>
bendkit::GridField sample_scalar(const bendkit::ChartGrid& grid, F&& f) {
  bendkit::GridField out(grid, {1});
  std::vector<double> u;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    grid.coords(node, u);
    out.at(node)[0] = f(u);
  }
  return out;
}

template <class F>
bendkit::GridField sample_vector(const bendkit::ChartGrid& grid, int m, F&& f) {
  bendkit::GridField out(grid, {m});
  std::vector<double> u;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    grid.coords(node, u);
    f(u, out.at(node));
  }
  return out;
}

// Immersion used to exercise a curved normal bundle: shape operators of the
// two normals do not commute.
inline bendkit::ImmersionScene twisted_graph_r4(int res) {
  bendkit::ImmersionScene scene;
  scene.grid = grid2(-0.5, 0.5, -0.5, 0.5, res, res, false, false);
  scene.ambient_dim = 4;
  scene.label = "twisted_graph_r4";
  scene.map = sample_vector(scene.grid, 4, [](const std::vector<double>& u, std::span<double> o) {
    o[0] = u[0];
    o[1] = u[1];
    o[2] = 0.5 * u[0] * u[0] + u[1] * u[1];
    o[3] = u[0] * u[1];
  });
  return scene;
}

inline double sup_diff(const bendkit::GridField& a, const bendkit::GridField& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i)
    w = std::max(w, std::abs(a.raw()[i] - b.raw()[i]));
  return w;
}

}  // namespace tst
