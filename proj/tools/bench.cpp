// Benchmark: OpenMP kernels against the serial reference, with an exact
// agreement check on every compared quantity.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "bendkit/fundsys.hpp"
#include "bendkit/reconstruct.hpp"
#include "bendkit/scenes.hpp"

using namespace bendkit;
using clock_type = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn) {
  auto t0 = clock_type::now();
  fn();
  auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

double sup_diff(const GridField& a, const GridField& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i)
    w = std::max(w, std::abs(a.raw()[i] - b.raw()[i]));
  return w;
}

void row(const char* name, double serial_ms, double parallel_ms, double diff) {
  std::printf("%-28s %10.1f ms %10.1f ms %8.2fx   max|diff| = %g\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main(int argc, char** argv) {
  int res = argc > 1 ? std::atoi(argv[1]) : 128;
  std::printf("grid resolution %d per axis\n", res);
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  ImmersionScene scene = scenes::make_scene("torus", {}, res);

  // spin up the thread pool before timing anything
  std::vector<double> warmup(scene.grid.num_nodes());
  for_each_index(
      warmup.size(), [&](std::size_t i) { warmup[i] = std::sqrt(double(i)); }, Exec::Parallel);

  GridField ds, dp;
  double t_ser = time_ms([&] { ds = partial(scene.map, 0, Exec::Serial); });
  double t_par = time_ms([&] { dp = partial(scene.map, 0, Exec::Parallel); });
  row("partial", t_ser, t_par, sup_diff(ds, dp));

  FramedGeometry gs, gp;
  t_ser = time_ms([&] { gs = build_geometry(scene, Exec::Serial); });
  t_par = time_ms([&] { gp = build_geometry(scene, Exec::Parallel); });
  row("build_geometry", t_ser, t_par, sup_diff(gs.alpha, gp.alpha));

  scenes::Params k2;
  k2.num["k"] = 2;
  BendingField T = scenes::make_bending(scene, "circle_fourier", k2);
  auto [derived, pair] = associated_pair(gp, T);

  SystemReport rs, rp;
  t_ser = time_ms([&] { rs = verify(gp, pair, fundsys_tol(gp), Exec::Serial); });
  t_par = time_ms([&] { rp = verify(gp, pair, fundsys_tol(gp), Exec::Parallel); });
  row("fundamental_system", t_ser, t_par,
      std::max({std::abs(rs.gauss - rp.gauss), std::abs(rs.codazzi - rp.codazzi),
                std::abs(rs.ricci - rp.ricci)}));

  GridField Ms, Mp;
  t_ser = time_ms([&] { Ms = endo_slopes(gp, pair, Exec::Serial); });
  t_par = time_ms([&] { Mp = endo_slopes(gp, pair, Exec::Parallel); });
  row("endo_slopes", t_ser, t_par, sup_diff(Ms, Mp));

  return 0;
}
