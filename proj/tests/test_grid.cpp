#include <numeric>

#include "bendkit/grid.hpp"
#include "common.hpp"
#include "doctest.h"

using namespace bendkit;

TEST_CASE("grid rejects invalid axes") {
  CHECK_THROWS_AS(ChartGrid({{0.0, 1.0}}, {4}, {false}), GridError);
  CHECK_THROWS_AS(ChartGrid({{1.0, 1.0}}, {16}, {false}), GridError);
  ChartGrid g = tst::grid1(0.0, 1.0, 16, false);
  CHECK(g.spacing(0) == doctest::Approx(1.0 / 15.0));
  ChartGrid gp = tst::grid1(0.0, 1.0, 16, true);
  CHECK(gp.spacing(0) == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("periodic indexing wraps, bounded axes clip") {
  ChartGrid g = tst::grid2(0.0, 1.0, 0.0, 1.0, 8, 8, true, false);
  std::size_t node = g.flat(std::vector<int>{7, 0});
  CHECK(g.neighbor(node, 0, +1) == g.flat(std::vector<int>{0, 0}));
  CHECK(g.neighbor(node, 1, -1) == ChartGrid::npos);
}

TEST_CASE("partial of a constant field vanishes") {
  ChartGrid g = tst::grid2(0.0, 1.0, 0.0, 2.0, 16, 12, false, true);
  GridField c = tst::sample_scalar(g, [](const std::vector<double>&) { return 3.25; });
  for (int axis = 0; axis < 2; ++axis) {
    GridField d = partial(c, axis);
    CHECK(d.sup_norm() <= 1e-13);
  }
  CHECK_THROWS_AS(partial(c, 2), GridError);
}

TEST_CASE("central stencils are exact on quadratics") {
  ChartGrid g = tst::grid1(0.0, 1.0, 64, false);
  GridField u2 = tst::sample_scalar(g, [](const std::vector<double>& u) { return u[0] * u[0]; });
  GridField d = partial(u2, 0);
  double worst = 0.0;
  std::vector<double> u;
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    g.coords(node, u);
    worst = std::max(worst, std::abs(d.at(node)[0] - 2.0 * u[0]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("derivative of sine on the periodic circle") {
  ChartGrid g = tst::grid1(0.0, tst::kTwoPi, 32, true);
  GridField s = tst::sample_scalar(g, [](const std::vector<double>& u) { return std::sin(u[0]); });
  GridField d = partial(s, 0);
  double worst = 0.0;
  std::vector<double> u;
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    g.coords(node, u);
    worst = std::max(worst, std::abs(d.at(node)[0] - std::cos(u[0])));
  }
  CHECK(worst <= tst::h2(g) * 1.0);
}

TEST_CASE("partial is linear to machine precision") {
  ChartGrid g = tst::grid2(0.0, 1.0, 0.0, 1.0, 16, 16, false, false);
  GridField f = tst::sample_scalar(g, [](const std::vector<double>& u) {
    return std::sin(3.0 * u[0]) * std::exp(u[1]);
  });
  GridField gfld = tst::sample_scalar(g, [](const std::vector<double>& u) {
    return std::cos(2.0 * u[1]) + u[0] * u[0] * u[1];
  });
  const double a = 1.7, b = -0.4;
  GridField lhs = partial(axpy(a, f, b, gfld), 0);
  GridField rhs = axpy(a, partial(f, 0), b, partial(gfld, 0));
  CHECK(tst::sup_diff(lhs, rhs) <= 1e-13);
}

TEST_CASE("mixed partials commute at second order") {
  ChartGrid g = tst::grid2(0.0, 1.0, 0.0, 1.0, 32, 32, false, false);
  GridField f = tst::sample_scalar(g, [](const std::vector<double>& u) {
    return std::sin(3.0 * u[0] + 1.0) * std::cos(2.0 * u[1]);
  });
  GridField dxy = partial(partial(f, 0), 1);
  GridField dyx = partial(partial(f, 1), 0);
  CHECK(tst::sup_diff(dxy, dyx) <= 10.0 * tst::h2(g) * 30.0);
}

TEST_CASE("mixed partials commute on every catalog scene map") {
  for (const char* id : {"cylinder", "cylinder_r4", "torus", "sphere", "graph"}) {
    CAPTURE(id);
    bendkit::ImmersionScene scene = bendkit::scenes::make_scene(id, {}, 32);
    GridField dxy = partial(partial(scene.map, 0), 1);
    GridField dyx = partial(partial(scene.map, 1), 0);
    double scale = std::max(1.0, scene.map.sup_norm());
    CHECK(tst::sup_diff(dxy, dyx) <= 10.0 * tst::h2(scene.grid) * scale);
  }
}

TEST_CASE("line integration: zero slope returns the base value") {
  ChartGrid g = tst::grid1(0.0, 1.0, 16, false);
  EdgeRhs rhs = [](std::size_t, int, std::span<double> o) { o[0] = 0.0; };
  std::vector<std::size_t> path(16);
  std::iota(path.begin(), path.end(), 0);
  std::vector<double> base{2.5};
  auto v = line_integrate(g, rhs, base, path);
  CHECK(v[0] == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("line integration is exact for the gradient of a quadratic") {
  ChartGrid g = tst::grid1(0.0, 1.0, 32, false);
  EdgeRhs rhs = [&](std::size_t node, int, std::span<double> o) {
    std::vector<double> u;
    g.coords(node, u);
    o[0] = 2.0 * u[0];
  };
  std::vector<std::size_t> path;
  for (int i = 4; i <= 28; ++i) path.push_back(i);
  std::vector<double> base{1.0};
  auto v = line_integrate(g, rhs, base, path);
  double u0 = g.coord(0, 4), u1 = g.coord(0, 28);
  CHECK(std::abs(v[0] - (u1 * u1 - u0 * u0 + 1.0)) <= 1e-10);
}

TEST_CASE("full loop of cos on the circle returns the base value") {
  ChartGrid g = tst::grid1(0.0, tst::kTwoPi, 32, true);
  EdgeRhs rhs = [&](std::size_t node, int, std::span<double> o) {
    std::vector<double> u;
    g.coords(node, u);
    o[0] = std::cos(u[0]);
  };
  std::vector<std::size_t> loop;
  for (int i = 0; i <= 32; ++i) loop.push_back(i % 32);
  std::vector<double> base{0.75};
  auto v = line_integrate(g, rhs, base, loop);
  CHECK(std::abs(v[0] - 0.75) <= tst::h2(g) * 2.0);
}

TEST_CASE("reversed path cancels to machine precision") {
  ChartGrid g = tst::grid2(0.0, 1.0, 0.0, 1.0, 12, 12, false, false);
  EdgeRhs rhs = [&](std::size_t node, int axis, std::span<double> o) {
    std::vector<double> u;
    g.coords(node, u);
    o[0] = std::sin(u[0] + 2.0 * u[1]) + axis;
  };
  std::vector<std::size_t> fwd;
  for (int i = 0; i < 12; ++i) fwd.push_back(g.flat(std::vector<int>{i, 3}));
  std::vector<std::size_t> both = fwd;
  for (int i = 10; i >= 0; --i) both.push_back(g.flat(std::vector<int>{i, 3}));
  std::vector<double> base{0.3};
  auto v = line_integrate(g, rhs, base, both);
  CHECK(std::abs(v[0] - 0.3) <= 1e-13);
}

TEST_CASE("loop residual flags a broken mixed partial") {
  // rhs = u dv only: circulation around a cell equals its area
  ChartGrid g = tst::grid2(0.0, 1.0, 0.0, 1.0, 16, 16, false, false);
  EdgeRhs rhs = [&](std::size_t node, int axis, std::span<double> o) {
    std::vector<double> u;
    g.coords(node, u);
    o[0] = axis == 1 ? u[0] : 0.0;
  };
  std::vector<double> base{0.0};

  SUBCASE("exact gradient is closed") {
    EdgeRhs grad = [&](std::size_t node, int axis, std::span<double> o) {
      std::vector<double> u;
      g.coords(node, u);
      o[0] = axis == 0 ? 2.0 * u[0] * u[1] : u[0] * u[0];
    };
    auto loop = cell_loop(g, g.flat(std::vector<int>{4, 5}), 0, 1);
    CHECK(loop_residual(g, grad, base, loop) <= 1e-10);
  }

  SUBCASE("u dv picks up the enclosed area") {
    auto loop = cell_loop(g, g.flat(std::vector<int>{4, 5}), 0, 1);
    double r = loop_residual(g, rhs, base, loop);
    double area = g.spacing(0) * g.spacing(1);
    CHECK(r == doctest::Approx(area).epsilon(1e-10));
    CHECK(r > 10.0 * tst::h2(g) * 1e-3);
  }

  SUBCASE("open loop is rejected") {
    std::vector<std::size_t> open{0, 1, 2};
    CHECK_THROWS_AS(loop_residual(g, rhs, base, open), GridError);
  }
}

TEST_CASE("paths must consist of unit grid steps") {
  ChartGrid g = tst::grid1(0.0, 1.0, 16, false);
  EdgeRhs rhs = [](std::size_t, int, std::span<double> o) { o[0] = 1.0; };
  std::vector<double> base{0.0};
  std::vector<std::size_t> jumpy{0, 2, 4};
  CHECK_THROWS_AS(line_integrate(g, rhs, base, jumpy), GridError);
}

TEST_CASE("sweep integration reproduces a potential") {
  ChartGrid g = tst::grid2(0.0, 1.0, 0.0, 1.0, 24, 24, false, false);
  auto pot = [](double x, double y) { return x * x * y + 0.5 * y * y; };
  EdgeRhs rhs = [&](std::size_t node, int axis, std::span<double> o) {
    std::vector<double> u;
    g.coords(node, u);
    o[0] = axis == 0 ? 2.0 * u[0] * u[1] : u[0] * u[0] + u[1];
  };
  std::size_t base = g.flat(std::vector<int>{3, 7});
  std::vector<double> u0;
  g.coords(base, u0);
  std::vector<double> bv{pot(u0[0], u0[1])};
  std::vector<int> order{0, 1};
  GridField F = sweep_integrate(g, rhs, {1}, bv, base, order);
  double worst = 0.0;
  std::vector<double> u;
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    g.coords(node, u);
    worst = std::max(worst, std::abs(F.at(node)[0] - pot(u[0], u[1])));
  }
  CHECK(worst <= 5.0 * tst::h2(g));
}
