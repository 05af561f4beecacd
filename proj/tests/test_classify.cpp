#include <cmath>
#include <random>

#include "bendkit/classify.hpp"
#include "bendkit/fundsys.hpp"
#include "common.hpp"
#include "doctest.h"

using namespace bendkit;

TEST_CASE("killing fit recovers an exact rotation generator") {
  ImmersionScene scene = scenes::make_scene("cylinder", {}, 32);
  BendingField T = scenes::make_bending(scene, "killing", {});  // rotation in (0,1)
  KillingFit fit = fit_killing(scene, T);
  CHECK(fit.residual <= 1e-9);
  CHECK(!fit.rank_deficient);
  CHECK(fit.D[0 * 3 + 1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.D[1 * 3 + 0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::abs(fit.v[0]) <= 1e-9);
}

TEST_CASE("killing fit recovers a pure translation") {
  ImmersionScene scene = scenes::make_scene("torus", {}, 16);
  scenes::Params params;
  params.str["gen"] = "trans";
  params.num["axis"] = 2;
  params.num["amp"] = 0.75;
  BendingField T = scenes::make_bending(scene, "killing", params);
  KillingFit fit = fit_killing(scene, T);
  CHECK(fit.residual <= 1e-12);
  for (double d : fit.D) CHECK(std::abs(d) <= 1e-12);
  CHECK(fit.v[2] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("fourier bending is far from every killing field") {
  ImmersionScene scene = scenes::make_scene("cylinder", {}, 64);
  scenes::Params k2;
  k2.num["k"] = 2;
  BendingField T = scenes::make_bending(scene, "circle_fourier", k2);
  KillingFit fit = fit_killing(scene, T);
  CHECK(fit.residual >= 1e-2);
}

TEST_CASE("adding a killing field never flips the verdict") {
  ImmersionScene scene = scenes::make_scene("cylinder", {}, 32);
  scenes::Params k2;
  k2.num["k"] = 2;
  BendingField T = scenes::make_bending(scene, "circle_fourier", k2);
  KillingFit before = fit_killing(scene, T);

  std::vector<double> D(9, 0.0), v{0.2, -0.1, 0.4};
  D[0 * 3 + 2] = 0.9;
  D[2 * 3 + 0] = -0.9;
  BendingField K = scenes::make_killing(scene, D, v);
  BendingField sum;
  sum.label = "shifted";
  sum.T = axpy(1.0, T.T, 1.0, K.T);
  KillingFit after = fit_killing(scene, sum);
  // the fit absorbs the added generator; scaling of the misfit tracks sup|T|
  double s0 = std::max(1.0, T.T.sup_norm());
  double s1 = std::max(1.0, sum.T.sup_norm());
  CHECK(std::abs(after.residual * s1 - before.residual * s0) <= 1e-9 * s1);

  // the verdict itself never flips under the gauge shift
  ImmersionScene fine = scenes::make_scene("cylinder", {}, 64);
  FramedGeometry geom = build_geometry(fine);
  const double tol = tol_trivial(geom);
  BendingField Tf = scenes::make_bending(fine, "circle_fourier", k2);
  BendingField Kf = scenes::make_killing(fine, D, v);
  BendingField sumf;
  sumf.T = axpy(1.0, Tf.T, 1.0, Kf.T);
  CHECK((fit_killing(fine, Tf).residual <= tol) == (fit_killing(fine, sumf).residual <= tol));
  CHECK((fit_killing(fine, Kf).residual <= tol) == true);
}

TEST_CASE("rank deficiency is reported when the scene cannot see a parameter") {
  scenes::Params params;
  params.num["m"] = 4;
  ImmersionScene scene = scenes::make_scene("plane", params, 12);
  std::vector<double> D(16, 0.0), v(4, 0.0);
  D[0 * 4 + 1] = 1.0;
  D[1 * 4 + 0] = -1.0;
  BendingField T = scenes::make_killing(scene, D, v);
  KillingFit fit = fit_killing(scene, T);
  CHECK(fit.rank_deficient);  // the (2,3)-rotation never moves this plane
  CHECK(fit.residual <= 1e-9);
}

TEST_CASE("killing pairs are classified trivial with the right C") {
  ImmersionScene scene = scenes::make_scene("torus", {}, 32);
  FramedGeometry geom = build_geometry(scene);
  std::vector<double> D(16, 0.0), v(4, 0.0);
  D[0 * 4 + 2] = 1.0;
  D[2 * 4 + 0] = -1.0;
  BendingField T = scenes::make_killing(scene, D, v);
  auto [derived, pair] = associated_pair(geom, T);
  PairTriviality triv = pair_triviality(geom, pair);
  const double tol = tol_trivial(geom);
  CHECK(triv.trivial(tol));

  // recovered C equals the normal part of the generator
  const int m = geom.m, p = geom.p;
  double worst = 0.0;
  for (std::size_t node = 0; node < scene.grid.num_nodes(); ++node) {
    std::span<const double> xi = geom.xi.at(node);
    std::span<const double> Cv = triv.C.at(node);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) {
        double want = 0.0;
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < m; ++c) want += xi[a * m + r] * D[r * m + c] * xi[b * m + c];
        worst = std::max(worst, std::abs(Cv[a * p + b] - want));
      }
  }
  CHECK(worst <= tol);
}

TEST_CASE("triviality detection works through a curved normal connection") {
  ImmersionScene scene = tst::twisted_graph_r4(32);
  FramedGeometry geom = build_geometry(scene);
  REQUIRE(geom.omega.sup_norm() > 0.05);
  std::vector<double> D(16, 0.0), v(4, 0.0);
  D[0 * 4 + 3] = 1.0;
  D[3 * 4 + 0] = -1.0;
  BendingField T = scenes::make_killing(scene, D, v);
  auto [derived, pair] = associated_pair(geom, T);
  PairTriviality triv = pair_triviality(geom, pair);
  CHECK(triv.trivial(tol_trivial(geom)));  // res_E needs the omega terms here

  GridField E = solve_E_from_beta(geom, pair.beta);
  CHECK(tst::sup_diff(E, pair.E) <= 50.0 * tst::h2(scene.grid) * pair_scale(geom, pair));
}

TEST_CASE("fourier pairs are classified nontrivial") {
  ImmersionScene scene = scenes::make_scene("cylinder", {}, 64);
  FramedGeometry geom = build_geometry(scene);
  scenes::Params k2;
  k2.num["k"] = 2;
  BendingField T = scenes::make_bending(scene, "circle_fourier", k2);
  auto [derived, pair] = associated_pair(geom, T);
  PairTriviality triv = pair_triviality(geom, pair);
  CHECK(triv.res_beta >= 1e-2);  // codimension one forces C = 0
  CHECK(!triv.trivial(tol_trivial(geom)));
}

TEST_CASE("zero pair is trivial with C = 0") {
  ImmersionScene scene = scenes::make_scene("torus", {}, 16);
  FramedGeometry geom = build_geometry(scene);
  AssociatedPair zero = make_pair_from_fields(geom, GridField(scene.grid, {2, 2, 2}),
                                              GridField(scene.grid, {2, 2, 2}));
  PairTriviality triv = pair_triviality(geom, zero);
  CHECK(triv.trivial(tol_trivial(geom)));
  CHECK(triv.C.sup_norm() <= 1e-12);
}

TEST_CASE("beta without alpha raises the impossible flag") {
  scenes::Params pm;
  pm.num["m"] = 4;
  ImmersionScene scene = scenes::make_scene("plane", pm, 12);
  FramedGeometry geom = build_geometry(scene);
  GridField beta(scene.grid, {2, 2, 2});
  for (std::size_t node = 0; node < scene.grid.num_nodes(); ++node) beta.at(node)[0] = 0.3;
  AssociatedPair pair =
      make_pair_from_fields(geom, std::move(beta), GridField(scene.grid, {2, 2, 2}));
  PairTriviality triv = pair_triviality(geom, pair);
  CHECK(triv.impossible);
  CHECK(!triv.trivial(tol_trivial(geom)));
}

TEST_CASE("E is reconstructed from beta on full first normal spaces") {
  ImmersionScene scene = scenes::make_scene("torus", {}, 32);
  FramedGeometry geom = build_geometry(scene);

  SUBCASE("killing pair") {
    std::vector<double> D(16, 0.0), v(4, 0.0);
    D[1 * 4 + 3] = 1.0;
    D[3 * 4 + 1] = -1.0;
    BendingField T = scenes::make_killing(scene, D, v);
    auto [derived, pair] = associated_pair(geom, T);
    GridField E = solve_E_from_beta(geom, pair.beta);
    CHECK(tst::sup_diff(E, pair.E) <= 50.0 * tst::h2(scene.grid) * pair_scale(geom, pair));
  }

  SUBCASE("product bending: fourier on the first circle factor") {
    scenes::Params k2;
    k2.num["k"] = 2;
    BendingField T = scenes::make_bending(scene, "circle_fourier", k2);
    auto [derived, pair] = associated_pair(geom, T);
    GridField E = solve_E_from_beta(geom, pair.beta);
    CHECK(tst::sup_diff(E, pair.E) <= 50.0 * tst::h2(scene.grid) * pair_scale(geom, pair));
  }
}

TEST_CASE("E solve refuses a degenerate first normal space") {
  ImmersionScene scene = scenes::make_scene("cylinder_r4", {}, 16);
  FramedGeometry geom = build_geometry(scene);
  GridField beta(scene.grid, {2, 2, 2});
  CHECK_THROWS_AS(solve_E_from_beta(geom, beta), ClassifyError);
}

TEST_CASE("codimension one forces E = 0") {
  ImmersionScene scene = scenes::make_scene("cylinder", {}, 16);
  FramedGeometry geom = build_geometry(scene);
  scenes::Params k2;
  k2.num["k"] = 2;
  BendingField T = scenes::make_bending(scene, "circle_fourier", k2);
  auto [derived, pair] = associated_pair(geom, T);
  GridField E = solve_E_from_beta(geom, pair.beta);
  CHECK(E.sup_norm() == 0.0);
}

TEST_CASE("perturbing E away from the unique solution raises the codazzi residual") {
  ImmersionScene scene = scenes::make_scene("torus", {}, 16);
  FramedGeometry geom = build_geometry(scene);
  scenes::Params k2;
  k2.num["k"] = 2;
  BendingField T = scenes::make_bending(scene, "circle_fourier", k2);
  auto [derived, pair] = associated_pair(geom, T);
  const double base = codazzi_residual(geom, pair);

  std::mt19937_64 rng(0x5EED);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = geom.n, p = geom.p;
  int raised = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    GridField E = pair.E;
    const double size = 0.5;
    for (std::size_t node = 0; node < scene.grid.num_nodes(); ++node) {
      std::span<double> Ev = E.at(node);
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a)
          for (int b = a + 1; b < p; ++b) {
            double d = size * gauss(rng);
            Ev[(i * p + a) * p + b] += d;
            Ev[(i * p + b) * p + a] -= d;  // keeps the compatibility condition
          }
    }
    AssociatedPair moved = make_pair_from_fields(geom, pair.beta, std::move(E));
    CHECK(compatibility_residual(geom, moved) <= 1e-10);
    if (codazzi_residual(geom, moved) > 2.0 * base) ++raised;
  }
  CHECK(raised == trials);
}
