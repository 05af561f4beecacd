#include <cmath>

#include <Eigen/Dense>

#include "bendkit/classify.hpp"
#include "bendkit/fundsys.hpp"
#include "bendkit/products.hpp"
#include "common.hpp"
#include "doctest.h"

using namespace bendkit;

namespace {

ImmersionScene circle_scene(int res) { return scenes::make_scene("circle", {}, res); }

ImmersionScene line_scene(int res) {
  // one-dimensional factor used only for product assembly
  ImmersionScene scene;
  scene.grid = tst::grid1(0.0, 1.0, res, false);
  scene.ambient_dim = 1;
  scene.label = "line";
  scene.map = tst::sample_vector(scene.grid, 1,
                                 [](const std::vector<double>& u, std::span<double> o) {
                                   o[0] = u[0];
                                 });
  return scene;
}

}  // namespace

TEST_CASE("circle x circle is the clifford torus") {
  auto [scene, ps] = extrinsic_product({circle_scene(32), circle_scene(32)});
  CHECK(scene.ambient_dim == 4);
  CHECK(scene.grid.dim() == 2);
  ImmersionScene torus = scenes::make_scene("torus", {}, 32);
  CHECK(tst::sup_diff(scene.map, torus.map) <= 1e-14);

  FramedGeometry geom = build_geometry(scene);
  CHECK(cross_alpha_residual(geom, ps) <= 10.0 * tst::h2(scene.grid));
}

TEST_CASE("circle x line is the cylinder") {
  auto [scene, ps] = extrinsic_product({circle_scene(32), line_scene(32)});
  ImmersionScene cyl = scenes::make_scene("cylinder", {}, 32);
  CHECK(tst::sup_diff(scene.map, cyl.map) <= 1e-14);
  FramedGeometry geom = build_geometry(scene);
  CHECK(cross_alpha_residual(geom, ps) <= 10.0 * tst::h2(scene.grid));
}

TEST_CASE("line x line is a flat plane") {
  auto [scene, ps] = extrinsic_product({line_scene(16), line_scene(16)});
  CHECK(scene.ambient_dim == 2);
  CHECK_THROWS_AS(build_geometry(scene), GeometryError);  // no codimension to frame
}

TEST_CASE("adapted bending has no cross-factor beta") {
  auto [scene, ps] = extrinsic_product({circle_scene(32), circle_scene(32)});
  FramedGeometry geom = build_geometry(scene);
  scenes::Params k2;
  k2.num["k"] = 2;
  BendingField T = scenes::make_bending(scene, "circle_fourier", k2);  // tau(1st) + 0
  auto [derived, pair] = associated_pair(geom, T);
  CHECK(adaptedness_residual(geom, pair, ps) <= 10.0 * tst::h2(scene.grid));
}

TEST_CASE("killing bendings stay adapted even when the generator mixes blocks") {
  auto [scene, ps] = extrinsic_product({circle_scene(32), circle_scene(32)});
  FramedGeometry geom = build_geometry(scene);
  std::vector<double> D(16, 0.0), v(4, 0.0);
  D[0 * 4 + 2] = 1.0;  // rotation through both ambient blocks
  D[2 * 4 + 0] = -1.0;
  BendingField T = scenes::make_killing(scene, D, v);
  auto [derived, pair] = associated_pair(geom, T);
  // beta = D^N alpha has no cross terms because alpha has none
  CHECK(adaptedness_residual(geom, pair, ps) <= 10.0 * tst::h2(scene.grid));
}

TEST_CASE("s-nullity on catalog scenes") {
  SUBCASE("clifford torus: nu_1 = 1") {
    FramedGeometry geom = build_geometry(scenes::make_scene("torus", {}, 16));
    SNullity nu1 = s_nullity(geom, 0, 1);
    CHECK(nu1.value == 1);
    SNullity nu2 = s_nullity(geom, 0, 2);
    CHECK(nu2.value == 0);
    CHECK_THROWS_AS(s_nullity(geom, 0, 3), ProductError);
  }
  SUBCASE("plane: everything is in the nullity") {
    FramedGeometry geom = build_geometry(scenes::make_scene("plane", {}, 12));
    SNullity nu1 = s_nullity(geom, 0, 1);
    CHECK(nu1.value == 2);
  }
  SUBCASE("nullity shrinks as the subspace grows") {
    FramedGeometry geom = build_geometry(tst::twisted_graph_r4(12));
    int prev = -1;
    for (int s = 1; s <= geom.p; ++s) {
      int nu = s_nullity(geom, 5, s).value;
      if (prev >= 0) CHECK(nu <= prev);
      prev = nu;
    }
  }
}

TEST_CASE("refinement finds a nullity direction that is not axis aligned") {
  // on this scene det(u1 A_1 + u2 A_2) vanishes along generic directions only
  ImmersionScene scene = tst::twisted_graph_r4(16);
  FramedGeometry geom = build_geometry(scene);
  REQUIRE(geom.p == 2);
  std::size_t node = geom.grid().num_nodes() / 2;

  // oracle: fine scan over normal directions for a kernel of the pencil
  const int n = geom.n;
  std::span<const double> al = geom.alpha.at(node);
  auto pencil_sigma_min = [&](double t) {
    Eigen::Matrix2d M;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        M(k, j) = std::cos(t) * al[(k * n + j) * 2 + 0] + std::sin(t) * al[(k * n + j) * 2 + 1];
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(M);
    return svd.singularValues()(1) / svd.singularValues()(0);
  };
  double best_t = 0.0, best_ratio = 1.0;
  for (int k = 0; k < 20000; ++k) {
    double t = k * std::numbers::pi / 20000.0;
    double r = pencil_sigma_min(t);
    if (r < best_ratio) {
      best_ratio = r;
      best_t = t;
    }
  }
  REQUIRE(best_ratio < 1e-3);  // a near-kernel direction exists
  // and it is far from both frame axes
  REQUIRE(std::min({std::abs(std::sin(best_t)), std::abs(std::cos(best_t))}) > 0.2);

  SNullity nu = s_nullity(geom, node, 1);
  CHECK(nu.value == 1);
  // the certificate is itself a kernel direction of the pencil (the zero set
  // has two branches, so it need not coincide with the scanned one) and is
  // far from the frame axes
  double cert_t = std::atan2(nu.subspace[1], nu.subspace[0]);
  CHECK(pencil_sigma_min(cert_t) <= 1e-6);
  CHECK(std::min(std::abs(nu.subspace[0]), std::abs(nu.subspace[1])) > 0.2);
}

TEST_CASE("sphere x sphere nullities and hypothesis checks") {
  scenes::Params params;
  ImmersionScene s1 = scenes::make_scene("sphere", params, 12);
  ImmersionScene s2 = scenes::make_scene("sphere", params, 12);
  auto [scene, ps] = extrinsic_product({s1, s2});
  CHECK(scene.ambient_dim == 6);
  FramedGeometry geom = build_geometry(scene);
  CHECK(geom.p == 2);

  std::size_t probe = geom.grid().num_nodes() / 2;
  CHECK(s_nullity(geom, probe, 1).value == 2);
  CHECK(s_nullity(geom, probe, 2).value == 0);

  ProductHypotheses rep = product_hypotheses(geom, ps);
  CHECK(rep.pass_factor_codim);  // 1 < 2 per factor
  CHECK(rep.pass_ns);            // 2 < 3 and 0 < 2
  CHECK(!rep.pass_n2s);          // 2 < 2 fails at s = 1
  CHECK(rep.checks[0].nu == 2);
  CHECK(rep.checks[1].nu == 0);
}

TEST_CASE("plane x plane has maximal nullities and fails every bound") {
  ImmersionScene p1 = scenes::make_scene("plane", {}, 8);
  ImmersionScene p2 = scenes::make_scene("plane", {}, 8);
  auto [scene, ps] = extrinsic_product({p1, p2});
  FramedGeometry geom = build_geometry(scene);
  CHECK(geom.p == 2);
  ProductHypotheses rep = product_hypotheses(geom, ps);
  CHECK(rep.checks[0].nu == 4);  // alpha vanishes, everything is in the nullity
  CHECK(rep.checks[1].nu == 4);
  CHECK(!rep.pass_ns);
  CHECK(!rep.pass_n2s);
}

TEST_CASE("torus as a product fails the codimension hypotheses") {
  auto [scene, ps] = extrinsic_product({circle_scene(16), circle_scene(16)});
  FramedGeometry geom = build_geometry(scene);
  ProductHypotheses rep = product_hypotheses(geom, ps);
  CHECK(rep.checks[0].nu == 1);
  CHECK(!rep.pass_ns);             // 1 < 2 - 1 fails
  CHECK(!rep.pass_factor_codim);   // 1 < 1 fails per factor
  CHECK(!rep.pass_aggregate_codim);  // 2 < 2 fails
}

TEST_CASE("splitting a direct-sum bending recovers the factors") {
  ImmersionScene c1 = circle_scene(32), c2 = circle_scene(32);
  auto [scene, ps] = extrinsic_product({c1, c2});
  FramedGeometry geom = build_geometry(scene);

  scenes::Params k2, k3;
  k2.num["k"] = 2;
  k3.num["k"] = 3;
  BendingField t1 = scenes::make_bending(c1, "circle_fourier", k2);
  BendingField t2 = scenes::make_bending(c2, "circle_fourier", k3);
  BendingField T = direct_sum_bending(scene, ps, {t1, t2});

  SplitResult split = split_bending(geom, ps, T);
  const double tol = 50.0 * tst::h2(scene.grid);
  CHECK(split.residual <= tol);

  // factor fields match the originals up to a per-factor trivial bending
  for (int f = 0; f < 2; ++f) {
    const BendingField& orig = f == 0 ? t1 : t2;
    BendingField diff;
    diff.label = "factor-diff";
    diff.T = axpy(1.0, split.factors[f].T, -1.0, orig.T);
    KillingFit fit = fit_killing(ps.factors[f], diff);
    CHECK(fit.residual <= tol);
  }

  // reassembly reproduces the bending modulo one global trivial bending
  BendingField re = direct_sum_bending(scene, ps, {split.factors[0], split.factors[1]});
  BendingField diff;
  diff.label = "reassembly-diff";
  diff.T = axpy(1.0, re.T, -1.0, T.T);
  KillingFit fit = fit_killing(scene, diff);
  CHECK(fit.residual <= tol);
}

TEST_CASE("splitting a block-diagonal killing bending returns factor killing fields") {
  ImmersionScene c1 = circle_scene(24), c2 = circle_scene(24);
  auto [scene, ps] = extrinsic_product({c1, c2});
  FramedGeometry geom = build_geometry(scene);
  std::vector<double> D(16, 0.0), v{0.1, 0.0, -0.2, 0.3};
  D[0 * 4 + 1] = 1.0;
  D[1 * 4 + 0] = -1.0;
  D[2 * 4 + 3] = -0.7;
  D[3 * 4 + 2] = 0.7;
  BendingField T = scenes::make_killing(scene, D, v);
  SplitResult split = split_bending(geom, ps, T);
  const double tol = 50.0 * tst::h2(scene.grid);
  CHECK(split.residual <= tol);
  for (int f = 0; f < 2; ++f) {
    KillingFit fit = fit_killing(ps.factors[f], split.factors[f]);
    CHECK(fit.residual <= tol);
  }
}

TEST_CASE("three circle factors: generic codimension-three nullities") {
  ImmersionScene c = circle_scene(12);
  auto [scene, ps] = extrinsic_product({c, c, c});
  CHECK(scene.grid.dim() == 3);
  CHECK(scene.ambient_dim == 6);
  FramedGeometry geom = build_geometry(scene);
  CHECK(geom.p == 3);
  CHECK(cross_alpha_residual(geom, ps) <= 10.0 * tst::h2(scene.grid));

  std::size_t probe = geom.grid().num_nodes() / 3;
  CHECK(s_nullity(geom, probe, 1).value == 2);
  CHECK(s_nullity(geom, probe, 2).value == 1);
  CHECK(s_nullity(geom, probe, 3).value == 0);

  // a killing bending still verifies on the three-dimensional chart
  std::vector<double> D(36, 0.0), v(6, 0.0);
  D[0 * 6 + 3] = 1.0;
  D[3 * 6 + 0] = -1.0;
  BendingField T = scenes::make_killing(scene, D, v);
  SystemReport rep = verify(geom, associated_pair(geom, T).second);
  CHECK(rep.pass);
}

TEST_CASE("split refuses its hypotheses honestly") {
  SUBCASE("first normal space not full") {
    // two lines in R^2 each: the product plane has alpha = 0
    ImmersionScene l1, l2;
    l1.grid = tst::grid1(0.0, 1.0, 12, false);
    l1.ambient_dim = 2;
    l1.label = "line_r2";
    l1.map = tst::sample_vector(l1.grid, 2,
                                [](const std::vector<double>& u, std::span<double> o) {
                                  o[0] = u[0];
                                  o[1] = 0.0;
                                });
    l2 = l1;
    auto [scene, ps] = extrinsic_product({l1, l2});
    FramedGeometry geom = build_geometry(scene);
    BendingField T;
    T.label = "zero";
    T.T = GridField(scene.grid, {4});
    CHECK_THROWS_AS(split_bending(geom, ps, T), ProductError);
  }
  SUBCASE("not a bending") {
    auto [scene, ps] = extrinsic_product({circle_scene(16), circle_scene(16)});
    FramedGeometry geom = build_geometry(scene);
    BendingField T;
    T.label = "position";
    T.T = GridField(scene.grid, {4});
    T.T.raw() = scene.map.raw();
    CHECK_THROWS_AS(split_bending(geom, ps, T), ProductError);
  }
}

TEST_CASE("zero bending splits into zero factors") {
  auto [scene, ps] = extrinsic_product({circle_scene(16), circle_scene(16)});
  FramedGeometry geom = build_geometry(scene);
  BendingField T;
  T.label = "zero";
  T.T = GridField(scene.grid, {4});
  SplitResult split = split_bending(geom, ps, T);
  CHECK(split.factors[0].T.sup_norm() <= 1e-13);
  CHECK(split.factors[1].T.sup_norm() <= 1e-13);
}

TEST_CASE("cross tensors vanish along the whole adapted chain") {
  ImmersionScene c1 = circle_scene(32), c2 = circle_scene(32);
  auto [scene, ps] = extrinsic_product({c1, c2});
  FramedGeometry geom = build_geometry(scene);
  scenes::Params k2, k3;
  k2.num["k"] = 2;
  k3.num["k"] = 3;
  BendingField T = direct_sum_bending(
      scene, ps,
      {scenes::make_bending(c1, "circle_fourier", k2), scenes::make_bending(c2, "circle_fourier", k3)});
  auto [derived, pair] = associated_pair(geom, T);
  const double tol = 10.0 * tst::h2(scene.grid) * bending_scale(geom, derived.L);

  CHECK(cross_alpha_residual(geom, ps) <= tol);
  CHECK(adaptedness_residual(geom, pair, ps) <= tol);

  // L blocks: factor-1 axes must not move the factor-2 ambient block
  double worstL = 0.0;
  for (std::size_t node = 0; node < scene.grid.num_nodes(); ++node) {
    std::span<const double> L = derived.L.at(node);
    worstL = std::max({worstL, std::abs(L[0 * 4 + 2]), std::abs(L[0 * 4 + 3]),
                       std::abs(L[1 * 4 + 0]), std::abs(L[1 * 4 + 1])});
  }
  CHECK(worstL <= tol);

  // cross components of E: E(factor-1 direction, factor-2 normal) etc.
  double worstE = 0.0;
  for (std::size_t node = 0; node < scene.grid.num_nodes(); ++node) {
    std::span<const double> Ev = pair.E.at(node);
    // normal a=0 belongs to block 1, a=1 to block 2 on this product
    worstE = std::max({worstE, std::abs(Ev[(0 * 2 + 1) * 2 + 0]),
                       std::abs(Ev[(1 * 2 + 0) * 2 + 1])});
  }
  CHECK(worstE <= tol);
}
