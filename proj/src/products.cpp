#include "bendkit/products.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace bendkit {

int ProductStructure::factor_of_axis(int axis) const {
  for (int f = 0; f + 1 < static_cast<int>(axis_offset.size()); ++f)
    if (axis >= axis_offset[f] && axis < axis_offset[f + 1]) return f;
  throw ProductError("axis outside the product structure");
}

std::pair<ImmersionScene, ProductStructure> extrinsic_product(
    const std::vector<ImmersionScene>& factors) {
  if (factors.empty()) throw ProductError("extrinsic product needs at least one factor");
  ProductStructure ps;
  ps.factors = factors;
  ps.axis_offset.assign(1, 0);
  ps.block_offset.assign(1, 0);
  std::vector<std::array<double, 2>> bounds;
  std::vector<int> res;
  std::vector<bool> periodic;
  std::string label = "product:";
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const ChartGrid& fg = factors[f].grid;
    for (int d = 0; d < fg.dim(); ++d) {
      bounds.push_back({fg.lower(d), fg.upper(d)});
      res.push_back(fg.resolution(d));
      periodic.push_back(fg.periodic(d));
    }
    ps.axis_offset.push_back(ps.axis_offset.back() + fg.dim());
    ps.block_offset.push_back(ps.block_offset.back() + factors[f].ambient_dim);
    label += (f ? "," : "") + factors[f].label;
  }

  ImmersionScene scene;
  scene.grid = ChartGrid(bounds, res, periodic);
  scene.ambient_dim = ps.block_offset.back();
  scene.label = label;
  scene.map = GridField(scene.grid, {scene.ambient_dim});

  const int n = scene.grid.dim();
  std::vector<int> idx(n);
  std::vector<int> fidx;
  for (std::size_t node = 0; node < scene.grid.num_nodes(); ++node) {
    scene.grid.unflat(node, idx.data());
    std::span<double> out = scene.map.at(node);
    for (std::size_t f = 0; f < factors.size(); ++f) {
      const ChartGrid& fg = factors[f].grid;
      fidx.assign(idx.begin() + ps.axis_offset[f], idx.begin() + ps.axis_offset[f + 1]);
      std::size_t fnode = fg.flat(fidx);
      std::span<const double> src = factors[f].map.at(fnode);
      for (int c = 0; c < factors[f].ambient_dim; ++c) out[ps.block_offset[f] + c] = src[c];
    }
  }
  return {std::move(scene), std::move(ps)};
}

double cross_alpha_residual(const FramedGeometry& geomP, const ProductStructure& ps, Exec mode) {
  const int n = geomP.n, p = geomP.p;
  const double scale = std::max(1.0, geomP.alpha_inf);
  return max_over(
             geomP.grid().num_nodes(),
             [&](std::size_t node) {
               std::span<const double> al = geomP.alpha.at(node);
               double w = 0.0;
               for (int i = 0; i < n; ++i)
                 for (int j = 0; j < n; ++j) {
                   if (ps.factor_of_axis(i) == ps.factor_of_axis(j)) continue;
                   for (int a = 0; a < p; ++a)
                     w = std::max(w, std::abs(al[(i * n + j) * p + a]));
                 }
               return w;
             },
             mode) /
         scale;
}

double adaptedness_residual(const FramedGeometry& geomP, const AssociatedPair& pair,
                            const ProductStructure& ps, Exec mode) {
  const int n = geomP.n, p = geomP.p;
  if (ps.axis_offset.back() != n)
    throw ProductError("product structure does not match the geometry");
  const double scale = pair_scale(geomP, pair);
  return max_over(
             geomP.grid().num_nodes(),
             [&](std::size_t node) {
               std::span<const double> be = pair.beta.at(node);
               double w = 0.0;
               for (int i = 0; i < n; ++i)
                 for (int j = 0; j < n; ++j) {
                   if (ps.factor_of_axis(i) == ps.factor_of_axis(j)) continue;
                   for (int a = 0; a < p; ++a)
                     w = std::max(w, std::abs(be[(i * n + j) * p + a]));
                 }
               return w;
             },
             mode) /
         scale;
}

namespace {

struct SNullityScore {
  int kernel = 0;
  double next_sigma = 0.0;  // smallest singular value not counted as kernel

  bool better_than(const SNullityScore& other) const {
    if (kernel != other.kernel) return kernel > other.kernel;
    return next_sigma < other.next_sigma - 1e-15;
  }
};

SNullityScore score_subspace(const Eigen::MatrixXd& U, const FramedGeometry& geom,
                             std::size_t node) {
  const int n = geom.n, p = geom.p;
  const int s = static_cast<int>(U.rows());
  std::span<const double> al = geom.alpha.at(node);
  Eigen::MatrixXd M(s * n, n);
  for (int r = 0; r < s; ++r)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double t = 0.0;
        for (int a = 0; a < p; ++a) t += U(r, a) * al[(k * n + j) * p + a];
        M(r * n + j, k) = t;
      }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  SNullityScore score;
  const double smax = sv.size() ? sv(0) : 0.0;
  if (smax <= 0.0) {
    score.kernel = n;
    score.next_sigma = 0.0;
    return score;
  }
  const double thresh = 1e-6 * smax;
  const int nsv = static_cast<int>(sv.size());
  int kernel = 0;
  for (int k = nsv - 1; k >= 0; --k) {
    if (sv(k) <= thresh)
      ++kernel;
    else
      break;
  }
  score.kernel = kernel;
  score.next_sigma = kernel < nsv ? sv(nsv - 1 - kernel) : 0.0;
  return score;
}

void orthonormalize_rows(Eigen::MatrixXd& U) {
  for (int r = 0; r < U.rows(); ++r) {
    for (int q = 0; q < r; ++q) U.row(r) -= U.row(q).dot(U.row(r)) * U.row(q);
    double nrm = U.row(r).norm();
    if (nrm < 1e-12) {
      U.row(r).setZero();
      U(r, r % U.cols()) = 1.0;
      for (int q = 0; q < r; ++q) U.row(r) -= U.row(q).dot(U.row(r)) * U.row(q);
      nrm = U.row(r).norm();
    }
    U.row(r) /= nrm;
  }
}

Eigen::MatrixXd row_complement(const Eigen::MatrixXd& U) {
  const int s = static_cast<int>(U.rows()), p = static_cast<int>(U.cols());
  Eigen::MatrixXd full(p, p);
  full.topRows(s) = U;
  int filled = s;
  for (int c = 0; c < p && filled < p; ++c) {
    Eigen::VectorXd cand = Eigen::VectorXd::Unit(p, c);
    for (int q = 0; q < filled; ++q) cand -= full.row(q).dot(cand) * full.row(q).transpose();
    if (cand.norm() > 1e-8) {
      full.row(filled++) = cand.normalized();
    }
  }
  return full.bottomRows(p - s);
}

}  // namespace

SNullity s_nullity(const FramedGeometry& geom, std::size_t node, int s,
                   const SNullityOptions& opts) {
  const int p = geom.p;
  if (s < 1 || s > p) throw ProductError("s-nullity: s out of range");

  SNullity out;
  out.s = s;

  Eigen::MatrixXd best = Eigen::MatrixXd::Zero(s, p);
  // coordinate subspaces first, then a deterministic pseudo-uniform sample
  std::vector<Eigen::MatrixXd> seeds;
  {
    std::vector<int> pick(s);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      Eigen::MatrixXd U = Eigen::MatrixXd::Zero(s, p);
      for (int r = 0; r < s; ++r) U(r, pick[r]) = 1.0;
      seeds.push_back(U);
      int i = s - 1;
      while (i >= 0 && pick[i] == p - s + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < s; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  if (s < p) {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < opts.samples; ++t) {
      Eigen::MatrixXd U(s, p);
      for (int r = 0; r < s; ++r)
        for (int c = 0; c < p; ++c) U(r, c) = gauss(rng);
      orthonormalize_rows(U);
      seeds.push_back(U);
    }
  }

  SNullityScore best_score{-1, 0.0};
  for (const auto& U : seeds) {
    SNullityScore score = score_subspace(U, geom, node);
    if (score.better_than(best_score)) {
      best_score = score;
      best = U;
    }
  }

  // coordinate ascent on principal angles against the orthogonal complement
  if (s < p) {
    double step = 0.2;
    for (int it = 0; it < opts.refine_steps; ++it) {
      Eigen::MatrixXd comp = row_complement(best);
      bool improved = false;
      for (int r = 0; r < s; ++r) {
        for (int c = 0; c < static_cast<int>(comp.rows()); ++c) {
          for (double sign : {+1.0, -1.0}) {
            Eigen::MatrixXd cand = best;
            cand.row(r) = std::cos(step) * best.row(r) + sign * std::sin(step) * comp.row(c);
            orthonormalize_rows(cand);
            SNullityScore score = score_subspace(cand, geom, node);
            if (score.better_than(best_score)) {
              best_score = score;
              best = cand;
              improved = true;
            }
          }
        }
      }
      if (!improved) step *= 0.5;
      if (step < 1e-12) break;
    }
  }

  out.value = best_score.kernel;
  out.subspace.assign(best.data(), best.data() + best.size());
  // Eigen stores column-major; re-pack row-major
  out.subspace.resize(static_cast<std::size_t>(s) * p);
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < p; ++c) out.subspace[r * p + c] = best(r, c);
  return out;
}

std::vector<std::size_t> default_node_sample(const ChartGrid& grid) {
  const int n = grid.dim();
  std::vector<std::vector<int>> per_axis(n);
  for (int d = 0; d < n; ++d) {
    int r = grid.resolution(d);
    per_axis[d] = {0, r / 2, r - 1};
  }
  std::vector<std::size_t> nodes;
  std::vector<int> idx(n, 0);
  std::vector<int> choice(n, 0);
  while (true) {
    for (int d = 0; d < n; ++d) idx[d] = per_axis[d][choice[d]];
    std::size_t node = grid.flat(idx);
    if (std::find(nodes.begin(), nodes.end(), node) == nodes.end()) nodes.push_back(node);
    int d = n - 1;
    while (d >= 0 && choice[d] == 2) {
      choice[d] = 0;
      --d;
    }
    if (d < 0) break;
    ++choice[d];
  }
  return nodes;
}

ProductHypotheses product_hypotheses(const FramedGeometry& geom, const ProductStructure& ps,
                                     const SNullityOptions& opts,
                                     const std::vector<std::size_t>& nodes_in) {
  const int n = geom.n, p = geom.p;
  ProductHypotheses rep;
  rep.nodes = nodes_in.empty() ? default_node_sample(geom.grid()) : nodes_in;

  rep.pass_factor_codim = true;
  for (const ImmersionScene& f : ps.factors) {
    rep.factor_dims.emplace_back(f.codim(), f.dim());
    if (!(f.codim() < f.dim())) rep.pass_factor_codim = false;
  }
  rep.pass_aggregate_codim = p < n;

  rep.pass_ns = true;
  rep.pass_n2s = true;
  for (int s = 1; s <= p; ++s) {
    HypothesisCheck check;
    check.s = s;
    std::vector<int> nu(rep.nodes.size());
    for_each_index(
        rep.nodes.size(),
        [&](std::size_t k) { nu[k] = s_nullity(geom, rep.nodes[k], s, opts).value; },
        Exec::Parallel);
    check.nu = *std::max_element(nu.begin(), nu.end());
    check.pass_ns = check.nu < n - s;
    check.limited_ns = check.pass_ns && (n - s) - check.nu <= 1;
    check.pass_n2s = check.nu < n - 2 * s;
    check.limited_n2s = check.pass_n2s && (n - 2 * s) - check.nu <= 1;
    rep.pass_ns = rep.pass_ns && check.pass_ns;
    rep.pass_n2s = rep.pass_n2s && check.pass_n2s;
    rep.checks.push_back(check);
  }
  return rep;
}

namespace {

std::size_t embed_node(const ProductStructure& ps, const ChartGrid& pgrid, int factor,
                       std::size_t fnode, std::size_t base_node) {
  const int n = pgrid.dim();
  std::vector<int> idx(n);
  pgrid.unflat(base_node, idx.data());
  const ChartGrid& fg = ps.factors[factor].grid;
  std::vector<int> fidx(fg.dim());
  fg.unflat(fnode, fidx.data());
  for (int d = 0; d < fg.dim(); ++d) idx[ps.axis_offset[factor] + d] = fidx[d];
  return pgrid.flat(idx);
}

}  // namespace

SplitResult split_bending(const FramedGeometry& geomP, const ProductStructure& ps,
                          const BendingField& T, double tol_scale, Exec mode) {
  const ChartGrid& grid = geomP.grid();
  const int n = geomP.n;
  const std::size_t N = grid.num_nodes();
  const std::size_t base = 0;

  double bres = bending_residual(geomP, T, mode);
  if (bres > tol_bend(geomP, tol_scale))
    throw ProductError("split_bending: field is not an infinitesimal bending (residual " +
                       std::to_string(bres) + ")");
  auto [derived, pair] = associated_pair(geomP, T, mode);

  SplitResult out;
  out.adaptedness = adaptedness_residual(geomP, pair, ps, mode);
  const double h = grid.max_spacing();
  if (out.adaptedness > 10.0 * h * h * tol_scale)
    throw ProductError("split_bending: beta is not adapted to the product structure (residual " +
                       std::to_string(out.adaptedness) + ")");
  for (std::size_t node = 0; node < N; ++node)
    if (first_normal_rank(geomP, node) < geomP.p)
      throw ProductError("split_bending: first normal space is not full at node " +
                         std::to_string(node) + " (hypothesis of the decomposition)");

  const double scale = bending_scale(geomP, derived.L);

  out.residual = 0.0;
  for (int f = 0; f < ps.num_factors(); ++f) {
    const ImmersionScene& fscene = ps.factors[f];
    const ChartGrid& fg = fscene.grid;
    const int fn = fg.dim();
    const int fm = fscene.ambient_dim;
    const int a0 = ps.axis_offset[f];
    const int b0 = ps.block_offset[f];

    // block of L on factor axes, sampled on the base slice
    GridField Lf(fg, {fn, fm});
    for_each_index(
        fg.num_nodes(),
        [&](std::size_t fnode) {
          std::size_t x = embed_node(ps, grid, f, fnode, base);
          std::span<const double> Lv = derived.L.at(x);
          std::span<double> dst = Lf.at(fnode);
          for (int j = 0; j < fn; ++j)
            for (int c = 0; c < fm; ++c)
              dst[j * fm + c] = Lv[(a0 + j) * static_cast<std::size_t>(geomP.m) + (b0 + c)];
        },
        mode);

    // the same block must not vary along the other factors' axes
    double constancy = max_over(
                           N,
                           [&](std::size_t x) {
                             std::vector<int> idx(n);
                             grid.unflat(x, idx.data());
                             std::vector<int> fidx(idx.begin() + a0, idx.begin() + a0 + fn);
                             std::size_t fnode = fg.flat(fidx);
                             std::size_t xref = embed_node(ps, grid, f, fnode, base);
                             std::span<const double> Lv = derived.L.at(x);
                             std::span<const double> Rv = derived.L.at(xref);
                             double w = 0.0;
                             for (int j = 0; j < fn; ++j)
                               for (int c = 0; c < fm; ++c) {
                                 std::size_t off =
                                     (a0 + j) * static_cast<std::size_t>(geomP.m) + (b0 + c);
                                 w = std::max(w, std::abs(Lv[off] - Rv[off]));
                               }
                             return w;
                           },
                           mode) /
                       scale;
    out.constancy_residual = std::max(out.constancy_residual, constancy);

    EdgeRhs rhs = [&Lf, fm](std::size_t fnode, int axis, std::span<double> o) {
      std::span<const double> v = Lf.at(fnode);
      for (int c = 0; c < fm; ++c) o[c] = v[axis * fm + c];
    };
    std::vector<double> zero(fm, 0.0);
    std::vector<int> order(fn);
    std::iota(order.begin(), order.end(), 0);
    BendingField Tf;
    Tf.label = T.label + ":factor" + std::to_string(f);
    Tf.T = sweep_integrate(fg, rhs, {fm}, zero, 0, order, mode);
    out.factors.push_back(std::move(Tf));
  }

  // each factor field must be a bending of its factor immersion
  for (int f = 0; f < ps.num_factors(); ++f) {
    FramedGeometry fgeom = build_geometry(ps.factors[f], mode);
    double r = bending_residual(fgeom, out.factors[f], mode);
    out.factor_bending_residuals.push_back(r);
    out.residual = std::max(out.residual, r);
  }
  out.residual = std::max(out.residual, out.constancy_residual);
  return out;
}

BendingField direct_sum_bending(const ImmersionScene& product, const ProductStructure& ps,
                                const std::vector<BendingField>& factor_bendings) {
  if (factor_bendings.size() != ps.factors.size())
    throw ProductError("direct sum: one bending per factor required");
  const ChartGrid& grid = product.grid;
  BendingField out;
  out.label = "direct_sum";
  out.T = GridField(grid, {product.ambient_dim});
  const int n = grid.dim();
  std::vector<int> idx(n);
  std::vector<int> fidx;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    grid.unflat(node, idx.data());
    std::span<double> t = out.T.at(node);
    for (int f = 0; f < ps.num_factors(); ++f) {
      const ChartGrid& fg = ps.factors[f].grid;
      fidx.assign(idx.begin() + ps.axis_offset[f], idx.begin() + ps.axis_offset[f + 1]);
      std::span<const double> src = factor_bendings[f].T.at(fg.flat(fidx));
      for (int c = 0; c < ps.factors[f].ambient_dim; ++c) t[ps.block_offset[f] + c] = src[c];
    }
  }
  return out;
}

}  // namespace bendkit
