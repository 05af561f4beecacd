#include "bendkit/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace bendkit {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

namespace {

// Projector onto the normal space at a node, from tangent frame and gInv.
// Writes into caller scratch to keep node loops allocation-free.
void normal_projector(const FramedGeometry& geom, std::size_t node, Eigen::MatrixXd& P) {
  const int n = geom.n, m = geom.m;
  CMapMat E(geom.e.at(node).data(), n, m);
  CMapMat Gi(geom.gInv.at(node).data(), n, n);
  P.resize(m, m);
  P.setIdentity();
  P.noalias() -= E.transpose() * (Gi * E);
}

Eigen::MatrixXd normal_projector(const FramedGeometry& geom, std::size_t node) {
  Eigen::MatrixXd P;
  normal_projector(geom, node, P);
  return P;
}

// Gram-Schmidt on the columns of V in fixed order; returns false when a
// column degenerates below `floor`.
bool gram_schmidt(Eigen::MatrixXd& V, double floor) {
  for (int c = 0; c < V.cols(); ++c) {
    for (int q = 0; q < c; ++q) V.col(c) -= V.col(q).dot(V.col(c)) * V.col(q);
    double nrm = V.col(c).norm();
    if (nrm < floor) return false;
    V.col(c) /= nrm;
  }
  return true;
}

double subset_sigma_min(const Eigen::MatrixXd& P, const std::vector<int>& subset) {
  thread_local Eigen::MatrixXd V;
  thread_local Eigen::JacobiSVD<Eigen::MatrixXd> svd;
  V.resize(P.rows(), static_cast<int>(subset.size()));
  for (std::size_t c = 0; c < subset.size(); ++c) V.col(static_cast<int>(c)) = P.col(subset[c]);
  svd.compute(V);
  return svd.singularValues().tail(1)(0);
}

std::vector<int> qr_pivot_subset(const Eigen::MatrixXd& P, int p) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(P);
  std::vector<int> subset(p);
  for (int c = 0; c < p; ++c) subset[c] = static_cast<int>(qr.colsPermutation().indices()(c));
  std::sort(subset.begin(), subset.end());
  return subset;
}

// Frame at a node obtained by projecting the predecessor frame onto the
// current normal space and re-orthonormalizing in fixed order.
bool transport_frame(const Eigen::MatrixXd& P, const Eigen::MatrixXd& prev,
                     Eigen::MatrixXd& out) {
  out = P * prev;
  return gram_schmidt(out, 1e-8);
}

Eigen::MatrixXd frame_at(const FramedGeometry& geom, std::size_t node) {
  CMapMat X(geom.xi.at(node).data(), geom.p, geom.m);
  return X.transpose();  // m x p columns
}

void store_frame(FramedGeometry& geom, std::size_t node, const Eigen::MatrixXd& F) {
  MapMat X(geom.xi.at(node).data(), geom.p, geom.m);
  X = F.transpose();
}

}  // namespace

FramedGeometry build_geometry(const ImmersionScene& scene, Exec mode) {
  const int n = scene.dim();
  const int m = scene.ambient_dim;
  const int p = m - n;
  if (p < 1) throw GeometryError("scene has no codimension");
  if (static_cast<int>(scene.map.comps()) != m)
    throw GeometryError("scene map shape does not match ambient dimension");
  scene.map.require_finite("immersion map");

  const ChartGrid& grid = scene.grid;
  const std::size_t N = grid.num_nodes();

  FramedGeometry geom;
  geom.scene = scene;
  geom.n = n;
  geom.m = m;
  geom.p = p;
  geom.e = GridField(grid, {n, m});
  geom.xi = GridField(grid, {p, m});
  geom.g = GridField(grid, {n, n});
  geom.gInv = GridField(grid, {n, n});

  // tangent frame e_i = d_i f
  for (int i = 0; i < n; ++i) {
    GridField ei = partial(scene.map, i, mode);
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> src = ei.at(node);
          std::span<double> dst = geom.e.at(node);
          for (int c = 0; c < m; ++c) dst[i * m + c] = src[c];
        },
        mode);
  }

  // metric, inverse, rank check
  std::vector<double> min_eig(N);
  for_each_index(
      N,
      [&](std::size_t node) {
        thread_local Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        thread_local Eigen::MatrixXd Gtmp, Gitmp;
        CMapMat E(geom.e.at(node).data(), n, m);
        MapMat G(geom.g.at(node).data(), n, n);
        MapMat Gi(geom.gInv.at(node).data(), n, n);
        Gtmp.resize(n, n);
        Gtmp.noalias() = E * E.transpose();
        G = Gtmp;
        es.compute(Gtmp);
        min_eig[node] = es.eigenvalues()(0);
        Gitmp = Gtmp.inverse();
        Gi = Gitmp;
      },
      mode);
  geom.min_metric_eigen = *std::min_element(min_eig.begin(), min_eig.end());
  if (geom.min_metric_eigen <= 1e-8) {
    std::size_t worst =
        static_cast<std::size_t>(std::min_element(min_eig.begin(), min_eig.end()) - min_eig.begin());
    throw GeometryError("differential of the immersion is rank deficient at node " +
                        std::to_string(worst) +
                        " (min metric eigenvalue " + std::to_string(geom.min_metric_eigen) + ")");
  }

  // Normal frame. Preferred: one constant ambient pivot subset, valid when its
  // normal projection stays nondegenerate on the whole grid. Charts that wind
  // around (circles, tori, spheres) admit no such subset, so the base frame is
  // transported along the axis-ordered sweep instead.
  std::vector<std::size_t> probes{0, N / 2, N - 1};
  std::vector<std::vector<int>> candidates;
  for (std::size_t pn : probes) {
    std::vector<int> s = qr_pivot_subset(normal_projector(geom, pn), p);
    if (std::find(candidates.begin(), candidates.end(), s) == candidates.end())
      candidates.push_back(s);
  }
  double best_quality = -1.0;
  std::vector<int> best_subset;
  for (const auto& s : candidates) {
    std::vector<double> q(N);
    for_each_index(
        N,
        [&](std::size_t node) {
          thread_local Eigen::MatrixXd P;
          normal_projector(geom, node, P);
          q[node] = subset_sigma_min(P, s);
        },
        mode);
    double quality = *std::min_element(q.begin(), q.end());
    if (quality > best_quality) {
      best_quality = quality;
      best_subset = s;
    }
  }
  geom.pivot = best_subset;

  std::atomic<long long> fail_node{-1};
  auto latch_fail = [&](std::size_t node) {
    long long expected = -1;
    fail_node.compare_exchange_strong(expected, static_cast<long long>(node));
  };

  const double kConstantPivotFloor = 0.05;
  if (best_quality >= kConstantPivotFloor) {
    for_each_index(
        N,
        [&](std::size_t node) {
          Eigen::MatrixXd P = normal_projector(geom, node);
          Eigen::MatrixXd V(m, p);
          for (int c = 0; c < p; ++c) V.col(c) = P.col(best_subset[c]);
          if (!gram_schmidt(V, 1e-8)) {
            latch_fail(node);
            return;
          }
          store_frame(geom, node, V);
        },
        mode);
    if (fail_node.load() >= 0)
      throw GeometryError("normal frame degenerated at node " +
                          std::to_string(fail_node.load()));
  } else {
    // transported frame from the base node
    const std::size_t base = 0;
    Eigen::MatrixXd Pb = normal_projector(geom, base);
    std::vector<int> s = qr_pivot_subset(Pb, p);
    geom.pivot = s;
    Eigen::MatrixXd V(m, p);
    for (int c = 0; c < p; ++c) V.col(c) = Pb.col(s[c]);
    if (!gram_schmidt(V, 1e-8))
      throw GeometryError("no valid pivot subset at base node (worst node 0)");
    store_frame(geom, base, V);

    std::vector<int> base_idx(n);
    grid.unflat(base, base_idx.data());
    std::vector<std::size_t> seeds{base};
    for (int axis = 0; axis < n; ++axis) {
      const int res = grid.resolution(axis);
      const int b = base_idx[axis];
      for_each_index(
          seeds.size(),
          [&](std::size_t si) {
            std::size_t cur = seeds[si];
            Eigen::MatrixXd F = frame_at(geom, cur), Fn;
            auto step = [&](int dir) {
              std::size_t nxt = grid.neighbor(cur, axis, dir);
              if (!transport_frame(normal_projector(geom, nxt), F, Fn)) {
                latch_fail(nxt);
                return false;
              }
              store_frame(geom, nxt, Fn);
              F = Fn;
              cur = nxt;
              return true;
            };
            if (grid.periodic(axis)) {
              for (int t = 1; t < res; ++t)
                if (!step(+1)) return;
            } else {
              for (int t = b + 1; t < res; ++t)
                if (!step(+1)) return;
              cur = seeds[si];
              F = frame_at(geom, cur);
              for (int t = b - 1; t >= 0; --t)
                if (!step(-1)) return;
            }
          },
          mode);
      if (fail_node.load() >= 0)
        throw GeometryError("normal frame transport degenerated at node " +
                            std::to_string(fail_node.load()));
      if (axis + 1 < n) {
        std::vector<std::size_t> next;
        next.reserve(seeds.size() * res);
        for (std::size_t sd : seeds)
          for (int t = 0; t < res; ++t)
            next.push_back(grid.neighbor(sd, axis, grid.periodic(axis) ? t : t - b));
        seeds = std::move(next);
      }
    }

    // closure across periodic wraps: a transported frame must agree with the
    // stored one, otherwise the normal bundle does not close over the loop
    double worst_alignment = 1.0;
    for (int axis = 0; axis < n; ++axis) {
      if (!grid.periodic(axis)) continue;
      double axis_misalign = max_over(
          N,
          [&](std::size_t node) {
            std::vector<int> idx(n);
            grid.unflat(node, idx.data());
            if (idx[axis] != grid.resolution(axis) - 1) return 0.0;
            std::size_t nxt = grid.neighbor(node, axis, +1);
            Eigen::MatrixXd F = frame_at(geom, node), Fn;
            if (!transport_frame(normal_projector(geom, nxt), F, Fn)) return 2.0;
            Eigen::MatrixXd S = frame_at(geom, nxt);
            double mis = 0.0;
            for (int c = 0; c < p; ++c) mis = std::max(mis, 1.0 - Fn.col(c).dot(S.col(c)));
            return mis;
          },
          mode);
      worst_alignment = std::min(worst_alignment, 1.0 - axis_misalign);
    }
    geom.seam_residual = 1.0 - worst_alignment;
    if (worst_alignment < 0.5)
      throw GeometryError("normal frame does not close around a periodic axis (alignment " +
                          std::to_string(worst_alignment) + ")");
  }

  // orthogonality diagnostics
  geom.frame_orth_residual = max_over(
      N,
      [&](std::size_t node) {
        CMapMat E(geom.e.at(node).data(), n, m);
        CMapMat X(geom.xi.at(node).data(), p, m);
        double r = (E * X.transpose()).cwiseAbs().maxCoeff();
        Eigen::MatrixXd XXt = X * X.transpose() - Eigen::MatrixXd::Identity(p, p);
        return std::max(r, XXt.cwiseAbs().maxCoeff());
      },
      mode);

  // Christoffel symbols from the metric
  geom.Gamma = GridField(grid, {n, n, n});
  {
    GridField dg(grid, {n, n, n});  // dg[d][j][l] = d_d g_jl
    for (int d = 0; d < n; ++d) {
      GridField gd = partial(geom.g, d, mode);
      for_each_index(
          N,
          [&](std::size_t node) {
            std::span<const double> src = gd.at(node);
            std::span<double> dst = dg.at(node);
            for (int c = 0; c < n * n; ++c) dst[d * n * n + c] = src[c];
          },
          mode);
    }
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> dgv = dg.at(node);
          std::span<const double> gi = geom.gInv.at(node);
          std::span<double> G = geom.Gamma.at(node);
          auto DG = [&](int d, int j, int l) { return dgv[(d * n + j) * n + l]; };
          for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                  s += gi[k * n + l] * (DG(i, j, l) + DG(j, i, l) - DG(l, i, j));
                G[(k * n + i) * n + j] = 0.5 * s;
              }
        },
        mode);
  }

  // second fundamental form and normal connection
  geom.alpha = GridField(grid, {n, n, p});
  geom.omega = GridField(grid, {n, p, p});
  {
    GridField de(grid, {n, n, m});  // de[i][j][c] = d_i (e_j)_c
    for (int i = 0; i < n; ++i) {
      GridField dei = partial(geom.e, i, mode);
      for_each_index(
          N,
          [&](std::size_t node) {
            std::span<const double> src = dei.at(node);
            std::span<double> dst = de.at(node);
            for (int c = 0; c < n * m; ++c) dst[i * n * m + c] = src[c];
          },
          mode);
    }
    GridField dxi(grid, {n, p, m});
    for (int i = 0; i < n; ++i) {
      GridField dxii = partial(geom.xi, i, mode);
      for_each_index(
          N,
          [&](std::size_t node) {
            std::span<const double> src = dxii.at(node);
            std::span<double> dst = dxi.at(node);
            for (int c = 0; c < p * m; ++c) dst[i * p * m + c] = src[c];
          },
          mode);
    }
    std::vector<double> asym(N, 0.0);
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> dev = de.at(node);
          std::span<const double> dxv = dxi.at(node);
          std::span<const double> xv = geom.xi.at(node);
          std::span<double> al = geom.alpha.at(node);
          std::span<double> om = geom.omega.at(node);
          // symmetrized in the tangent slots; the raw asymmetry is a
          // discretization diagnostic
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int a = 0; a < p; ++a) {
                double sij = 0.0, sji = 0.0;
                for (int c = 0; c < m; ++c) {
                  sij += dev[(i * n + j) * m + c] * xv[a * m + c];
                  sji += dev[(j * n + i) * m + c] * xv[a * m + c];
                }
                al[(i * n + j) * p + a] = 0.5 * (sij + sji);
                asym[node] = std::max(asym[node], std::abs(sij - sji));
              }
          for (int i = 0; i < n; ++i)
            for (int a = 0; a < p; ++a)
              for (int b = 0; b < p; ++b) {
                double s = 0.0;
                for (int c = 0; c < m; ++c) s += dxv[(i * p + a) * m + c] * xv[b * m + c];
                om[(i * p + a) * p + b] = s;
              }
        },
        mode);
    geom.alpha_asym = *std::max_element(asym.begin(), asym.end());
  }

  // shape operators
  geom.A = GridField(grid, {p, n, n});
  for_each_index(
      N,
      [&](std::size_t node) {
        std::span<const double> gi = geom.gInv.at(node);
        std::span<const double> al = geom.alpha.at(node);
        std::span<double> Av = geom.A.at(node);
        for (int a = 0; a < p; ++a)
          for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
              double s = 0.0;
              for (int l = 0; l < n; ++l) s += gi[k * n + l] * al[(l * n + j) * p + a];
              Av[(a * n + k) * n + j] = s;
            }
      },
      mode);

  geom.alpha_inf = geom.alpha.sup_norm();
  geom.omega_inf = geom.omega.sup_norm();
  geom.gamma_inf = geom.Gamma.sup_norm();
  return geom;
}

CurvatureData curvature(const FramedGeometry& geom, Exec mode) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, p = geom.p;
  const std::size_t N = grid.num_nodes();
  CurvatureData out;
  out.R = GridField(grid, {n, n, n, n});
  out.Rperp = GridField(grid, {n, n, p, p});

  GridField dG(grid, {n, n, n, n});  // dG[d][k][i][j] = d_d Gamma^k_ij
  for (int d = 0; d < n; ++d) {
    GridField gd = partial(geom.Gamma, d, mode);
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> src = gd.at(node);
          std::span<double> dst = dG.at(node);
          for (int c = 0; c < n * n * n; ++c) dst[d * n * n * n + c] = src[c];
        },
        mode);
  }
  GridField dOm(grid, {n, n, p, p});
  for (int d = 0; d < n; ++d) {
    GridField od = partial(geom.omega, d, mode);
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> src = od.at(node);
          std::span<double> dst = dOm.at(node);
          for (int c = 0; c < n * p * p; ++c) dst[d * n * p * p + c] = src[c];
        },
        mode);
  }

  for_each_index(
      N,
      [&](std::size_t node) {
        std::span<const double> dGv = dG.at(node);
        std::span<const double> Gv = geom.Gamma.at(node);
        std::span<double> Rv = out.R.at(node);
        auto DG = [&](int d, int k, int i, int j) { return dGv[((d * n + k) * n + i) * n + j]; };
        auto GA = [&](int k, int i, int j) { return Gv[(k * n + i) * n + j]; };
        for (int l = 0; l < n; ++l)
          for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) {
                double s = DG(i, l, j, k) - DG(j, l, i, k);
                for (int q = 0; q < n; ++q)
                  s += GA(q, j, k) * GA(l, i, q) - GA(q, i, k) * GA(l, j, q);
                Rv[((l * n + k) * n + i) * n + j] = s;
              }

        std::span<const double> dOv = dOm.at(node);
        std::span<const double> Ov = geom.omega.at(node);
        std::span<double> Rp = out.Rperp.at(node);
        auto DO = [&](int d, int i, int a, int b) { return dOv[((d * n + i) * p + a) * p + b]; };
        auto OM = [&](int i, int a, int b) { return Ov[(i * p + a) * p + b]; };
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int a = 0; a < p; ++a)
              for (int b = 0; b < p; ++b) {
                double s = DO(i, j, a, b) - DO(j, i, a, b);
                for (int c = 0; c < p; ++c)
                  s += OM(j, a, c) * OM(i, c, b) - OM(i, a, c) * OM(j, c, b);
                Rp[((i * n + j) * p + a) * p + b] = s;
              }
      },
      mode);
  return out;
}

StructureReport structure_residuals(const FramedGeometry& geom, Exec mode) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, p = geom.p;
  const std::size_t N = grid.num_nodes();
  CurvatureData curv = curvature(geom, mode);

  const double s1 = std::max({1.0, geom.alpha_inf, geom.gamma_inf, geom.omega_inf});
  const double scale = s1 * s1;

  GridField dal(grid, {n, n, n, p});  // dal[d][j][k][a] = d_d alpha^a_jk
  for (int d = 0; d < n; ++d) {
    GridField ad = partial(geom.alpha, d, mode);
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> src = ad.at(node);
          std::span<double> dst = dal.at(node);
          for (int c = 0; c < n * n * p; ++c) dst[d * n * n * p + c] = src[c];
        },
        mode);
  }

  StructureReport rep;
  rep.gauss = max_over(
                  N,
                  [&](std::size_t node) {
                    std::span<const double> gv = geom.g.at(node);
                    std::span<const double> Rv = curv.R.at(node);
                    std::span<const double> al = geom.alpha.at(node);
                    auto AL = [&](int i, int j, int a) { return al[(i * n + j) * p + a]; };
                    double worst = 0.0;
                    for (int i = 0; i < n; ++i)
                      for (int j = 0; j < n; ++j)
                        for (int k = 0; k < n; ++k)
                          for (int l = 0; l < n; ++l) {
                            double lhs = 0.0;
                            for (int q = 0; q < n; ++q)
                              lhs += gv[l * n + q] * Rv[((q * n + k) * n + i) * n + j];
                            double rhs = 0.0;
                            for (int a = 0; a < p; ++a)
                              rhs += AL(i, l, a) * AL(j, k, a) - AL(i, k, a) * AL(j, l, a);
                            worst = std::max(worst, std::abs(lhs - rhs));
                          }
                    return worst;
                  },
                  mode) /
              scale;

  rep.codazzi = max_over(
                    N,
                    [&](std::size_t node) {
                      std::span<const double> dav = dal.at(node);
                      std::span<const double> Gv = geom.Gamma.at(node);
                      std::span<const double> Ov = geom.omega.at(node);
                      std::span<const double> al = geom.alpha.at(node);
                      auto DA = [&](int d, int j, int k, int a) {
                        return dav[((d * n + j) * n + k) * p + a];
                      };
                      auto GA = [&](int k, int i, int j) { return Gv[(k * n + i) * n + j]; };
                      auto OM = [&](int i, int a, int b) { return Ov[(i * p + a) * p + b]; };
                      auto AL = [&](int i, int j, int a) { return al[(i * n + j) * p + a]; };
                      auto NAB = [&](int i, int j, int k, int a) {
                        double s = DA(i, j, k, a);
                        for (int l = 0; l < n; ++l)
                          s -= GA(l, i, j) * AL(l, k, a) + GA(l, i, k) * AL(j, l, a);
                        for (int b = 0; b < p; ++b) s += AL(j, k, b) * OM(i, b, a);
                        return s;
                      };
                      double worst = 0.0;
                      for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                          for (int k = 0; k < n; ++k)
                            for (int a = 0; a < p; ++a)
                              worst = std::max(
                                  worst, std::abs(NAB(i, j, k, a) - NAB(j, i, k, a)));
                      return worst;
                    },
                    mode) /
                scale;

  rep.ricci = max_over(
                  N,
                  [&](std::size_t node) {
                    std::span<const double> Rp = curv.Rperp.at(node);
                    std::span<const double> Av = geom.A.at(node);
                    std::span<const double> al = geom.alpha.at(node);
                    auto AOP = [&](int a, int k, int j) { return Av[(a * n + k) * n + j]; };
                    auto AL = [&](int i, int j, int a) { return al[(i * n + j) * p + a]; };
                    double worst = 0.0;
                    for (int i = 0; i < n; ++i)
                      for (int j = 0; j < n; ++j)
                        for (int a = 0; a < p; ++a)
                          for (int b = 0; b < p; ++b) {
                            double lhs = Rp[((i * n + j) * p + a) * p + b];
                            double rhs = 0.0;
                            for (int k = 0; k < n; ++k)
                              rhs += AOP(a, k, j) * AL(i, k, b) - AOP(a, k, i) * AL(j, k, b);
                            worst = std::max(worst, std::abs(lhs - rhs));
                          }
                    return worst;
                  },
                  mode) /
              scale;
  return rep;
}

int first_normal_rank(const FramedGeometry& geom, std::size_t node) {
  const int n = geom.n, p = geom.p;
  std::span<const double> al = geom.alpha.at(node);
  Eigen::MatrixXd M(p, n * (n + 1) / 2);
  int col = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      for (int a = 0; a < p; ++a)
        M(a, col) = 0.5 * (al[(i * n + j) * p + a] + al[(j * n + i) * p + a]);
      ++col;
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv(k) > 1e-6 * sv(0)) ++rank;
  return rank;
}

double frame_condition(const FramedGeometry& geom, std::size_t node) {
  const int n = geom.n, m = geom.m, p = geom.p;
  Eigen::MatrixXd F(n + p, m);
  CMapMat E(geom.e.at(node).data(), n, m);
  CMapMat X(geom.xi.at(node).data(), p, m);
  F.topRows(n) = E;
  F.bottomRows(p) = X;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
  const auto& sv = svd.singularValues();
  double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

double sup_norm_gInv_g_defect(const FramedGeometry& geom) {
  const int n = geom.n;
  return max_over(geom.grid().num_nodes(), [&](std::size_t node) {
    CMapMat G(geom.g.at(node).data(), n, n);
    CMapMat Gi(geom.gInv.at(node).data(), n, n);
    return ((Gi * G) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  });
}

}  // namespace bendkit
