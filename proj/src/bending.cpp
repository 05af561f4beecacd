#include "bendkit/bending.hpp"

#include <cmath>

namespace bendkit {

double bending_scale(const FramedGeometry& geom, const GridField& L) {
  return std::max({1.0, L.sup_norm(), geom.alpha_inf});
}

double pair_scale(const FramedGeometry& geom, const AssociatedPair& pair) {
  const double a = geom.alpha_inf;
  const double b = pair.beta.sup_norm();
  const double e = pair.E.sup_norm();
  return std::max({1.0, a, b, e, a * b, a * e});
}

double tol_bend(const FramedGeometry& geom, double tol_scale) {
  const double h = geom.grid().max_spacing();
  return 10.0 * h * h * tol_scale;
}

double bending_residual(const FramedGeometry& geom, const BendingField& T, Exec mode) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, m = geom.m;
  if (!T.T.grid().same_layout(grid) || static_cast<int>(T.T.comps()) != m)
    throw GeometryError("bending field does not live on the scene grid");
  T.T.require_finite("bending field");

  GridField L(grid, {n, m});
  for (int i = 0; i < n; ++i) {
    GridField Li = partial(T.T, i, mode);
    for_each_index(
        grid.num_nodes(),
        [&](std::size_t node) {
          std::span<const double> src = Li.at(node);
          std::span<double> dst = L.at(node);
          for (int c = 0; c < m; ++c) dst[i * m + c] = src[c];
        },
        mode);
  }
  const double scale = bending_scale(geom, L);
  double worst = max_over(
      grid.num_nodes(),
      [&](std::size_t node) {
        std::span<const double> Lv = L.at(node);
        std::span<const double> ev = geom.e.at(node);
        double w = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int c = 0; c < m; ++c)
              s += Lv[i * m + c] * ev[j * m + c] + ev[i * m + c] * Lv[j * m + c];
            w = std::max(w, std::abs(s));
          }
        return w;
      },
      mode);
  return worst / scale;
}

std::pair<DerivedTensors, AssociatedPair> associated_pair(const FramedGeometry& geom,
                                                          const BendingField& T, Exec mode) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, m = geom.m, p = geom.p;
  const std::size_t N = grid.num_nodes();

  DerivedTensors derived;
  derived.L = GridField(grid, {n, m});
  for (int i = 0; i < n; ++i) {
    GridField Li = partial(T.T, i, mode);
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> src = Li.at(node);
          std::span<double> dst = derived.L.at(node);
          for (int c = 0; c < m; ++c) dst[i * m + c] = src[c];
        },
        mode);
  }

  derived.B = GridField(grid, {n, n, m});
  {
    GridField dL(grid, {n, n, m});  // dL[i][j][c] = d_i L_j
    for (int i = 0; i < n; ++i) {
      GridField dLi = partial(derived.L, i, mode);
      for_each_index(
          N,
          [&](std::size_t node) {
            std::span<const double> src = dLi.at(node);
            std::span<double> dst = dL.at(node);
            for (int c = 0; c < n * m; ++c) dst[i * n * m + c] = src[c];
          },
          mode);
    }
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> dLv = dL.at(node);
          std::span<const double> Gv = geom.Gamma.at(node);
          std::span<const double> Lv = derived.L.at(node);
          std::span<double> Bv = derived.B.at(node);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int c = 0; c < m; ++c) {
                double s = dLv[(i * n + j) * m + c];
                for (int k = 0; k < n; ++k) s -= Gv[(k * n + i) * n + j] * Lv[k * m + c];
                Bv[(i * n + j) * m + c] = s;
              }
        },
        mode);
  }

  AssociatedPair pair;
  pair.beta = GridField(grid, {n, n, p});
  pair.Bop = GridField(grid, {p, n, n});
  pair.Ycal = GridField(grid, {p, n});
  pair.E = GridField(grid, {n, p, p});
  for_each_index(
      N,
      [&](std::size_t node) {
        std::span<const double> Bv = derived.B.at(node);
        std::span<const double> Lv = derived.L.at(node);
        std::span<const double> xv = geom.xi.at(node);
        std::span<const double> gi = geom.gInv.at(node);
        std::span<const double> al = geom.alpha.at(node);
        std::span<const double> Av = geom.A.at(node);
        std::span<double> be = pair.beta.at(node);
        std::span<double> Bo = pair.Bop.at(node);
        std::span<double> Yv = pair.Ycal.at(node);
        std::span<double> Ev = pair.E.at(node);

        // symmetrized in the tangent slots; B's raw symmetry defect is checked
        // separately by b_symmetry_residual
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int a = 0; a < p; ++a) {
              double s = 0.0;
              for (int c = 0; c < m; ++c)
                s += 0.5 * (Bv[(i * n + j) * m + c] + Bv[(j * n + i) * m + c]) * xv[a * m + c];
              be[(i * n + j) * p + a] = s;
            }
        for (int a = 0; a < p; ++a)
          for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
              double s = 0.0;
              for (int l = 0; l < n; ++l) s += gi[k * n + l] * be[(l * n + j) * p + a];
              Bo[(a * n + k) * n + j] = s;
            }
        // <Y xi_a, e_j> = -<xi_a, L_j>
        for (int a = 0; a < p; ++a)
          for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
              double xl = 0.0;
              for (int c = 0; c < m; ++c) xl += xv[a * m + c] * Lv[j * m + c];
              s -= gi[k * n + j] * xl;
            }
            Yv[a * n + k] = s;
          }
        // E^b_ia = alpha^b_ik (Y_a)^k + (A_a)^k_i <L_k, xi_b>
        for (int i = 0; i < n; ++i)
          for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) {
              double s = 0.0;
              for (int k = 0; k < n; ++k) {
                s += al[(i * n + k) * p + b] * Yv[a * n + k];
                double lx = 0.0;
                for (int c = 0; c < m; ++c) lx += Lv[k * m + c] * xv[b * m + c];
                s += Av[(a * n + k) * n + i] * lx;
              }
              Ev[(i * p + a) * p + b] = s;
            }
      },
      mode);
  return {std::move(derived), std::move(pair)};
}

AssociatedPair make_pair_from_fields(const FramedGeometry& geom, GridField beta, GridField E,
                                     Exec mode) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, p = geom.p;
  std::vector<int> beta_shape{n, n, p}, E_shape{n, p, p};
  if (!beta.grid().same_layout(grid) || beta.shape() != beta_shape)
    throw GeometryError("pair: beta shape does not match the geometry");
  if (!E.grid().same_layout(grid) || E.shape() != E_shape)
    throw GeometryError("pair: E shape does not match the geometry");
  beta.require_finite("beta");
  E.require_finite("E");

  AssociatedPair pair;
  pair.beta = std::move(beta);
  pair.E = std::move(E);
  pair.Bop = GridField(grid, {p, n, n});
  for_each_index(
      grid.num_nodes(),
      [&](std::size_t node) {
        std::span<const double> gi = geom.gInv.at(node);
        std::span<const double> be = pair.beta.at(node);
        std::span<double> Bo = pair.Bop.at(node);
        for (int a = 0; a < p; ++a)
          for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
              double s = 0.0;
              for (int l = 0; l < n; ++l) s += gi[k * n + l] * be[(l * n + j) * p + a];
              Bo[(a * n + k) * n + j] = s;
            }
      },
      mode);
  return pair;
}

double tangential_identity_residual(const FramedGeometry& geom, const DerivedTensors& derived,
                                    const AssociatedPair& pair, Exec mode) {
  if (!pair.has_Ycal())
    throw GeometryError("tangential identity needs a pair extracted from a bending");
  const int n = geom.n, m = geom.m, p = geom.p;
  const double scale = bending_scale(geom, derived.L);
  double worst = max_over(
      geom.grid().num_nodes(),
      [&](std::size_t node) {
        std::span<const double> Bv = derived.B.at(node);
        std::span<const double> ev = geom.e.at(node);
        std::span<const double> gv = geom.g.at(node);
        std::span<const double> al = geom.alpha.at(node);
        std::span<const double> Yv = pair.Ycal.at(node);
        double w = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
              double lhs = 0.0;
              for (int c = 0; c < m; ++c) lhs += Bv[(i * n + j) * m + c] * ev[k * m + c];
              double rhs = 0.0;
              for (int a = 0; a < p; ++a)
                for (int l = 0; l < n; ++l)
                  rhs += al[(i * n + j) * p + a] * Yv[a * n + l] * gv[l * n + k];
              w = std::max(w, std::abs(lhs - rhs));
            }
        return w;
      },
      mode);
  return worst / scale;
}

double compatibility_residual(const FramedGeometry& geom, const AssociatedPair& pair, Exec mode) {
  const int n = geom.n, p = geom.p;
  const double scale = pair_scale(geom, pair);
  double worst = max_over(
      geom.grid().num_nodes(),
      [&](std::size_t node) {
        std::span<const double> Ev = pair.E.at(node);
        double w = 0.0;
        for (int i = 0; i < n; ++i)
          for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b)
              w = std::max(w, std::abs(Ev[(i * p + a) * p + b] + Ev[(i * p + b) * p + a]));
        return w;
      },
      mode);
  return worst / scale;
}

double b_symmetry_residual(const FramedGeometry& geom, const DerivedTensors& derived, Exec mode) {
  const int n = geom.n, m = geom.m;
  const double scale = bending_scale(geom, derived.L);
  double worst = max_over(
      geom.grid().num_nodes(),
      [&](std::size_t node) {
        std::span<const double> Bv = derived.B.at(node);
        double w = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            for (int c = 0; c < m; ++c)
              w = std::max(w, std::abs(Bv[(i * n + j) * m + c] - Bv[(j * n + i) * m + c]));
        return w;
      },
      mode);
  return worst / scale;
}

}  // namespace bendkit
