#include "bendkit/classify.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>

namespace bendkit {

double tol_trivial(const FramedGeometry& geom, double tol_scale) {
  const double h = geom.grid().max_spacing();
  return 30.0 * h * h * tol_scale;
}

KillingFit fit_killing(const ImmersionScene& scene, const BendingField& T, Exec mode) {
  const int m = scene.ambient_dim;
  const std::size_t N = scene.grid.num_nodes();
  if (!T.T.grid().same_layout(scene.grid) || static_cast<int>(T.T.comps()) != m)
    throw ClassifyError("fit_killing: field does not live on the scene grid");

  const int npairs = m * (m - 1) / 2;
  const int q = npairs + m;
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(npairs);
  for (int r = 0; r < m; ++r)
    for (int c = r + 1; c < m; ++c) pairs.emplace_back(r, c);

  // normal equations accumulated serially for determinism
  Eigen::MatrixXd AtA = Eigen::MatrixXd::Zero(q, q);
  Eigen::VectorXd Atb = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd row(q);
  for (std::size_t node = 0; node < N; ++node) {
    std::span<const double> f = scene.map.at(node);
    std::span<const double> t = T.T.at(node);
    for (int r = 0; r < m; ++r) {
      row.setZero();
      for (int k = 0; k < npairs; ++k) {
        auto [a, b] = pairs[k];
        if (a == r) row(k) += f[b];
        if (b == r) row(k) -= f[a];
      }
      row(npairs + r) = 1.0;
      AtA.noalias() += row * row.transpose();
      Atb.noalias() += row * t[r];
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(AtA);
  const auto& ev = es.eigenvalues();
  const double emax = ev(q - 1);
  KillingFit fit;
  Eigen::VectorXd sol = Eigen::VectorXd::Zero(q);
  if (emax <= 0.0) {
    fit.rank_deficient = true;
  } else {
    // minimal-norm solution; null directions are parameters the scene cannot see
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(q);
    for (int k = 0; k < q; ++k) {
      if (ev(k) > 1e-12 * emax)
        inv(k) = 1.0 / ev(k);
      else
        fit.rank_deficient = true;
    }
    sol = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * Atb;
  }

  fit.D.assign(static_cast<std::size_t>(m) * m, 0.0);
  fit.v.assign(m, 0.0);
  for (int k = 0; k < npairs; ++k) {
    auto [a, b] = pairs[k];
    fit.D[a * m + b] = sol(k);
    fit.D[b * m + a] = -sol(k);
  }
  for (int c = 0; c < m; ++c) fit.v[c] = sol(npairs + c);

  const double scale = std::max(1.0, T.T.sup_norm());
  fit.residual = max_over(
                     N,
                     [&](std::size_t node) {
                       std::span<const double> f = scene.map.at(node);
                       std::span<const double> t = T.T.at(node);
                       double w = 0.0;
                       for (int r = 0; r < m; ++r) {
                         double s = fit.v[r] - t[r];
                         for (int c = 0; c < m; ++c) s += fit.D[r * m + c] * f[c];
                         w = std::max(w, std::abs(s));
                       }
                       return w;
                     },
                     mode) /
                 scale;
  return fit;
}

BendingField killing_field(const ImmersionScene& scene, std::span<const double> D,
                           std::span<const double> v) {
  const int m = scene.ambient_dim;
  BendingField out;
  out.label = "killing";
  out.T = GridField(scene.grid, {m});
  for (std::size_t node = 0; node < scene.grid.num_nodes(); ++node) {
    std::span<const double> f = scene.map.at(node);
    std::span<double> t = out.T.at(node);
    for (int r = 0; r < m; ++r) {
      double s = v[r];
      for (int c = 0; c < m; ++c) s += D[r * m + c] * f[c];
      t[r] = s;
    }
  }
  return out;
}

PairTriviality pair_triviality(const FramedGeometry& geom, const AssociatedPair& pair,
                               Exec mode) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, p = geom.p;
  const std::size_t N = grid.num_nodes();
  const double scale = pair_scale(geom, pair);

  PairTriviality out;
  out.C = GridField(grid, {p, p});
  const int nunk = p * (p - 1) / 2;
  std::vector<double> misfit(N, 0.0);
  std::atomic<bool> impossible{false};

  for_each_index(
      N,
      [&](std::size_t node) {
        std::span<const double> al = geom.alpha.at(node);
        std::span<const double> be = pair.beta.at(node);
        double alpha_max = 0.0, beta_max = 0.0;
        for (int c = 0; c < n * n * p; ++c) {
          alpha_max = std::max(alpha_max, std::abs(al[c]));
          beta_max = std::max(beta_max, std::abs(be[c]));
        }
        Eigen::VectorXd u = Eigen::VectorXd::Zero(std::max(nunk, 1));
        if (nunk > 0 && alpha_max > 0.0) {
          Eigen::MatrixXd Amat(n * n * p, nunk);
          Eigen::VectorXd bvec(n * n * p);
          int row = 0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int a = 0; a < p; ++a) {
                int col = 0;
                for (int c = 0; c < p; ++c)
                  for (int d = c + 1; d < p; ++d) {
                    // (C alpha)^a_ij = sum_b C_ab alpha^b_ij with C_cd = +u, C_dc = -u
                    double coef = 0.0;
                    if (a == c) coef += al[(i * n + j) * p + d];
                    if (a == d) coef -= al[(i * n + j) * p + c];
                    Amat(row, col++) = coef;
                  }
                bvec(row++) = be[(i * n + j) * p + a];
              }
          u = Amat.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(bvec);
        }
        std::span<double> Cv = out.C.at(node);
        {
          int col = 0;
          for (int c = 0; c < p; ++c)
            for (int d = c + 1; d < p; ++d) {
              Cv[c * p + d] = u(col);
              Cv[d * p + c] = -u(col);
              ++col;
            }
        }
        double w = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int a = 0; a < p; ++a) {
              double s = be[(i * n + j) * p + a];
              for (int b = 0; b < p; ++b) s -= Cv[a * p + b] * al[(i * n + j) * p + b];
              w = std::max(w, std::abs(s));
            }
        misfit[node] = w;
        if (alpha_max <= 1e-12 * std::max(1.0, beta_max) && beta_max > 1e-12)
          impossible.store(true, std::memory_order_relaxed);
      },
      mode);

  out.impossible = impossible.load();
  double worst = 0.0;
  for (double w : misfit) worst = std::max(worst, w);
  out.res_beta = worst / scale;

  // res_E = sup |E + nabla^perp C| with finite-difference derivatives of C
  GridField dC(grid, {n, p, p});
  for (int d = 0; d < n; ++d) {
    GridField cd = partial(out.C, d, mode);
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> src = cd.at(node);
          std::span<double> dst = dC.at(node);
          for (int c = 0; c < p * p; ++c) dst[d * p * p + c] = src[c];
        },
        mode);
  }
  out.res_E = max_over(
                  N,
                  [&](std::size_t node) {
                    std::span<const double> Ev = pair.E.at(node);
                    std::span<const double> Cv = out.C.at(node);
                    std::span<const double> dCv = dC.at(node);
                    std::span<const double> Ov = geom.omega.at(node);
                    auto OM = [&](int i, int a, int b) { return Ov[(i * p + a) * p + b]; };
                    double w = 0.0;
                    for (int i = 0; i < n; ++i)
                      for (int a = 0; a < p; ++a)
                        for (int b = 0; b < p; ++b) {
                          // coefficient of xi_a in (nabla^perp_i C) xi_b
                          double nab = dCv[(i * p + a) * p + b];
                          for (int c = 0; c < p; ++c)
                            nab += Cv[c * p + b] * OM(i, c, a) - OM(i, b, c) * Cv[a * p + c];
                          w = std::max(w, std::abs(Ev[(i * p + b) * p + a] + nab));
                        }
                    return w;
                  },
                  mode) /
              scale;
  return out;
}

GridField solve_E_from_beta(const FramedGeometry& geom, const GridField& beta, Exec mode) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, p = geom.p;
  const std::size_t N = grid.num_nodes();
  std::vector<int> want{n, n, p};
  if (!beta.grid().same_layout(grid) || beta.shape() != want)
    throw ClassifyError("solve_E_from_beta: beta shape mismatch");

  GridField E(grid, {n, p, p});
  if (p == 1) return E;  // the compatibility condition forces E = 0 on a line bundle

  std::atomic<long long> bad{-1};
  for_each_index(
      N,
      [&](std::size_t node) {
        if (first_normal_rank(geom, node) < p) {
          long long expected = -1;
          bad.compare_exchange_strong(expected, static_cast<long long>(node));
        }
      },
      mode);
  if (bad.load() >= 0)
    throw ClassifyError(
        "solve_E_from_beta: first normal space is not full at node " + std::to_string(bad.load()) +
        "; E is not determined by beta there");

  GridField dbeta(grid, {n, n, n, p});
  for (int d = 0; d < n; ++d) {
    GridField bd = partial(beta, d, mode);
    for_each_index(
        N,
        [&](std::size_t node) {
          std::span<const double> src = bd.at(node);
          std::span<double> dst = dbeta.at(node);
          for (int c = 0; c < n * n * p; ++c) dst[d * n * n * p + c] = src[c];
        },
        mode);
  }

  const int nunk = n * p * (p - 1) / 2;
  const int nrows = p * n * (n - 1) / 2 * n;
  auto unk_index = [&](int t, int c, int d) {
    // unknown E[t][c][d] with c<d
    int pairidx = 0, found = -1;
    for (int a = 0; a < p; ++a)
      for (int b = a + 1; b < p; ++b) {
        if (a == c && b == d) found = pairidx;
        ++pairidx;
      }
    return t * (p * (p - 1) / 2) + found;
  };

  for_each_index(
      N,
      [&](std::size_t node) {
        std::span<const double> db = dbeta.at(node);
        std::span<const double> be = beta.at(node);
        std::span<const double> Gv = geom.Gamma.at(node);
        std::span<const double> Ov = geom.omega.at(node);
        std::span<const double> al = geom.alpha.at(node);
        auto BE = [&](int i, int j, int a) { return be[(i * n + j) * p + a]; };
        auto DB = [&](int d, int j, int k, int a) { return db[((d * n + j) * n + k) * p + a]; };
        auto GA = [&](int k, int i, int j) { return Gv[(k * n + i) * n + j]; };
        auto OM = [&](int i, int a, int b) { return Ov[(i * p + a) * p + b]; };
        auto AL = [&](int i, int j, int a) { return al[(i * n + j) * p + a]; };
        auto NB = [&](int i, int j, int k, int b) {
          double s = DB(i, j, k, b);
          for (int l = 0; l < n; ++l)
            s -= GA(l, i, j) * BE(l, k, b) + GA(l, i, k) * BE(j, l, b);
          for (int c = 0; c < p; ++c) s += BE(j, k, c) * OM(i, c, b);
          return s;
        };

        Eigen::MatrixXd Amat = Eigen::MatrixXd::Zero(nrows, nunk);
        Eigen::VectorXd bvec(nrows);
        int row = 0;
        for (int b = 0; b < p; ++b)
          for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
              for (int k = 0; k < n; ++k) {
                bvec(row) = NB(i, j, k, b) - NB(j, i, k, b);
                // E(d_j, alpha(d_i,d_k)) - E(d_i, alpha(d_j,d_k)), coefficient of xi_b
                for (int a = 0; a < p; ++a) {
                  if (a == b) continue;
                  const int c = std::min(a, b), d = std::max(a, b);
                  const double sign = a < b ? 1.0 : -1.0;
                  Amat(row, unk_index(j, c, d)) += sign * AL(i, k, a);
                  Amat(row, unk_index(i, c, d)) -= sign * AL(j, k, a);
                }
                ++row;
              }
        Eigen::VectorXd u =
            Amat.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(bvec);
        std::span<double> Ev = E.at(node);
        for (int t = 0; t < n; ++t) {
          int col = t * (p * (p - 1) / 2);
          for (int a = 0; a < p; ++a)
            for (int b = a + 1; b < p; ++b) {
              Ev[(t * p + a) * p + b] = u(col);
              Ev[(t * p + b) * p + a] = -u(col);
              ++col;
            }
        }
      },
      mode);
  return E;
}

}  // namespace bendkit
