#include "bendkit/fundsys.hpp"

#include <cmath>

namespace bendkit {

namespace {

// Collects the axis derivatives of a field into one block field
// d[axis][...inner shape...].
GridField stack_partials(const GridField& field, Exec mode) {
  const ChartGrid& grid = field.grid();
  const int n = grid.dim();
  std::vector<int> shape;
  shape.push_back(n);
  for (int s : field.shape()) shape.push_back(s);
  GridField out(grid, shape);
  const std::size_t comps = field.comps();
  for (int d = 0; d < n; ++d) {
    GridField fd = partial(field, d, mode);
    for_each_index(
        grid.num_nodes(),
        [&](std::size_t node) {
          std::span<const double> src = fd.at(node);
          std::span<double> dst = out.at(node);
          for (std::size_t c = 0; c < comps; ++c) dst[d * comps + c] = src[c];
        },
        mode);
  }
  return out;
}

}  // namespace

double fundsys_tol(const FramedGeometry& geom, double tol_scale) {
  const double h = geom.grid().max_spacing();
  return 20.0 * h * h * tol_scale;
}

double gauss_residual(const FramedGeometry& geom, const AssociatedPair& pair, Exec mode) {
  const int n = geom.n, p = geom.p;
  const double scale = pair_scale(geom, pair);
  double worst = max_over(
      geom.grid().num_nodes(),
      [&](std::size_t node) {
        std::span<const double> al = geom.alpha.at(node);
        std::span<const double> Av = geom.A.at(node);
        std::span<const double> gv = geom.g.at(node);
        std::span<const double> be = pair.beta.at(node);
        std::span<const double> Bo = pair.Bop.at(node);
        auto AL = [&](int i, int j, int a) { return al[(i * n + j) * p + a]; };
        auto BE = [&](int i, int j, int a) { return be[(i * n + j) * p + a]; };
        auto AOP = [&](int a, int k, int j) { return Av[(a * n + k) * n + j]; };
        auto BOP = [&](int a, int k, int j) { return Bo[(a * n + k) * n + j]; };
        double w = 0.0;
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
              for (int l = 0; l < n; ++l) {
                double s = 0.0;
                for (int a = 0; a < p; ++a) {
                  s += BE(j, k, a) * AOP(a, l, i) + AL(j, k, a) * BOP(a, l, i);
                  s -= BE(i, k, a) * AOP(a, l, j) + AL(i, k, a) * BOP(a, l, j);
                }
                v[l] = s;
              }
              double q = 0.0;
              for (int l = 0; l < n; ++l)
                for (int r = 0; r < n; ++r) q += gv[l * n + r] * v[l] * v[r];
              w = std::max(w, std::sqrt(std::max(0.0, q)));
            }
        return w;
      },
      mode);
  return worst / scale;
}

double codazzi_residual(const FramedGeometry& geom, const AssociatedPair& pair, Exec mode) {
  const int n = geom.n, p = geom.p;
  const double scale = pair_scale(geom, pair);
  GridField dbeta = stack_partials(pair.beta, mode);
  double worst = max_over(
      geom.grid().num_nodes(),
      [&](std::size_t node) {
        std::span<const double> db = dbeta.at(node);
        std::span<const double> be = pair.beta.at(node);
        std::span<const double> Gv = geom.Gamma.at(node);
        std::span<const double> Ov = geom.omega.at(node);
        std::span<const double> al = geom.alpha.at(node);
        std::span<const double> Ev = pair.E.at(node);
        auto BE = [&](int i, int j, int a) { return be[(i * n + j) * p + a]; };
        auto DB = [&](int d, int j, int k, int a) { return db[((d * n + j) * n + k) * p + a]; };
        auto GA = [&](int k, int i, int j) { return Gv[(k * n + i) * n + j]; };
        auto OM = [&](int i, int a, int b) { return Ov[(i * p + a) * p + b]; };
        auto AL = [&](int i, int j, int a) { return al[(i * n + j) * p + a]; };
        auto EE = [&](int i, int a, int b) { return Ev[(i * p + a) * p + b]; };
        auto NB = [&](int i, int j, int k, int b) {
          double s = DB(i, j, k, b);
          for (int l = 0; l < n; ++l)
            s -= GA(l, i, j) * BE(l, k, b) + GA(l, i, k) * BE(j, l, b);
          for (int c = 0; c < p; ++c) s += BE(j, k, c) * OM(i, c, b);
          return s;
        };
        double w = 0.0;
        for (int b = 0; b < p; ++b)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int k = 0; k < n; ++k) {
                double s = NB(i, j, k, b) - NB(j, i, k, b);
                for (int a = 0; a < p; ++a)
                  s -= EE(j, a, b) * AL(i, k, a) - EE(i, a, b) * AL(j, k, a);
                w = std::max(w, std::abs(s));
              }
        return w;
      },
      mode);
  return worst / scale;
}

double codazzi2_residual(const FramedGeometry& geom, const AssociatedPair& pair, Exec mode) {
  const int n = geom.n, p = geom.p;
  const double scale = pair_scale(geom, pair);
  GridField dBop = stack_partials(pair.Bop, mode);
  double worst = max_over(
      geom.grid().num_nodes(),
      [&](std::size_t node) {
        std::span<const double> dB = dBop.at(node);
        std::span<const double> Bo = pair.Bop.at(node);
        std::span<const double> Gv = geom.Gamma.at(node);
        std::span<const double> Ov = geom.omega.at(node);
        std::span<const double> Av = geom.A.at(node);
        std::span<const double> Ev = pair.E.at(node);
        auto DBOP = [&](int d, int a, int k, int j) {
          return dB[((d * p + a) * n + k) * n + j];
        };
        auto BOP = [&](int a, int k, int j) { return Bo[(a * n + k) * n + j]; };
        auto GA = [&](int k, int i, int j) { return Gv[(k * n + i) * n + j]; };
        auto OM = [&](int i, int a, int b) { return Ov[(i * p + a) * p + b]; };
        auto AOP = [&](int a, int k, int j) { return Av[(a * n + k) * n + j]; };
        auto EE = [&](int i, int a, int b) { return Ev[(i * p + a) * p + b]; };
        // endomorphism covariant derivative of B_a with the frame field fixed
        auto NBOP = [&](int i, int a, int k, int j) {
          double s = DBOP(i, a, k, j);
          for (int l = 0; l < n; ++l)
            s += GA(k, i, l) * BOP(a, l, j) - GA(l, i, j) * BOP(a, k, l);
          return s;
        };
        double w = 0.0;
        for (int a = 0; a < p; ++a)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int k = 0; k < n; ++k) {
                double s = NBOP(i, a, k, j) - NBOP(j, a, k, i);
                for (int b = 0; b < p; ++b) {
                  s -= OM(i, a, b) * BOP(b, k, j) - OM(j, a, b) * BOP(b, k, i);
                  s -= EE(i, a, b) * AOP(b, k, j) - EE(j, a, b) * AOP(b, k, i);
                }
                w = std::max(w, std::abs(s));
              }
        return w;
      },
      mode);
  return worst / scale;
}

double ricci_residual(const FramedGeometry& geom, const AssociatedPair& pair, Exec mode) {
  const int n = geom.n, p = geom.p;
  const double scale = pair_scale(geom, pair);
  GridField dE = stack_partials(pair.E, mode);
  double worst = max_over(
      geom.grid().num_nodes(),
      [&](std::size_t node) {
        std::span<const double> dEv = dE.at(node);
        std::span<const double> Ev = pair.E.at(node);
        std::span<const double> Gv = geom.Gamma.at(node);
        std::span<const double> Ov = geom.omega.at(node);
        std::span<const double> Av = geom.A.at(node);
        std::span<const double> Bo = pair.Bop.at(node);
        std::span<const double> be = pair.beta.at(node);
        std::span<const double> al = geom.alpha.at(node);
        auto DE = [&](int d, int j, int a, int b) { return dEv[((d * n + j) * p + a) * p + b]; };
        auto EE = [&](int i, int a, int b) { return Ev[(i * p + a) * p + b]; };
        auto GA = [&](int k, int i, int j) { return Gv[(k * n + i) * n + j]; };
        auto OM = [&](int i, int a, int b) { return Ov[(i * p + a) * p + b]; };
        auto AOP = [&](int a, int k, int j) { return Av[(a * n + k) * n + j]; };
        auto BOP = [&](int a, int k, int j) { return Bo[(a * n + k) * n + j]; };
        auto BE = [&](int i, int j, int a) { return be[(i * n + j) * p + a]; };
        auto AL = [&](int i, int j, int a) { return al[(i * n + j) * p + a]; };
        auto NE = [&](int i, int j, int a, int b) {
          double s = DE(i, j, a, b);
          for (int l = 0; l < n; ++l) s -= GA(l, i, j) * EE(l, a, b);
          for (int c = 0; c < p; ++c) s += EE(j, a, c) * OM(i, c, b) - OM(i, a, c) * EE(j, c, b);
          return s;
        };
        double w = 0.0;
        for (int a = 0; a < p; ++a)
          for (int b = 0; b < p; ++b)
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) {
                double s = NE(i, j, a, b) - NE(j, i, a, b);
                for (int k = 0; k < n; ++k) {
                  s -= AOP(a, k, j) * BE(i, k, b) - AOP(a, k, i) * BE(k, j, b);
                  s -= BOP(a, k, j) * AL(i, k, b) - BOP(a, k, i) * AL(k, j, b);
                }
                w = std::max(w, std::abs(s));
              }
        return w;
      },
      mode);
  return worst / scale;
}

SystemReport verify(const FramedGeometry& geom, const AssociatedPair& pair, double tol,
                    Exec mode) {
  SystemReport rep;
  rep.gauss = gauss_residual(geom, pair, mode);
  rep.codazzi = codazzi_residual(geom, pair, mode);
  rep.codazzi2 = codazzi2_residual(geom, pair, mode);
  rep.ricci = ricci_residual(geom, pair, mode);
  rep.anti = compatibility_residual(geom, pair, mode);
  rep.tol = tol;
  rep.pass = rep.worst() <= tol;
  return rep;
}

SystemReport verify(const FramedGeometry& geom, const AssociatedPair& pair, Exec mode) {
  return verify(geom, pair, fundsys_tol(geom), mode);
}

HypersurfaceChecks hypersurface_checks(const FramedGeometry& geom, const GridField& Bhat,
                                       Exec mode) {
  if (geom.p != 1) throw FundsysError("hypersurface route requires codimension one");
  const int n = geom.n;
  std::vector<int> want{n, n};
  if (!Bhat.grid().same_layout(geom.grid()) || Bhat.shape() != want)
    throw FundsysError("Bhat shape does not match the geometry");
  const double scale = std::max({1.0, Bhat.sup_norm(), Bhat.sup_norm() * geom.alpha_inf});

  HypersurfaceChecks checks;
  GridField dB = stack_partials(Bhat, mode);
  checks.symmetry = max_over(
                        geom.grid().num_nodes(),
                        [&](std::size_t node) {
                          std::span<const double> Bv = Bhat.at(node);
                          std::span<const double> gv = geom.g.at(node);
                          double w = 0.0;
                          for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j) {
                              double lhs = 0.0, rhs = 0.0;
                              for (int k = 0; k < n; ++k) {
                                lhs += Bv[k * n + i] * gv[k * n + j];
                                rhs += Bv[k * n + j] * gv[k * n + i];
                              }
                              w = std::max(w, std::abs(lhs - rhs));
                            }
                          return w;
                        },
                        mode) /
                    scale;
  checks.codazzi = max_over(
                       geom.grid().num_nodes(),
                       [&](std::size_t node) {
                         std::span<const double> dBv = dB.at(node);
                         std::span<const double> Bv = Bhat.at(node);
                         std::span<const double> Gv = geom.Gamma.at(node);
                         auto DB = [&](int d, int k, int j) { return dBv[(d * n + k) * n + j]; };
                         auto BB = [&](int k, int j) { return Bv[k * n + j]; };
                         auto GA = [&](int k, int i, int j) { return Gv[(k * n + i) * n + j]; };
                         auto NB = [&](int i, int k, int j) {
                           double s = DB(i, k, j);
                           for (int l = 0; l < n; ++l)
                             s += GA(k, i, l) * BB(l, j) - GA(l, i, j) * BB(k, l);
                           return s;
                         };
                         double w = 0.0;
                         for (int i = 0; i < n; ++i)
                           for (int j = 0; j < n; ++j)
                             for (int k = 0; k < n; ++k)
                               w = std::max(w, std::abs(NB(i, k, j) - NB(j, k, i)));
                         return w;
                       },
                       mode) /
                   scale;
  checks.wedge = max_over(
                     geom.grid().num_nodes(),
                     [&](std::size_t node) {
                       std::span<const double> Bv = Bhat.at(node);
                       std::span<const double> Av = geom.A.at(node);
                       auto BB = [&](int k, int j) { return Bv[k * n + j]; };
                       auto AA = [&](int k, int j) { return Av[k * n + j]; };
                       double w = 0.0;
                       for (int i = 0; i < n; ++i)
                         for (int j = i + 1; j < n; ++j)
                           for (int k = 0; k < n; ++k)
                             for (int l = k + 1; l < n; ++l) {
                               double s = BB(k, i) * AA(l, j) - BB(l, i) * AA(k, j) -
                                          BB(k, j) * AA(l, i) + BB(l, j) * AA(k, i);
                               w = std::max(w, std::abs(s));
                             }
                       return w;
                     },
                     mode) /
                 scale;
  return checks;
}

AssociatedPair hypersurface_pair(const FramedGeometry& geom, const GridField& Bhat, double tol,
                                 Exec mode) {
  HypersurfaceChecks checks = hypersurface_checks(geom, Bhat, mode);
  if (checks.symmetry > tol)
    throw FundsysError("hypersurface tensor is not symmetric (residual " +
                       std::to_string(checks.symmetry) + ")");
  if (checks.codazzi > tol)
    throw FundsysError("hypersurface tensor violates the Codazzi condition (residual " +
                       std::to_string(checks.codazzi) + ")");
  if (checks.wedge > tol)
    throw FundsysError("hypersurface tensor violates the wedge condition (residual " +
                       std::to_string(checks.wedge) + ")");
  const int n = geom.n;
  GridField beta(geom.grid(), {n, n, 1});
  GridField E(geom.grid(), {n, 1, 1});
  for_each_index(
      geom.grid().num_nodes(),
      [&](std::size_t node) {
        std::span<const double> Bv = Bhat.at(node);
        std::span<const double> gv = geom.g.at(node);
        std::span<double> be = beta.at(node);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += Bv[k * n + i] * gv[k * n + j];
            be[i * n + j] = s;
          }
      },
      mode);
  return make_pair_from_fields(geom, std::move(beta), std::move(E), mode);
}

}  // namespace bendkit
