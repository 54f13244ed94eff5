#pragma once

#include <vector>

#include "sjb/core.hpp"

namespace sjb {

/// Closed-form holomorphic derivatives of the auxiliary fields with respect
/// to the flat chart.  w-type entries are indexed by the ordered pair slot.
///
///   dM/dw_pq      = (M e_p x_q^T + M e_q x_p^T) f_pq   with x_a = X row a
///   dX/dw_pq      = (X e_p x_q^T + X e_q x_p^T) f_pq
///   dXbar/dw_pq   = (M e_p m_q^T + M e_q m_p^T) f_pq   with m_a = M row a
///   deta/dz       = M,      detabar/dz = X
///   deta_t/dw_pq  = (M_tp etabar_q + M_tq etabar_p) f_pq
///   detabar_t/dw_pq = (etabar_p X_qt + etabar_q X_pt) f_pq
struct DerivativeBundle {
  std::vector<Matrix> dM_dw;     // m entries, each n x n
  std::vector<Matrix> dX_dw;     // m entries, each n x n
  std::vector<Matrix> dXbar_dw;  // m entries, each n x n
  Matrix deta_dz;                // (t, l) = d eta_t / d z_l
  Matrix detabar_dz;             // (t, l) = d etabar_t / d z_l
  Matrix deta_dw;                // n x m
  Matrix detabar_dw;             // n x m
};

inline DerivativeBundle derivative_bundle(const ModelParams& params,
                                          const JacobiBallPoint& point) {
  const int n = params.n;
  const CoordinateIndexMap map(n);
  const int m = map.w_count();
  const AuxMatrices aux = aux_matrices(params, point);
  const Matrix& M = aux.M;
  const Matrix& X = aux.X;
  const Vector eb = aux.eta.conjugate();

  DerivativeBundle d;
  d.dM_dw.resize(m);
  d.dX_dw.resize(m);
  d.dXbar_dw.resize(m);
  d.deta_dw.resize(n, m);
  d.detabar_dw.resize(n, m);
  for (int a = 0; a < m; ++a) {
    auto [p, q] = map.w_pair(n + a);
    const double f = pair_weight(p, q);
    Matrix dM(n, n), dX(n, n), dXb(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        dM(r, c) = (M(r, p) * X(q, c) + M(r, q) * X(p, c)) * f;
        dX(r, c) = (X(r, p) * X(c, q) + X(r, q) * X(p, c)) * f;
        dXb(r, c) = (M(r, p) * M(c, q) + M(r, q) * M(c, p)) * f;
      }
    }
    d.dM_dw[a] = std::move(dM);
    d.dX_dw[a] = std::move(dX);
    d.dXbar_dw[a] = std::move(dXb);
    for (int t = 0; t < n; ++t) {
      d.deta_dw(t, a) = (M(t, p) * eb(q) + M(t, q) * eb(p)) * f;
      d.detabar_dw(t, a) = (eb(p) * X(q, t) + eb(q) * X(p, t)) * f;
    }
  }
  d.deta_dz = M;
  d.detabar_dz = X;
  return d;
}

}  // namespace sjb
