#pragma once

#include <cmath>

#include "sjb/core.hpp"
#include "sjb/fd.hpp"

namespace sjb {

/// Balanced-metric matrix in the block layout of the flat chart:
/// h1 = z/zbar block (n x n), h2 = z/wbar (n x m), h3 = h2^H, h4 = w/wbar,
/// with m = n(n+1)/2 ordered pairs.
struct BlockMetric {
  Matrix h1, h2, h3, h4;
  Matrix assembled;
};

struct BlockMetricInverse {
  Matrix h1, h2, h3, h4;
  Matrix assembled;
};

/// Kahler potential
///   f = -(k/2) log det N + mu { zbar^T M z + z^T X z / 2 + conj(z^T X z)/2 }.
inline double kahler_potential(const ModelParams& params, const JacobiBallPoint& point) {
  const AuxMatrices aux = aux_matrices(params, point);
  const Vector& z = point.z;
  Eigen::SelfAdjointEigenSolver<Matrix> es(aux.N);
  double logdetN = es.eigenvalues().array().log().sum();
  Complex quad = z.conjugate().transpose() * aux.M * z;
  Complex zXz = z.transpose() * (point.W.matrix().conjugate() * aux.M) * z;
  Complex f = -params.k / 2.0 * logdetN + params.mu * (quad + 0.5 * zXz + 0.5 * std::conj(zXz));
  if (std::abs(f.imag()) > tol::reality)
    throw Error(ErrorCode::ValidationFailed, "kahler_potential: non-real value");
  return f.real();
}

/// Both quadratic forms of the kernel exponent F:
///   2F = 2 zbar^T M z + z^T conj(W) M z + zbar^T M W zbar
///   2F = 2 etabar^T eta - eta^T conj(W) eta - etabar^T W etabar
inline std::pair<Complex, Complex> kernel_exponent_forms(const ModelParams& params,
                                                         const JacobiBallPoint& point) {
  const AuxMatrices aux = aux_matrices(params, point);
  const Vector& z = point.z;
  const Matrix& W = point.W.matrix();
  Complex zMz = z.conjugate().transpose() * aux.M * z;
  Complex zXz = z.transpose() * (W.conjugate() * aux.M) * z;
  Complex f_z = zMz + 0.5 * zXz + 0.5 * std::conj(zXz);

  const Vector& eta = aux.eta;
  Complex ee = eta.conjugate().transpose() * eta;
  Complex eWe = eta.transpose() * W.conjugate() * eta;
  Complex f_eta = ee - 0.5 * eWe - 0.5 * std::conj(eWe);
  return {f_z, f_eta};
}

/// log K = (k/2) log det M + mu F.
inline double log_kernel(const ModelParams& params, const JacobiBallPoint& point) {
  const AuxMatrices aux = aux_matrices(params, point);
  Eigen::SelfAdjointEigenSolver<Matrix> es(aux.N);
  double logdetN = es.eigenvalues().array().log().sum();
  auto [f_z, f_eta] = kernel_exponent_forms(params, point);
  if (std::abs(f_z - f_eta) > tol::reality)
    throw Error(ErrorCode::ValidationFailed, "log_kernel: exponent forms disagree");
  return -params.k / 2.0 * logdetN + params.mu * f_z.real();
}

/// Reproducing kernel K = det(M)^{k/2} exp(mu F); throws Overflow when it
/// cannot be represented, in which case callers should use log_kernel.
inline double kernel(const ModelParams& params, const JacobiBallPoint& point) {
  double lk = log_kernel(params, point);
  if (lk > 700.0) throw Error(ErrorCode::Overflow, "kernel: overflow, use log_kernel");
  return std::exp(lk);
}

/// Closed-form metric blocks.
inline BlockMetric metric_matrix(const ModelParams& params, const JacobiBallPoint& point) {
  const int n = params.n;
  const CoordinateIndexMap map(n);
  const int m = map.w_count();
  const AuxMatrices aux = aux_matrices(params, point);
  const Matrix& M = aux.M;
  const Matrix Mb = M.conjugate();
  const Vector& eta = aux.eta;
  const Vector eb = eta.conjugate();
  const double mu = params.mu;

  BlockMetric h;
  h.h1 = mu * Mb;
  h.h2.resize(n, m);
  h.h3.resize(m, n);
  h.h4.resize(m, m);
  for (int a = 0; a < m; ++a) {
    auto [p, q] = map.w_pair(n + a);
    const double f = pair_weight(p, q);
    for (int i = 0; i < n; ++i) {
      h.h2(i, a) = mu * (eta(q) * Mb(i, p) + eta(p) * Mb(i, q)) * f;
      h.h3(a, i) = mu * (eb(q) * Mb(p, i) + eb(p) * Mb(q, i)) * f;
    }
  }
  for (int a = 0; a < m; ++a) {
    auto [p, q] = map.w_pair(n + a);
    const double fa = pair_weight(p, q);
    for (int b = 0; b < m; ++b) {
      auto [mm, nn] = map.w_pair(n + b);
      const double fb = pair_weight(mm, nn);
      Complex hk = 2.0 * M(mm, p) * M(nn, q) * offdiag_weight(p, q) +
                   2.0 * M(mm, q) * M(nn, p) * offdiag_weight(mm, nn) +
                   M(mm, p) * M(mm, p) * (p == q ? 1.0 : 0.0) * (mm == nn ? 1.0 : 0.0);
      Complex hmu = (eb(p) * (eta(nn) * Mb(q, mm) + eta(mm) * Mb(q, nn)) +
                     eb(q) * (eta(nn) * Mb(p, mm) + eta(mm) * Mb(p, nn))) *
                    fa * fb;
      h.h4(a, b) = params.k / 2.0 * hk + mu * hmu;
    }
  }
  h.assembled.resize(n + m, n + m);
  h.assembled << h.h1, h.h2, h.h3, h.h4;
  return h;
}

/// Closed-form inverse with respect to the ordered chart: h * h^{-1} = I.
/// The z/zbar block is (1/mu + alpha/k) conj(N) + conj(S) S^T / k; the
/// rank-one term is required for n >= 2 and collapses into the scalar
/// prefactor at n = 1.
inline BlockMetricInverse metric_inverse(const ModelParams& params,
                                         const JacobiBallPoint& point) {
  const int n = params.n;
  const CoordinateIndexMap map(n);
  const int m = map.w_count();
  const AuxMatrices aux = aux_matrices(params, point);
  const Matrix Nb = aux.N.conjugate();
  const Vector& S = aux.S;
  const Vector Sb = S.conjugate();
  const double k = params.k;

  BlockMetricInverse inv;
  inv.h1 = (1.0 / params.mu + aux.alpha / k) * Nb + (Sb * S.transpose()) / k;
  inv.h2.resize(n, m);
  inv.h3.resize(m, n);
  inv.h4.resize(m, m);
  for (int a = 0; a < m; ++a) {
    auto [mm, nn] = map.w_pair(n + a);
    for (int i = 0; i < n; ++i) {
      inv.h2(i, a) = -(S(nn) * Nb(i, mm) + S(mm) * Nb(i, nn)) / k;
      inv.h3(a, i) = -(Sb(nn) * Nb(mm, i) + Sb(mm) * Nb(nn, i)) / k;
    }
  }
  for (int a = 0; a < m; ++a) {
    auto [p, q] = map.w_pair(n + a);
    for (int b = 0; b < m; ++b) {
      auto [mm, nn] = map.w_pair(n + b);
      inv.h4(a, b) = (Nb(q, nn) * Nb(p, mm) + Nb(p, nn) * Nb(q, mm)) / k;
    }
  }
  inv.assembled.resize(n + m, n + m);
  inv.assembled << inv.h1, inv.h2, inv.h3, inv.h4;
  return inv;
}

struct DeterminantResult {
  double lu = 0.0;           // determinant of the assembled matrix
  double closed_form = 0.0;  // 2^{n(n-1)/2} (k/2)^{n(n+1)/2} mu^n det(N)^{-(n+2)}
};

/// Determinant of the assembled metric matrix, both by LU factorization and
/// in closed form.  The off-diagonal pairs' weight contributes the factor
/// 2^{n(n-1)/2} relative to the diagonal-normalized convention.
inline DeterminantResult metric_determinant(const ModelParams& params,
                                            const JacobiBallPoint& point) {
  const int n = params.n;
  const BlockMetric h = metric_matrix(params, point);
  Complex det = Eigen::PartialPivLU<Matrix>(h.assembled).determinant();
  const AuxMatrices aux = aux_matrices(params, point);
  Eigen::SelfAdjointEigenSolver<Matrix> es(aux.N);
  double logdetN = es.eigenvalues().array().log().sum();
  DeterminantResult out;
  out.lu = det.real();
  out.closed_form = std::pow(2.0, n * (n - 1) / 2.0) * std::pow(params.k / 2.0, n * (n + 1) / 2.0) *
                    std::pow(params.mu, n) * std::exp(-(n + 2) * logdetN);
  return out;
}

/// Max deviation of the Siegel-block inverse contract
///   sum_{m<=n} h^k_{pq mbar nbar} k_{mn ubar vbar} = Delta^{uv}_{pq},
/// with k_{mn ubar vbar} = (N_vn conj(N)_mu + N_vm conj(N)_nu) / 2.
inline double hk_inverse_contract(const ModelParams& params, const JacobiBallPoint& point) {
  const int n = params.n;
  const CoordinateIndexMap map(n);
  const int m = map.w_count();
  const AuxMatrices aux = aux_matrices(params, point);
  const Matrix& M = aux.M;
  const Matrix& N = aux.N;
  const Matrix Nb = N.conjugate();

  Matrix hk(m, m), kk(m, m);
  for (int a = 0; a < m; ++a) {
    auto [p, q] = map.w_pair(n + a);
    for (int b = 0; b < m; ++b) {
      auto [mm, nn] = map.w_pair(n + b);
      hk(a, b) = 2.0 * M(mm, p) * M(nn, q) * offdiag_weight(p, q) +
                 2.0 * M(mm, q) * M(nn, p) * offdiag_weight(mm, nn) +
                 M(mm, p) * M(mm, p) * (p == q ? 1.0 : 0.0) * (mm == nn ? 1.0 : 0.0);
    }
  }
  for (int b = 0; b < m; ++b) {
    auto [mm, nn] = map.w_pair(n + b);
    for (int c = 0; c < m; ++c) {
      auto [u, v] = map.w_pair(n + c);
      kk(b, c) = 0.5 * (N(v, nn) * Nb(mm, u) + N(v, mm) * Nb(nn, u));
    }
  }
  double dev = 0.0;
  for (int a = 0; a < m; ++a) {
    auto [p, q] = map.w_pair(n + a);
    for (int c = 0; c < m; ++c) {
      auto [u, v] = map.w_pair(n + c);
      Complex acc = 0.0;
      for (int b = 0; b < m; ++b) acc += hk(a, b) * kk(b, c);
      dev = std::max(dev, std::abs(acc - delta_tensor(u, v, p, q)));
    }
  }
  return dev;
}

/// Real squared speed 2 v^H h v of a tangent vector in the flat chart; the
/// quantity conserved along geodesics.
inline double squared_speed(const ModelParams& params, const JacobiBallPoint& point,
                            const Vector& v) {
  const BlockMetric h = metric_matrix(params, point);
  Complex s = v.dot(h.assembled * v);
  return 2.0 * s.real();
}

inline double squared_speed(const BlockMetric& h, const Vector& v) {
  Complex s = v.dot(h.assembled * v);
  return 2.0 * s.real();
}

/// Hessian oracle: h_{a bbar} recovered from the Kahler potential by real
/// central second differences, independently of the closed-form blocks.
inline Matrix fd_metric_oracle(const ModelParams& params, const JacobiBallPoint& point,
                               double step) {
  const CoordinateIndexMap map(params.n);
  return fd::wirtinger_hessian(
      [&](const JacobiBallPoint& p) { return kahler_potential(params, p); }, point, map, step);
}

/// Real symmetric representation of a Hermitian form h = A + iB in the
/// (all-real, all-imaginary) coordinate ordering: 2 [[A, -B], [B, A]].
/// Satisfies (vx, vy)^T G (vx, vy) = 2 v^H h v for v = vx + i vy.
inline RealMatrix real_metric(const Matrix& h) {
  const auto d = h.rows();
  RealMatrix G(2 * d, 2 * d);
  RealMatrix A = h.real();
  RealMatrix B = h.imag();
  G.topLeftCorner(d, d) = 2.0 * A;
  G.topRightCorner(d, d) = -2.0 * B;
  G.bottomLeftCorner(d, d) = 2.0 * B;
  G.bottomRightCorner(d, d) = 2.0 * A;
  return G;
}

}  // namespace sjb
