#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "sjb/core.hpp"
#include "sjb/metric.hpp"

namespace sjb {

/// Position and complex velocity of the geodesic flow.  The conjugate half
/// of the real flow is the complex conjugate of this system (only the
/// holomorphic symbols are nonzero), so integrating (z, W, vz, vW) closes.
struct GeodesicState {
  Vector z;
  Matrix W;
  Vector vz;
  Matrix vW;

  GeodesicState(Vector z_, Matrix W_, Vector vz_, Matrix vW_)
      : z(std::move(z_)), W(std::move(W_)), vz(std::move(vz_)), vW(std::move(vW_)) {
    const int n = static_cast<int>(z.size());
    if (W.rows() != n || W.cols() != n || vz.size() != n || vW.rows() != n || vW.cols() != n)
      throw Error(ErrorCode::InvalidState, "geodesic state: inconsistent dimensions");
    if (!z.allFinite() || !W.allFinite() || !vz.allFinite() || !vW.allFinite())
      throw Error(ErrorCode::InvalidState, "geodesic state: non-finite entries");
    if (asymmetry(vW) > tol::symmetry * std::max(1.0, vW.cwiseAbs().maxCoeff()))
      throw Error(ErrorCode::InvalidState, "geodesic state: vW not symmetric");
  }

  int n() const { return static_cast<int>(z.size()); }

  JacobiBallPoint point(double ball_tol = tol::ball) const {
    return JacobiBallPoint(z, validate_ball_point(W, ball_tol));
  }
};

struct Acceleration {
  Vector az;
  Matrix aW;
};

/// Geodesic right-hand side.  With Y = vz + vW etabar:
///   d2z/dt2 = -2 vW X vz + 2 eps (etabar^T Y) Y
///   d2W/dt2 = -2 vW X vW - 2 eps Y (x) Y
/// The z-equation's driving term reduces to (etabar^T Y) Y; the alpha- and
/// S-dependent pieces of the term-by-term expansion cancel (cross-checked
/// against the Christoffel contraction).
inline Acceleration geodesic_rhs(const ModelParams& params, const GeodesicState& state) {
  const JacobiBallPoint pt = state.point();
  const AuxMatrices aux = aux_matrices(params, pt);
  const Vector eb = aux.eta.conjugate();
  const double eps = params.epsilon();

  const Vector Y = state.vz + state.vW * eb;
  const Complex ebY = eb.transpose() * Y;
  Acceleration acc;
  acc.az = -2.0 * (state.vW * (aux.X * state.vz)) + 2.0 * eps * ebY * Y;
  acc.aW = -2.0 * (state.vW * aux.X * state.vW) - 2.0 * eps * (Y * Y.transpose());
  acc.aW = ((acc.aW + acc.aW.transpose()) / 2.0).eval();
  return acc;
}

/// Residual of the geodesic system at (state, candidate acceleration):
/// max norm over the z- and W-equations, scaled by k.
///   k G3 - 2 mu G1,  G3 = az + 2 vW X vz,  G1 = (etabar^T Y) Y
///   k G2 + 2 mu G4,  G2 = aW + 2 vW X vW,  G4 = Y (x) Y
inline double geodesic_residual(const ModelParams& params, const GeodesicState& state,
                                const Acceleration& acc) {
  const JacobiBallPoint pt = state.point();
  const AuxMatrices aux = aux_matrices(params, pt);
  const Vector eb = aux.eta.conjugate();

  const Vector Y = state.vz + state.vW * eb;
  const Complex ebY = eb.transpose() * Y;
  const Vector G3 = acc.az + 2.0 * (state.vW * (aux.X * state.vz));
  const Vector G1 = ebY * Y;
  const Matrix G2 = acc.aW + 2.0 * (state.vW * aux.X * state.vW);
  const Matrix G4 = Y * Y.transpose();

  double rz = (params.k * G3 - 2.0 * params.mu * G1).cwiseAbs().maxCoeff();
  double rw = (params.k * G2 + 2.0 * params.mu * G4).cwiseAbs().maxCoeff();
  return std::max(rz, rw);
}

/// Residual of the mu = 0 (pure Siegel) system: max(||G3||, ||G2||).
inline double siegel_residual(const GeodesicState& state, const Acceleration& acc) {
  const int n = state.n();
  Matrix N = Matrix::Identity(n, n) - state.W * state.W.conjugate();
  Matrix X = state.W.conjugate() * Eigen::PartialPivLU<Matrix>(N).solve(Matrix::Identity(n, n));
  double rz = (acc.az + 2.0 * (state.vW * (X * state.vz))).cwiseAbs().maxCoeff();
  double rw = (acc.aW + 2.0 * (state.vW * X * state.vW)).cwiseAbs().maxCoeff();
  return std::max(rz, rw);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<GeodesicState> states;
  std::vector<double> speeds;
  std::vector<double> residuals;
  bool left_ball = false;
  std::string diagnostic;
};

struct IntegrateOptions {
  int steps = 1000;       // fixed-step RK4 when rel_tol <= 0
  double rel_tol = 0.0;   // > 0 switches to embedded adaptive RK45
  double ball_tol = tol::ball;
  int max_steps = 200000;
};

namespace detail {

inline Vector flatten_state(const CoordinateIndexMap& map, const GeodesicState& s) {
  Vector y(2 * map.dim());
  y.head(map.dim()) = pack_tangent(map, s.z, s.W);
  y.tail(map.dim()) = pack_tangent(map, s.vz, s.vW);
  return y;
}

inline GeodesicState unflatten_state(const CoordinateIndexMap& map, const Vector& y) {
  auto [z, W] = unpack_tangent(map, y.head(map.dim()));
  auto [vz, vW] = unpack_tangent(map, y.tail(map.dim()));
  return GeodesicState(std::move(z), std::move(W), std::move(vz), std::move(vW));
}

inline Vector flow_rhs(const ModelParams& params, const CoordinateIndexMap& map, const Vector& y,
                       double ball_tol) {
  GeodesicState s = unflatten_state(map, y);
  if (min_defect_eigenvalue(s.W) <= ball_tol)
    throw Error(ErrorCode::NotInBall, "integration left the ball");
  Acceleration a = geodesic_rhs(params, s);
  Vector dy(y.size());
  dy.head(map.dim()) = y.tail(map.dim());
  dy.tail(map.dim()) = pack_tangent(map, a.az, a.aW);
  return dy;
}

}  // namespace detail

/// Integrate the geodesic flow from an initial state.  Records squared speed
/// and the rhs residual at every accepted sample.  If the trajectory reaches
/// the ball boundary it is truncated and flagged instead of failing.
inline Trajectory integrate_geodesic(const ModelParams& params, const GeodesicState& initial,
                                     double t_end, const IntegrateOptions& opts = {}) {
  const CoordinateIndexMap map(params.n);
  auto f = [&](const Vector& y) { return detail::flow_rhs(params, map, y, opts.ball_tol); };

  Trajectory traj;
  auto record = [&](double t, const Vector& y) {
    GeodesicState s = detail::unflatten_state(map, y);
    Acceleration a = geodesic_rhs(params, s);
    traj.times.push_back(t);
    traj.speeds.push_back(squared_speed(params, s.point(opts.ball_tol),
                                        pack_tangent(map, s.vz, s.vW)));
    traj.residuals.push_back(geodesic_residual(params, s, a));
    traj.states.push_back(std::move(s));
  };

  Vector y = detail::flatten_state(map, initial);
  double t = 0.0;
  try {
    record(t, y);
    if (opts.rel_tol <= 0.0) {
      const int steps = std::max(1, opts.steps);
      const double h = t_end / steps;
      for (int i = 0; i < steps; ++i) {
        Vector k1 = f(y);
        Vector k2 = f(y + h / 2.0 * k1);
        Vector k3 = f(y + h / 2.0 * k2);
        Vector k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (i + 1) * h;
        record(t, y);
      }
    } else {
      // Dormand-Prince 5(4), elementwise error control against rel_tol.
      static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
      double h = t_end / 100.0;
      const double hmin = t_end * 1e-12;
      int taken = 0;
      while (t < t_end) {
        if (++taken > opts.max_steps)
          throw Error(ErrorCode::StepFailure, "integrate_geodesic: too many steps");
        h = std::min(h, t_end - t);
        Vector k1 = f(y);
        Vector k2 = f(y + h * (1.0 / 5) * k1);
        Vector k3 = f(y + h * (3.0 / 40 * k1 + 9.0 / 40 * k2));
        Vector k4 = f(y + h * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3));
        Vector k5 = f(y + h * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 + 64448.0 / 6561 * k3 -
                               212.0 / 729 * k4));
        Vector k6 = f(y + h * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 + 46732.0 / 5247 * k3 +
                               49.0 / 176 * k4 - 5103.0 / 18656 * k5));
        Vector y5 = y + h * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                             2187.0 / 6784 * k5 + 11.0 / 84 * k6);
        Vector k7 = f(y5);
        Vector y4 = y + h * (5179.0 / 57600 * k1 + 7571.0 / 16695 * k3 + 393.0 / 640 * k4 -
                             92097.0 / 339200 * k5 + 187.0 / 2100 * k6 + 1.0 / 40 * k7);
        double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
        double err = (y5 - y4).cwiseAbs().maxCoeff() / (opts.rel_tol * scale);
        if (err <= 1.0) {
          y = y5;
          t += h;
          record(t, y);
        }
        double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::min(5.0, std::max(0.2, factor));
        if (h < hmin) throw Error(ErrorCode::StepFailure, "integrate_geodesic: step underflow");
        (void)c2; (void)c3; (void)c4; (void)c5;
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotInBall) {
      traj.left_ball = true;
      traj.diagnostic = "trajectory truncated: ball boundary reached near t = " + std::to_string(t);
    } else {
      throw;
    }
  }
  return traj;
}

namespace detail {

/// f(A) for Hermitian positive semidefinite A via eigendecomposition.
inline Matrix hermitian_function(const Matrix& A, const std::function<double(double)>& fn) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((A + A.adjoint()) / 2.0);
  Eigen::VectorXd vals = es.eigenvalues();
  Eigen::VectorXd mapped(vals.size());
  for (int i = 0; i < vals.size(); ++i) mapped(i) = fn(std::max(vals(i), 0.0));
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().adjoint();
}

inline void require_symmetric(const Matrix& B, const char* who) {
  if (asymmetry(B) > tol::symmetry * std::max(1.0, B.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::NotSymmetric, std::string(who) + ": B must be symmetric");
}

/// tanh(t sqrt(x))/sqrt(x), with the analytic continuation through x = 0.
inline double phi_tanh(double x, double t) {
  if (x < 1e-12) return t - t * t * t * x / 3.0 + 2.0 * std::pow(t, 5) * x * x / 15.0;
  double s = std::sqrt(x);
  return std::tanh(t * s) / s;
}

}  // namespace detail

/// Closed-form Siegel-ball geodesic with W(0) = 0, Wdot(0) = B:
///   W(t) = B tanh(t sqrt(conj(B) B)) / sqrt(conj(B) B).
/// conj(B) B is Hermitian PSD for symmetric B, so the matrix function is
/// evaluated spectrally.  The result is symmetric and stays in the ball.
inline Matrix siegel_geodesic_closed_form(const Matrix& B, double t) {
  detail::require_symmetric(B, "siegel_geodesic_closed_form");
  Matrix A = B.conjugate() * B;
  return B * detail::hermitian_function(A, [t](double x) { return detail::phi_tanh(x, t); });
}

/// Velocity of the closed-form geodesic: Wdot(t) = B sech^2(t sqrt(conj(B) B)).
inline Matrix siegel_geodesic_velocity(const Matrix& B, double t) {
  detail::require_symmetric(B, "siegel_geodesic_velocity");
  Matrix A = B.conjugate() * B;
  return B * detail::hermitian_function(A, [t](double x) {
           double c = std::cosh(t * std::sqrt(std::max(x, 0.0)));
           return 1.0 / (c * c);
         });
}

/// z-component of the mu = 0 geodesic through (z0, W = 0) with velocities
/// (vz0, B):  z(t) = tanh(t sqrt(B conj(B))) / sqrt(B conj(B)) vz0 + z0.
/// This is W(t) B^{-1} vz0 + z0 written without the inverse, so it extends
/// to singular B.
inline Vector mu_zero_z_solution(const Matrix& B, const Vector& vz0, const Vector& z0, double t) {
  detail::require_symmetric(B, "mu_zero_z_solution");
  Matrix Aleft = B * B.conjugate();
  Matrix g = detail::hermitian_function(Aleft, [t](double x) { return detail::phi_tanh(x, t); });
  return g * vz0 + z0;
}

/// Particular geodesic of the full system obtained by holding eta fixed:
///   z(t) = eta0 - W(t) conj(eta0),  W(t) the closed-form Siegel geodesic.
/// Velocities are analytic: vz = -Wdot conj(eta0).  Solves the coupled
/// system for every mu.
inline GeodesicState fc_particular_geodesic(const Vector& eta0, const Matrix& B, double t) {
  detail::require_symmetric(B, "fc_particular_geodesic");
  Matrix W = siegel_geodesic_closed_form(B, t);
  Matrix Wd = siegel_geodesic_velocity(B, t);
  Vector z = eta0 - W * eta0.conjugate();
  Vector vz = -(Wd * eta0.conjugate());
  return GeodesicState(std::move(z), std::move(W), std::move(vz), std::move(Wd));
}

}  // namespace sjb
