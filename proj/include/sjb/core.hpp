#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

/// Numerical geometry of the Siegel-Jacobi ball C^n x D_n with the balanced
/// metric of weights (k, mu).  Points are a free complex vector z together
/// with a symmetric complex matrix W whose defect N = I - W*conj(W) is
/// positive definite.
namespace sjb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kImag{0.0, 1.0};

enum class ErrorCode {
  NonFinite,
  NotSymmetric,
  NotInBall,
  NotInHalfPlane,
  SingularN,
  SingularFactor,
  SingularDenominator,
  OutOfRange,
  StepTooLarge,
  StepFailure,
  InvalidState,
  InvalidElement,
  ValidationFailed,
  InsufficientSamples,
  Overflow,
  ParseError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

namespace tol {
inline constexpr double symmetry = 1e-12;   // relative, on ||W - W^T||
inline constexpr double ball = 1e-10;       // on lambda_min(I - W conj(W))
inline constexpr double reality = 1e-10;    // on quantities that must be real
}  // namespace tol

/// Weights of the balanced metric.  k scales the Siegel-ball block, mu the
/// flat Heisenberg block; epsilon = mu/k is the coupling that appears in
/// every curvature-level formula.
struct ModelParams {
  int n = 1;
  double k = 1.0;
  double mu = 1.0;

  ModelParams() = default;
  ModelParams(int n_, double k_, double mu_) : n(n_), k(k_), mu(mu_) {
    if (n < 1) throw Error(ErrorCode::OutOfRange, "ModelParams: n must be >= 1");
    if (!(k > 0.0) || !(mu > 0.0))
      throw Error(ErrorCode::OutOfRange, "ModelParams: k and mu must be positive");
  }

  double epsilon() const { return mu / k; }
};

/// f_pq = 1 - delta_pq/2, the weight of an ordered coordinate pair.
inline double pair_weight(int p, int q) { return p == q ? 0.5 : 1.0; }

/// d_pq = 1 - delta_pq.
inline double offdiag_weight(int p, int q) { return p == q ? 0.0 : 1.0; }

/// Delta^{ij}_{pq} = (delta_ip delta_jq + delta_iq delta_jp) f_ij; equals the
/// identity on the ordered index set p <= q.
inline double delta_tensor(int i, int j, int p, int q) {
  double s = (i == p && j == q ? 1.0 : 0.0) + (i == q && j == p ? 1.0 : 0.0);
  return s * pair_weight(i, j);
}

/// Flat coordinate chart on C^n x Sym(n): z_1..z_n first, then w_pq for
/// p <= q in lexicographic order.  All indices are 0-based internally;
/// printed labels are 1-based.
class CoordinateIndexMap {
 public:
  explicit CoordinateIndexMap(int n)
      : n_(n), w_count_(n * (n + 1) / 2), dim_(n_ + w_count_) {
    if (n < 1) throw Error(ErrorCode::OutOfRange, "CoordinateIndexMap: n >= 1");
    pairs_.reserve(w_count_);
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q) pairs_.emplace_back(p, q);
  }

  int n() const { return n_; }
  int w_count() const { return w_count_; }
  int dim() const { return dim_; }

  int z_index(int i) const {
    check(i >= 0 && i < n_, "z index");
    return i;
  }

  /// Flat index of w_pq; arguments in either order.
  int w_index(int p, int q) const {
    check(p >= 0 && p < n_ && q >= 0 && q < n_, "w index");
    if (p > q) std::swap(p, q);
    return n_ + p * n_ - p * (p - 1) / 2 + (q - p);
  }

  bool is_z(int flat) const {
    check(flat >= 0 && flat < dim_, "flat index");
    return flat < n_;
  }

  /// Ordered pair (p, q), p <= q, of a w-type flat index.
  std::pair<int, int> w_pair(int flat) const {
    check(flat >= n_ && flat < dim_, "flat w index");
    return pairs_[static_cast<size_t>(flat - n_)];
  }

  std::string label(int flat) const {
    check(flat >= 0 && flat < dim_, "flat index");
    if (flat < n_) return "z" + std::to_string(flat + 1);
    auto [p, q] = w_pair(flat);
    return "w" + std::to_string(p + 1) + std::to_string(q + 1);
  }

 private:
  static void check(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::OutOfRange, std::string("index map: ") + what + " out of range");
  }

  int n_;
  int w_count_;
  int dim_;
  std::vector<std::pair<int, int>> pairs_;
};

inline double asymmetry(const Matrix& W) {
  return (W - W.transpose()).cwiseAbs().maxCoeff();
}

inline double min_defect_eigenvalue(const Matrix& W) {
  const int n = static_cast<int>(W.rows());
  Matrix N = Matrix::Identity(n, n) - W * W.conjugate();
  Eigen::SelfAdjointEigenSolver<Matrix> es((N + N.adjoint()) / 2.0);
  return es.eigenvalues().minCoeff();
}

/// A validated point of the Siegel ball: W symmetric with I - W conj(W)
/// positive definite.  Construction symmetrizes tiny asymmetries and rejects
/// everything else.
class SiegelBallPoint {
 public:
  static SiegelBallPoint validate(const Matrix& W,
                                  double sym_tol = tol::symmetry,
                                  double ball_tol = tol::ball) {
    if (W.rows() != W.cols() || W.rows() < 1)
      throw Error(ErrorCode::NotSymmetric, "ball point: W must be square");
    if (!W.allFinite())
      throw Error(ErrorCode::NonFinite, "ball point: W has non-finite entries");
    const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
    if (asymmetry(W) >= sym_tol * scale)
      throw Error(ErrorCode::NotSymmetric, "ball point: W is not symmetric");
    Matrix Ws = (W + W.transpose()) / 2.0;
    const double lmin = min_defect_eigenvalue(Ws);
    if (!(lmin > ball_tol))
      throw Error(ErrorCode::NotInBall,
                  "ball point: I - W conj(W) not positive definite (lambda_min = " +
                      std::to_string(lmin) + ")");
    return SiegelBallPoint(std::move(Ws));
  }

  const Matrix& matrix() const { return W_; }
  int n() const { return static_cast<int>(W_.rows()); }

 private:
  explicit SiegelBallPoint(Matrix W) : W_(std::move(W)) {}
  Matrix W_;
};

inline SiegelBallPoint validate_ball_point(const Matrix& W,
                                           double ball_tol = tol::ball) {
  return SiegelBallPoint::validate(W, tol::symmetry, ball_tol);
}

/// Point of the Siegel-Jacobi ball: free z in C^n plus a ball point W.
struct JacobiBallPoint {
  Vector z;
  SiegelBallPoint W;

  JacobiBallPoint(Vector z_, SiegelBallPoint W_)
      : z(std::move(z_)), W(std::move(W_)) {
    if (!z.allFinite()) throw Error(ErrorCode::NonFinite, "point: z has non-finite entries");
    if (z.size() != W.n())
      throw Error(ErrorCode::OutOfRange, "point: z dimension does not match W");
  }

  int n() const { return W.n(); }

  static JacobiBallPoint origin(int n) {
    return JacobiBallPoint(Vector::Zero(n), validate_ball_point(Matrix::Zero(n, n)));
  }
};

/// Matrices shared by every downstream formula.
///   N = I - W conj(W)          (Hermitian positive definite)
///   M = N^{-1}                 (Hermitian)
///   X = conj(W) M = conj(M) conj(W)   (symmetric)
///   eta = M (z + W conj(z)),   the inverse of z = eta - W conj(eta)
///   S = N eta                  (componentwise S_t = sum_q eta_q conj(N)_{qt})
///   alpha = eta^H N eta        (real, >= 0)
struct AuxMatrices {
  Matrix N;
  Matrix M;
  Matrix X;
  Vector eta;
  Vector S;
  double alpha = 0.0;
  double epsilon = 0.0;
};

inline AuxMatrices aux_matrices(const ModelParams& params, const JacobiBallPoint& point) {
  const int n = point.n();
  const Matrix& W = point.W.matrix();
  AuxMatrices aux;
  aux.N = Matrix::Identity(n, n) - W * W.conjugate();
  Eigen::PartialPivLU<Matrix> lu(aux.N);
  const double rcond_probe = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(rcond_probe > 1e-300))
    throw Error(ErrorCode::SingularN, "aux_matrices: N is numerically singular");
  aux.M = lu.solve(Matrix::Identity(n, n));
  aux.X = W.conjugate() * aux.M;
  // Solve N eta = z + W conj(z) instead of forming M eta explicitly; better
  // conditioned near the boundary.
  aux.eta = lu.solve((point.z + W * point.z.conjugate()).eval());
  aux.S = aux.N * aux.eta;
  const Complex alpha = aux.eta.dot(aux.S);  // eta^H N eta
  // alpha is a Hermitian form of a positive definite matrix; flag numerical
  // violations instead of silently truncating.
  if (std::abs(alpha.imag()) > tol::reality)
    throw Error(ErrorCode::ValidationFailed, "aux_matrices: alpha has non-real part");
  aux.alpha = alpha.real();
  aux.epsilon = params.epsilon();
  return aux;
}

/// z_i/w_pq components of a tangent vector packed over the flat chart.
inline Vector pack_tangent(const CoordinateIndexMap& map, const Vector& vz, const Matrix& vW) {
  Vector v(map.dim());
  v.head(map.n()) = vz;
  for (int a = map.n(); a < map.dim(); ++a) {
    auto [p, q] = map.w_pair(a);
    v(a) = vW(p, q);
  }
  return v;
}

inline std::pair<Vector, Matrix> unpack_tangent(const CoordinateIndexMap& map, const Vector& v) {
  Vector vz = v.head(map.n());
  Matrix vW = Matrix::Zero(map.n(), map.n());
  for (int a = map.n(); a < map.dim(); ++a) {
    auto [p, q] = map.w_pair(a);
    vW(p, q) = v(a);
    vW(q, p) = v(a);
  }
  return {std::move(vz), std::move(vW)};
}

/// Shift one flat holomorphic coordinate; w-type shifts move the symmetric
/// entry pair together.  Throws NotInBall when the shifted W leaves the ball.
inline JacobiBallPoint displace(const JacobiBallPoint& point, const CoordinateIndexMap& map,
                                int flat, Complex delta, double ball_tol = tol::ball) {
  if (map.is_z(flat)) {
    Vector z = point.z;
    z(flat) += delta;
    return JacobiBallPoint(std::move(z), point.W);
  }
  auto [p, q] = map.w_pair(flat);
  Matrix W = point.W.matrix();
  W(p, q) += delta;
  if (p != q) W(q, p) += delta;
  return JacobiBallPoint(point.z, validate_ball_point(W, ball_tol));
}

}  // namespace sjb
