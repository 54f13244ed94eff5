#pragma once

#include <functional>

#include "sjb/core.hpp"

namespace sjb::fd {

/// Central O(h^2) first derivative of a matrix/vector/scalar valued curve.
template <typename F>
auto deriv1(F&& f, double t, double h) {
  return ((f(t + h) - f(t - h)) / (2.0 * h)).eval();
}

/// Five-point O(h^4) first derivative.
template <typename F>
auto deriv1_5pt(F&& f, double t, double h) {
  return ((f(t - 2 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2 * h)) / (12.0 * h)).eval();
}

/// Five-point O(h^4) second derivative.
template <typename F>
auto deriv2_5pt(F&& f, double t, double h) {
  return ((-f(t - 2 * h) + 16.0 * f(t - h) - 30.0 * f(t) + 16.0 * f(t + h) - f(t + 2 * h)) /
          (12.0 * h * h))
      .eval();
}

/// Holomorphic Wirtinger derivative dG/du_a = (dG/dx - i dG/dy)/2 of a
/// matrix-valued field over the flat chart, by central differences.
template <typename F>
Matrix wirtinger_derivative(F&& eval, const JacobiBallPoint& point,
                            const CoordinateIndexMap& map, int flat, double step) {
  auto shifted = [&](Complex d) {
    try {
      return eval(displace(point, map, flat, d));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotInBall)
        throw Error(ErrorCode::StepTooLarge, "finite difference step leaves the ball");
      throw;
    }
  };
  Matrix dx = (shifted(Complex(step, 0)) - shifted(Complex(-step, 0))) / (2.0 * step);
  Matrix dy = (shifted(Complex(0, step)) - shifted(Complex(0, -step))) / (2.0 * step);
  return (dx - kImag * dy) / 2.0;
}

/// Mixed Wirtinger Hessian H_{a bbar} = d^2 f / du_a dubar_b of a real scalar
/// field, assembled from real-coordinate central second differences:
///   H = [(f_xx + f_yy) + i (f_xy - f_yx)] / 4.
template <typename F>
Matrix wirtinger_hessian(F&& eval, const JacobiBallPoint& point,
                         const CoordinateIndexMap& map, double step) {
  const int dim = map.dim();
  auto at = [&](int a, Complex da, int b, Complex db) {
    try {
      JacobiBallPoint moved = displace(point, map, a, da);
      if (b >= 0) moved = displace(moved, map, b, db);
      return eval(moved);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotInBall)
        throw Error(ErrorCode::StepTooLarge, "finite difference step leaves the ball");
      throw;
    }
  };
  const double f0 = eval(point);
  // second partial along real directions da, db applied to coords a, b
  auto mixed = [&](int a, Complex da, int b, Complex db) {
    if (a == b && da == db) {
      return (at(a, da, -1, 0) - 2.0 * f0 + at(a, -da, -1, 0)) / (step * step);
    }
    return (at(a, da, b, db) - at(a, da, b, -db) - at(a, -da, b, db) + at(a, -da, b, -db)) /
           (4.0 * step * step);
  };
  const Complex hx(step, 0), hy(0, step);
  Matrix H(dim, dim);
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      double fxx = mixed(a, hx, b, hx);
      double fyy = mixed(a, hy, b, hy);
      double fxy = mixed(a, hx, b, hy);
      double fyx = mixed(a, hy, b, hx);
      H(a, b) = 0.25 * Complex(fxx + fyy, fxy - fyx);
    }
  }
  return H;
}

/// Richardson-extrapolated Wirtinger Hessian: (4 H(h/2) - H(h)) / 3.
template <typename F>
Matrix wirtinger_hessian_richardson(F&& eval, const JacobiBallPoint& point,
                                    const CoordinateIndexMap& map, double step) {
  Matrix coarse = wirtinger_hessian(eval, point, map, step);
  Matrix fine = wirtinger_hessian(eval, point, map, step / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace sjb::fd
