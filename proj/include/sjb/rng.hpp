#pragma once

#include <cstdint>

#include "sjb/core.hpp"

namespace sjb {

/// splitmix64 generator with an explicit bit-to-double mapping, so that a
/// seed produces the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Complex complex_box(double half_width = 1.0) {
    double re = uniform(-half_width, half_width);
    double im = uniform(-half_width, half_width);
    return {re, im};
  }

  /// Decorrelated child seed for sample index i.
  static std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
    Rng r(seed ^ (0xd1b54a32d192ed03ULL * (index + 1)));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

inline Vector random_vector(Rng& rng, int n, double half_width = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.complex_box(half_width);
  return v;
}

inline Matrix random_symmetric(Rng& rng, int n, double spectral_norm) {
  Matrix A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rng.complex_box();
  Matrix S = (A + A.transpose()) / 2.0;
  double top = S.jacobiSvd().singularValues()(0);
  if (top < 1e-14) return Matrix::Zero(n, n);
  return S * (spectral_norm / top);
}

/// Random interior point: ||W||_2 is drawn from [0.2, radius] so that
/// lambda_min(N) = 1 - ||W||^2 stays clear of the boundary.
inline JacobiBallPoint random_ball_point(Rng& rng, int n, double radius = 0.7,
                                         double z_half_width = 1.0) {
  double rho = rng.uniform(0.2, radius);
  Matrix W = random_symmetric(rng, n, rho);
  Vector z = random_vector(rng, n, z_half_width);
  return JacobiBallPoint(std::move(z), validate_ball_point(W));
}

inline Vector random_tangent(Rng& rng, const CoordinateIndexMap& map, double half_width = 1.0) {
  return random_vector(rng, map.dim(), half_width);
}

}  // namespace sjb
