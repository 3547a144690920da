#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "sirs/types.hpp"

namespace sirs {

/// Coefficients of the monic cubic lambda^3 + xi2 lambda^2 + xi1 lambda + xi0.
template <typename Scalar = double>
struct CubicCoeffs {
  Scalar xi2, xi1, xi0;
};

enum class StabilityVerdict { AllNegative, Marginal, Unstable };

/// e^{A t} by scaling-and-squaring with a [6/6] diagonal Pade approximant.
/// Works for any fixed-size square matrix; relative accuracy is far below
/// 1e-12 for ||A t||_1 up to a few tens. Throws std::overflow_error when the
/// result leaves the representable range.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::RowsAtCompileTime>
expm(const Eigen::MatrixBase<Derived>& A, typename Derived::Scalar t = 1) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::RowsAtCompileTime>;
  static_assert(Derived::RowsAtCompileTime == Derived::ColsAtCompileTime,
                "expm requires a square matrix");

  Mat B = A.derived() * t;
  if (!B.allFinite()) throw std::invalid_argument("expm: non-finite input");
  const Scalar nrm = B.cwiseAbs().colwise().sum().maxCoeff();  // induced 1-norm
  if (!(nrm < Scalar(1e8))) throw std::overflow_error("expm: ||A t||_1 too large");

  int squarings = 0;
  if (nrm > Scalar(0.5)) squarings = static_cast<int>(std::ceil(std::log2(double(nrm) / 0.5)));
  const Mat X = B / Scalar(std::ldexp(1.0, squarings));

  Mat num = Mat::Identity();
  Mat den = Mat::Identity();
  Mat Xk = Mat::Identity();
  Scalar c(1);
  for (int k = 1; k <= 6; ++k) {
    c *= Scalar(6 - k + 1) / Scalar(k * (12 - k + 1));
    Xk = (Xk * X).eval();
    num += c * Xk;
    den += (k % 2 ? -c : c) * Xk;
  }
  Mat E = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) E = (E * E).eval();
  if (!E.allFinite()) throw std::overflow_error("expm: overflow while squaring");
  return E;
}

/// Largest eigenvalue modulus of a real 2x2 matrix, from trace and
/// determinant. The max-modulus root (|tr| + sqrt(disc))/2 involves no
/// cancellation; a complex pair has modulus sqrt(det).
template <typename Derived>
typename Derived::Scalar spectral_radius2(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  static_assert(Derived::RowsAtCompileTime == 2 && Derived::ColsAtCompileTime == 2);
  const Scalar tr = A(0, 0) + A(1, 1);
  const Scalar det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  const Scalar disc = tr * tr - Scalar(4) * det;
  if (disc >= Scalar(0)) return (std::abs(tr) + std::sqrt(disc)) / Scalar(2);
  return std::sqrt(det);
}

/// Roots of the monic cubic, Cardano with the trigonometric branch when all
/// three roots are real, plus one Newton polish per root.
template <typename Scalar>
std::array<std::complex<Scalar>, 3> solve_cubic(const CubicCoeffs<Scalar>& cubic) {
  using C = std::complex<Scalar>;
  const Scalar a = cubic.xi2, b = cubic.xi1, d = cubic.xi0;
  const Scalar shift = a / Scalar(3);
  const Scalar p = b - a * a / Scalar(3);
  const Scalar q = Scalar(2) * a * a * a / Scalar(27) - a * b / Scalar(3) + d;

  std::array<C, 3> roots;
  const Scalar half_q = q / Scalar(2);
  const Scalar disc = half_q * half_q + p * p * p / Scalar(27);
  if (disc > Scalar(0)) {
    // one real root and a conjugate pair; take the cube root on the side that
    // avoids cancellation and recover the partner from u*v = -p/3
    const Scalar sq = std::sqrt(disc);
    const Scalar w3 = half_q >= Scalar(0) ? -half_q - sq : -half_q + sq;
    const Scalar w = std::cbrt(w3);
    const Scalar other = w != Scalar(0) ? -p / (Scalar(3) * w) : Scalar(0);
    const Scalar x1 = w + other;
    const Scalar re = -x1 / Scalar(2);
    const Scalar im = std::sqrt(Scalar(3)) / Scalar(2) * std::abs(w - other);
    roots = {C(x1, 0), C(re, im), C(re, -im)};
  } else if (p == Scalar(0)) {
    // disc <= 0 and p = 0 forces q = 0: triple root at the shift point
    roots = {C(0, 0), C(0, 0), C(0, 0)};
  } else {
    const Scalar m = Scalar(2) * std::sqrt(-p / Scalar(3));
    Scalar arg = Scalar(3) * q / (p * m);
    arg = std::min(Scalar(1), std::max(Scalar(-1), arg));
    const Scalar phi = std::acos(arg) / Scalar(3);
    const Scalar two_pi_3 = Scalar(2) * Scalar(M_PI) / Scalar(3);
    for (int k = 0; k < 3; ++k) roots[k] = C(m * std::cos(phi - two_pi_3 * Scalar(k)), 0);
  }

  const Scalar scale = std::max({Scalar(1), std::abs(a), std::abs(b), std::abs(d)});
  for (auto& r : roots) {
    r -= shift;
    const C f = ((r + a) * r + b) * r + d;
    const C df = (Scalar(3) * r + Scalar(2) * a) * r + b;
    if (std::abs(df) > std::numeric_limits<Scalar>::epsilon() * scale) {
      const C step = f / df;
      if (std::abs(step) < Scalar(0.1) * (Scalar(1) + std::abs(r))) r -= step;
    }
  }
  return roots;
}

/// The three eigenvalues of a real 3x3 matrix via its characteristic cubic.
template <typename Derived>
std::array<std::complex<typename Derived::Scalar>, 3> eig3(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  static_assert(Derived::RowsAtCompileTime == 3 && Derived::ColsAtCompileTime == 3);
  const Scalar tr = A(0, 0) + A(1, 1) + A(2, 2);
  const Scalar m2 = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0) + A(0, 0) * A(2, 2) -
                    A(0, 2) * A(2, 0) + A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1);
  const Scalar det = A.determinant();
  return solve_cubic<Scalar>({-tr, m2, -det});
}

/// Routh-Hurwitz test for a monic cubic: all roots in the open left half
/// plane iff xi2 > 0, xi0 > 0 and xi2 xi1 - xi0 > 0. Any of the three
/// quantities within `band` of zero is reported Marginal.
template <typename Scalar>
StabilityVerdict routh_hurwitz3(const CubicCoeffs<Scalar>& c, Scalar band = Scalar(1e-12)) {
  const Scalar h = c.xi2 * c.xi1 - c.xi0;
  if (std::abs(c.xi2) <= band || std::abs(c.xi0) <= band || std::abs(h) <= band)
    return StabilityVerdict::Marginal;
  if (c.xi2 > Scalar(0) && c.xi0 > Scalar(0) && h > Scalar(0))
    return StabilityVerdict::AllNegative;
  return StabilityVerdict::Unstable;
}

}  // namespace sirs
