// Physical parameters and the point-well jump matrices.
//
// Units: hbar = 1. The mass m and speed of light c are carried explicitly.
// A well of strength g sits at each of x = -R and x = +R, and a constant
// field F enters through the potential V(x) = -F x.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <stdexcept>
#include <string>

namespace stark {

template <std::floating_point T>
struct BasicModelParams {
  T m = 1;  // fermion mass
  T c = 1;  // speed of light
  T g = 0;  // well strength
  T R = 1;  // half distance between the wells
  T F = 0;  // field strength

  [[nodiscard]] bool valid() const {
    return std::isfinite(m) && std::isfinite(c) && std::isfinite(g) && std::isfinite(R) &&
           std::isfinite(F) && m > 0 && c > 0 && g >= 0 && R > 0 && F >= 0;
  }
  // Rest energy m c^2.
  [[nodiscard]] T rest() const { return m * c * c; }
};

using ModelParams = BasicModelParams<double>;

template <std::floating_point T>
void require_valid(const BasicModelParams<T>& p) {
  if (!p.valid()) {
    throw std::invalid_argument("invalid model parameters: need m>0, c>0, g>=0, R>0, F>=0");
  }
}

// 2x2 real matrix acting on the spinor (psi1, psi2):
//   [ d  gm ] [psi1]
//   [ b  a  ] [psi2]
// The phase factor is fixed to 1.
template <std::floating_point T>
struct BasicJumpMatrix {
  T d = 1;   // delta
  T gm = 0;  // gamma
  T b = 0;   // beta
  T a = 1;   // alpha
  static constexpr int omega = 1;

  [[nodiscard]] T det() const { return a * d - gm * b; }

  template <class S>
  [[nodiscard]] std::array<S, 2> apply(const std::array<S, 2>& psi) const {
    return {d * psi[0] + gm * psi[1], b * psi[0] + a * psi[1]};
  }

  [[nodiscard]] BasicJumpMatrix operator*(const BasicJumpMatrix& o) const {
    return {d * o.d + gm * o.b, d * o.gm + gm * o.a, b * o.d + a * o.b, b * o.gm + a * o.a};
  }
};

using JumpMatrix = BasicJumpMatrix<double>;

// Matrix mapping psi(x0-) to psi(x0+) at a well.
template <std::floating_point T>
BasicJumpMatrix<T> jump_matrix_right(const BasicModelParams<T>& p) {
  const T k = p.g / p.c;
  const T den = 1 + k * k / 4;
  const T diag = (1 - k * k / 4) / den;
  return {diag, -k / den, k / den, diag};
}

// Exact inverse of jump_matrix_right: maps psi(x0+) to psi(x0-).
template <std::floating_point T>
BasicJumpMatrix<T> jump_matrix_left(const BasicModelParams<T>& p) {
  const auto r = jump_matrix_right(p);
  return {r.d, -r.gm, -r.b, r.a};
}

// Charge conjugation maps g to -g and must act as sigma_x (complex
// conjugation) sigma_x on the matrix. For a real matrix this swaps the
// diagonal entries and the off-diagonal entries.
template <std::floating_point T>
bool charge_conjugation_holds(const BasicJumpMatrix<T>& lam_g, const BasicJumpMatrix<T>& lam_minus_g,
                              T tol = T(1e-14)) {
  const BasicJumpMatrix<T> conj{lam_g.a, lam_g.b, lam_g.gm, lam_g.d};
  auto close = [tol](T x, T y) { return std::abs(x - y) <= tol * (1 + std::abs(x)); };
  return close(conj.d, lam_minus_g.d) && close(conj.gm, lam_minus_g.gm) &&
         close(conj.b, lam_minus_g.b) && close(conj.a, lam_minus_g.a);
}

// Well strength enters with a sign, so the conjugate model uses -g.
template <std::floating_point T>
BasicJumpMatrix<T> jump_matrix_signed(T g, T c) {
  const T k = g / c;
  const T den = 1 + k * k / 4;
  const T diag = (1 - k * k / 4) / den;
  return {diag, -k / den, k / den, diag};
}

template <std::floating_point T>
bool charge_conjugation_check(const BasicModelParams<T>& p, T tol = T(1e-14)) {
  return charge_conjugation_holds(jump_matrix_signed(p.g, p.c), jump_matrix_signed(-p.g, p.c), tol);
}

// Roots of the regularisation cubic
//   a^3 - a^2/2 + (c^2/g^2) a - c^2/(2 g^2) = 0,
// which factors as (a - 1/2)(a^2 + c^2/g^2).
template <std::floating_point T>
struct CubicRoots {
  T real_root;
  std::complex<T> upper;  // +i c/g
  std::complex<T> lower;  // -i c/g
};

template <std::floating_point T>
CubicRoots<T> colombeau_roots(const BasicModelParams<T>& p) {
  if (!(p.g > 0)) throw std::invalid_argument("colombeau_constant requires g > 0");
  const T k = (p.c * p.c) / (p.g * p.g);
  auto f = [k](T x) { return ((x - T(0.5)) * x + k) * x - k / 2; };
  // f(0) < 0 < f(1) and the cubic has a single real root, so bisection on
  // [0, 1] isolates it without relying on the factorisation.
  T lo = 0, hi = 1;
  if (!(f(lo) <= 0 && f(hi) >= 0)) throw std::runtime_error("cubic: no real root in [0,1]");
  for (int it = 0; it < 200 && hi - lo > std::numeric_limits<T>::epsilon(); ++it) {
    const T mid = (lo + hi) / 2;
    (f(mid) <= 0 ? lo : hi) = mid;
  }
  T x = (lo + hi) / 2;
  // Newton polish.
  for (int it = 0; it < 3; ++it) {
    const T df = (3 * x - 1) * x + k;
    if (df != 0) x -= f(x) / df;
  }
  // Deflate: f(a) = (a - x)(a^2 + p1 a + p0).
  const T p1 = x - T(0.5);
  const T p0 = k + x * p1;
  const std::complex<T> disc = std::sqrt(std::complex<T>(p1 * p1 - 4 * p0, 0));
  std::complex<T> r1 = (-p1 + disc) / T(2), r2 = (-p1 - disc) / T(2);
  if (r1.imag() < r2.imag()) std::swap(r1, r2);
  return {x, r1, r2};
}

template <std::floating_point T>
T colombeau_constant(const BasicModelParams<T>& p) {
  return colombeau_roots(p).real_root;
}

}  // namespace stark
