// Complex log-gamma (Lanczos approximation) and the overflow-safe
// reciprocal gamma function.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>

#include "scaled.hpp"

namespace stark {

namespace detail {

// log(sin(pi z)) without overflow for large |Im z|; the branch is arbitrary.
template <std::floating_point T>
std::complex<T> log_sin_pi(std::complex<T> z) {
  constexpr T pi = std::numbers::pi_v<T>;
  // sin(pi z) has period 2 in Re z; reduce to keep the argument small.
  const T shift = 2 * std::round(z.real() / 2);
  const std::complex<T> w = pi * std::complex<T>(z.real() - shift, z.imag());
  const std::complex<T> I(0, 1);
  if (std::abs(w.imag()) < 20) return std::log(std::sin(w));
  if (w.imag() > 0) {
    return -I * w + std::log(T(1) - std::exp(T(2) * I * w)) + std::log(std::complex<T>(0, T(0.5)));
  }
  return I * w + std::log(T(1) - std::exp(T(-2) * I * w)) + std::log(std::complex<T>(0, T(-0.5)));
}

template <std::floating_point T>
bool is_nonpositive_integer(std::complex<T> z) {
  return z.imag() == 0 && z.real() <= 0 && z.real() == std::round(z.real());
}

}  // namespace detail

// log Gamma(z) for complex z, accurate to about 1e-15 relative in Gamma for
// moderate |z|; the imaginary part is determined modulo 2 pi only.
template <std::floating_point T>
std::complex<T> lgamma(std::complex<T> z) {
  constexpr T pi = std::numbers::pi_v<T>;
  if (z.real() < T(0.5)) {
    return std::log(pi) - detail::log_sin_pi(z) - lgamma(T(1) - z);
  }
  static constexpr std::array<double, 9> p = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr T g = 7;
  z -= T(1);
  std::complex<T> x = T(p[0]);
  for (int i = 1; i < 9; ++i) x += T(p[i]) / (z + T(i));
  const std::complex<T> t = z + g + T(0.5);
  return T(0.5) * std::log(2 * pi) + (z + T(0.5)) * std::log(t) - t + std::log(x);
}

// 1/Gamma(z) as a scaled value; exact zero at the poles of Gamma.
template <std::floating_point T>
BasicPcfValue<T> rgamma(std::complex<T> z) {
  if (detail::is_nonpositive_integer(z)) return {};
  return BasicPcfValue<T>::from_log(-lgamma(z));
}

}  // namespace stark
