// Overflow-safe complex numbers stored as exp(log_modulus + i phase).
#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <numbers>

namespace stark {

template <std::floating_point T>
struct BasicPcfValue {
  T log_modulus = -std::numeric_limits<T>::infinity();  // -inf encodes an exact zero
  T phase = 0;                                          // in (-pi, pi]

  [[nodiscard]] static T wrap(T ph) {
    constexpr T pi = std::numbers::pi_v<T>;
    if (ph > -pi && ph <= pi) return ph;
    ph = std::remainder(ph, 2 * pi);
    if (ph <= -pi) ph += 2 * pi;
    return ph;
  }

  [[nodiscard]] static BasicPcfValue from_log(std::complex<T> L) { return {L.real(), wrap(L.imag())}; }

  [[nodiscard]] static BasicPcfValue from_complex(std::complex<T> z) {
    if (z == std::complex<T>(0)) return {};
    return {std::log(std::abs(z)), std::arg(z)};
  }

  [[nodiscard]] bool is_zero() const { return log_modulus == -std::numeric_limits<T>::infinity(); }
  [[nodiscard]] bool finite() const { return std::isfinite(log_modulus) && std::isfinite(phase); }

  [[nodiscard]] std::complex<T> log() const { return {log_modulus, phase}; }

  // Value multiplied by exp(-shift); use a common shift to compare terms.
  [[nodiscard]] std::complex<T> scaled(T shift) const {
    if (is_zero()) return 0;
    return std::polar(std::exp(log_modulus - shift), phase);
  }
  [[nodiscard]] std::complex<T> value() const { return scaled(0); }

  friend BasicPcfValue operator*(const BasicPcfValue& x, const BasicPcfValue& y) {
    if (x.is_zero() || y.is_zero()) return {};
    return {x.log_modulus + y.log_modulus, wrap(x.phase + y.phase)};
  }
  friend BasicPcfValue operator/(const BasicPcfValue& x, const BasicPcfValue& y) {
    if (x.is_zero()) return {};
    return {x.log_modulus - y.log_modulus, wrap(x.phase - y.phase)};
  }
  friend BasicPcfValue operator*(const BasicPcfValue& x, std::complex<T> k) { return x * from_complex(k); }
  friend BasicPcfValue operator*(std::complex<T> k, const BasicPcfValue& x) { return x * from_complex(k); }

  friend BasicPcfValue operator+(const BasicPcfValue& x, const BasicPcfValue& y) {
    if (x.is_zero()) return y;
    if (y.is_zero()) return x;
    const T big = std::max(x.log_modulus, y.log_modulus);
    return from_log(std::complex<T>(big, 0) + std::log(x.scaled(big) + y.scaled(big)));
  }
  friend BasicPcfValue operator-(const BasicPcfValue& x) {
    if (x.is_zero()) return x;
    return {x.log_modulus, wrap(x.phase + std::numbers::pi_v<T>)};
  }
  friend BasicPcfValue operator-(const BasicPcfValue& x, const BasicPcfValue& y) { return x + (-y); }
};

using PcfValue = BasicPcfValue<double>;

// Sum of scaled values, reported together with the cancellation ratio
// sum(|terms|) / |sum| (1 means no cancellation).
template <std::floating_point T, class Range>
std::pair<BasicPcfValue<T>, T> scaled_sum(const Range& terms) {
  T big = -std::numeric_limits<T>::infinity();
  for (const auto& t : terms) big = std::max(big, t.log_modulus);
  if (big == -std::numeric_limits<T>::infinity()) return {BasicPcfValue<T>{}, T(1)};
  std::complex<T> s = 0;
  T mag = 0;
  for (const auto& t : terms) {
    const auto v = t.scaled(big);
    s += v;
    mag += std::abs(v);
  }
  if (s == std::complex<T>(0)) return {BasicPcfValue<T>{}, std::numeric_limits<T>::infinity()};
  return {BasicPcfValue<T>::from_log(std::complex<T>(big, 0) + std::log(s)), mag / std::abs(s)};
}

}  // namespace stark
