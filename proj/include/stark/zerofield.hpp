// Zero-field problems: the free particle and the double point well.
//
// Between and outside the wells the solutions are plane waves with momentum
// p = sqrt(E^2 - m^2 c^4); with hbar = 1 the wave number is p / c.
#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "model.hpp"

namespace stark {

template <std::floating_point T>
using Spinor = std::array<std::complex<T>, 2>;

// Momentum on the physical sheet: the branch of sqrt(E^2 - m^2 c^4) with
// Im p >= 0, continuous from the upper half plane. On the real axis this is
// +|p| above the gap, -|p| below it and i sqrt(m^2 c^4 - E^2) inside it.
template <std::floating_point T>
std::complex<T> momentum(std::complex<T> E, const BasicModelParams<T>& p) {
  const T mc2 = p.rest();
  const T ax = E.real();
  if (E.imag() == 0) {
    const T q = ax * ax - mc2 * mc2;
    if (q >= 0) return {ax >= 0 ? std::sqrt(q) : -std::sqrt(q), 0};
    return {0, std::sqrt(-q)};
  }
  std::complex<T> k = std::sqrt((E - mc2) * (E + mc2));
  if (k.imag() < 0) k = -k;
  return k;
}

namespace zf_detail {
// sin(w)/w, stable near w = 0.
template <std::floating_point T>
std::complex<T> sinc(std::complex<T> w) {
  if (std::abs(w) < T(1e-4)) {
    const std::complex<T> w2 = w * w;
    return T(1) - w2 / T(6) + w2 * w2 / T(120);
  }
  return std::sin(w) / w;
}
}  // namespace zf_detail

// Fundamental solutions of the free Dirac equation
//   psi1' = (m c - W) psi2,  psi2' = (W + m c) psi1,  W = E / c,
// with u(0) = (1, 0) and v(0) = (0, 1):
//   u = (cos(kx), p sin(kx) / (E - mc^2)),  v = (-(E - mc^2) sin(kx) / p, cos(kx)),
// k = p / c, written with sinc so the thresholds E = +-mc^2 are regular.
template <std::floating_point T>
struct TrigBasis {
  Spinor<T> u, v;
  [[nodiscard]] std::complex<T> wronskian() const { return u[0] * v[1] - u[1] * v[0]; }
};

template <std::floating_point T>
TrigBasis<T> trig_basis(std::complex<T> E, T x, const BasicModelParams<T>& prm) {
  const std::complex<T> p = momentum(E, prm);
  const std::complex<T> kx = p * x / prm.c;
  const std::complex<T> cs = std::cos(kx);
  const std::complex<T> sn = zf_detail::sinc(kx) * x / prm.c;  // sin(kx) / p
  const T mc2 = prm.rest();
  return {{cs, (E + mc2) * sn}, {-(E - mc2) * sn, cs}};
}

// ---------------------------------------------------------------- free case

template <std::floating_point T>
struct SpectralSample {
  T E = 0;
  T rho = 0;
  bool is_gap = false;
  bool singular = false;  // threshold or pole: rho is not finite
};

template <std::floating_point T>
SpectralSample<T> free_density(T E, const BasicModelParams<T>& prm) {
  const T mc2 = prm.rest();
  SpectralSample<T> s{E, 0, std::abs(E) < mc2, false};
  if (std::abs(E) == mc2) {
    s.rho = std::numeric_limits<T>::infinity();
    s.singular = true;
  } else if (!s.is_gap) {
    s.rho = std::abs(E) / (std::numbers::pi_v<T> * std::sqrt(E * E - mc2 * mc2));
  }
  return s;
}

// m+(E) = -i p / (E - mc^2) with p on the physical sheet. With |p| this is
// -i|p|/(E - mc^2) above the gap and +i|p|/(E - mc^2) below it.
template <std::floating_point T>
std::complex<T> free_m_plus(std::complex<T> E, const BasicModelParams<T>& prm) {
  const std::complex<T> I(0, 1);
  return -I * momentum(E, prm) / (E - prm.rest());
}

// Density of an even potential from m+: rho = Im(-m+ + 1/m+) / (2 pi).
template <std::floating_point T>
T even_density(std::complex<T> m_plus) {
  return (-m_plus + T(1) / m_plus).imag() / (2 * std::numbers::pi_v<T>);
}

// ------------------------------------------------------- double point well

// Boundary values just outside the right well, Lambda (psi1, psi2)(R-),
// for the two fundamental solutions: G_u = (G_u-, G_u+), G_v likewise.
template <std::floating_point T>
struct ZeroFieldBoundary {
  Spinor<T> Gu, Gv;
};

template <std::floating_point T>
ZeroFieldBoundary<T> zero_field_boundary(std::complex<T> E, const BasicModelParams<T>& prm) {
  const auto basis = trig_basis(E, prm.R, prm);
  const auto lam = jump_matrix_right(prm);
  return {lam.apply(basis.u), lam.apply(basis.v)};
}

// Coefficients of u and v on the free basis beyond the well (called a1, a2,
// b1, b2 for the u and v solutions). With s = sin(pR/c), co = cos(pR/c):
//   a1 = G_u- s - ((E - mc^2)/p) G_u+ co,  a2 = ((E - mc^2)/p) G_u+ s + G_u- co.
template <std::floating_point T>
struct OuterCoefficients {
  std::complex<T> a1, a2, b1, b2;
};

template <std::floating_point T>
OuterCoefficients<T> outer_coefficients(std::complex<T> E, const BasicModelParams<T>& prm) {
  const auto G = zero_field_boundary(E, prm);
  const std::complex<T> p = momentum(E, prm);
  const std::complex<T> kR = p * prm.R / prm.c;
  const std::complex<T> s = std::sin(kR), co = std::cos(kR);
  const std::complex<T> r = (E - prm.rest()) / p;
  return {G.Gu[0] * s - r * G.Gu[1] * co, r * G.Gu[1] * s + G.Gu[0] * co,
          G.Gv[0] * s - r * G.Gv[1] * co, r * G.Gv[1] * s + G.Gv[0] * co};
}

// Denominator i b1 + b2 of m+; it vanishes at the bound states.
template <std::floating_point T>
std::complex<T> double_delta_denominator(std::complex<T> E, const BasicModelParams<T>& prm) {
  const auto k = outer_coefficients(E, prm);
  return std::complex<T>(0, 1) * k.b1 + k.b2;
}

// Numerator i a1 + a2 of m+ (up to sign); it vanishes at the odd-parity
// bound states, where m+ = 0.
template <std::floating_point T>
std::complex<T> double_delta_numerator(std::complex<T> E, const BasicModelParams<T>& prm) {
  const auto k = outer_coefficients(E, prm);
  return std::complex<T>(0, 1) * k.a1 + k.a2;
}

// Denominator of the even-potential density Im(-m+ + 1/m+) = Im((1 - m+^2)/m+):
// the product (i a1 + a2)(i b1 + b2), normalised by the size of its
// ingredients. Every bound state is a zero of this function.
template <std::floating_point T>
T double_delta_density_denominator(std::complex<T> E, const BasicModelParams<T>& prm) {
  const auto k = outer_coefficients(E, prm);
  const std::complex<T> I(0, 1);
  const T scale = (std::abs(k.a1) + std::abs(k.a2)) * (std::abs(k.b1) + std::abs(k.b2));
  return std::abs((I * k.a1 + k.a2) * (I * k.b1 + k.b2)) / scale;
}

// m+(E) = -(i a1 + a2) / (i b1 + b2) on the physical sheet; equivalent to
// the piecewise form with |p| and the signs of i flipped below -mc^2.
template <std::floating_point T>
std::complex<T> double_delta_m_plus(std::complex<T> E, const BasicModelParams<T>& prm) {
  const auto k = outer_coefficients(E, prm);
  const std::complex<T> I(0, 1);
  return -(I * k.a1 + k.a2) / (I * k.b1 + k.b2);
}

template <std::floating_point T>
SpectralSample<T> double_delta_density(T E, const BasicModelParams<T>& prm) {
  const T mc2 = prm.rest();
  SpectralSample<T> s{E, 0, std::abs(E) < mc2, false};
  if (std::abs(E) == mc2) {
    s.rho = std::numeric_limits<T>::infinity();
    s.singular = true;
    return s;
  }
  if (s.is_gap) return s;  // bound states are reported separately
  const std::complex<T> mp = double_delta_m_plus(std::complex<T>(E, 0), prm);
  if (!std::isfinite(mp.real()) || !std::isfinite(mp.imag())) {
    s.rho = std::numeric_limits<T>::infinity();
    s.singular = true;
    return s;
  }
  s.rho = even_density(mp);
  return s;
}

// Bound-state condition, '+' branch (ground) and '-' branch (excited):
//   -(1 - g^2/4c^2) pt + (g/c) [E +- mc^2 exp(-2 pt R / c)] = 0,
// pt = sqrt(m^2 c^4 - E^2).
template <std::floating_point T>
T bound_state_function(T E, const BasicModelParams<T>& prm, bool ground) {
  const T mc2 = prm.rest();
  const T pt = std::sqrt(std::max(T(0), (mc2 - E) * (mc2 + E)));
  const T k = prm.g / prm.c;
  const T ex = mc2 * std::exp(-2 * pt * prm.R / prm.c);
  return -(1 - k * k / 4) * pt + k * (E + (ground ? ex : -ex));
}

template <std::floating_point T>
struct BoundStateSet {
  std::optional<T> ground, excited;
  [[nodiscard]] int count() const { return int(ground.has_value()) + int(excited.has_value()); }
};

namespace zf_detail {

// The bound-state function in terms of pt on one half of the gap
// (E = +-(mc^2 - gap), gap = pt^2 / (mc^2 + sqrt(m^2 c^4 - pt^2))). Both
// E +- mc^2 and 1 - exp(-2 pt R / c) are formed without cancellation, so
// the sign stays reliable for roots within 1e-15 mc^2 of a threshold.
template <std::floating_point T>
T bound_state_function_pt(T pt, bool upper, const BasicModelParams<T>& prm, bool ground) {
  const T mc2 = prm.rest();
  const T k = prm.g / prm.c;
  const T gap = pt * pt / (mc2 + std::sqrt((mc2 - pt) * (mc2 + pt)));
  const T decay = -std::expm1(-2 * pt * prm.R / prm.c) * mc2;
  T s;
  if (upper) {
    s = ground ? 2 * mc2 - gap - decay : decay - gap;
  } else {
    s = ground ? gap - decay : gap + decay - 2 * mc2;
  }
  return -(1 - k * k / 4) * pt + k * s;
}

// Lowest root of one branch, scanning the gap from -mc^2 upwards on a grid
// in pt that is geometric near the thresholds.
template <std::floating_point T>
std::optional<T> bracket_root(const BasicModelParams<T>& prm, bool ground) {
  const T mc2 = prm.rest();
  std::vector<T> pts;
  for (int i = 0; i <= 150; ++i) pts.push_back(mc2 * std::pow(T(10), T(-16) + T(13) * T(i) / T(150)));
  constexpr int n = 4000;
  for (int i = 1; i <= n; ++i) pts.push_back(mc2 * (T(1e-3) + (1 - T(1e-3)) * T(i) / T(n)));
  struct Node {
    T pt;
    bool upper;
  };
  std::vector<Node> nodes;
  for (T pt : pts) nodes.push_back({pt, false});
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) nodes.push_back({*it, true});
  auto f = [&](const Node& nd) { return bound_state_function_pt(nd.pt, nd.upper, prm, ground); };
  auto energy = [&](const Node& nd) {
    const T gap = nd.pt * nd.pt / (mc2 + std::sqrt((mc2 - nd.pt) * (mc2 + nd.pt)));
    return nd.upper ? mc2 - gap : -mc2 + gap;
  };
  T f0 = f(nodes[0]);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const T f1 = f(nodes[i]);
    if (f0 == 0) return energy(nodes[i - 1]);
    if ((f0 < 0) != (f1 < 0) && nodes[i - 1].upper == nodes[i].upper) {
      Node a = nodes[i - 1], b = nodes[i];
      T fa = f0;
      while (std::abs(b.pt - a.pt) > 2 * std::numeric_limits<T>::epsilon() * std::max(a.pt, b.pt)) {
        const Node mid{(a.pt + b.pt) / 2, a.upper};
        const T fm = f(mid);
        if (fm == 0) return energy(mid);
        if ((fm < 0) == (fa < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      return energy(Node{(a.pt + b.pt) / 2, a.upper});
    }
    f0 = f1;
  }
  return std::nullopt;
}

// Newton steps on the energy form, then the best of the neighbouring
// doubles. Bisection in pt leaves an error of order eps |dE/dpt| in E, which
// is large near the middle of the gap. Steps are kept only when they lower
// |f| and stay inside the gap.
template <std::floating_point T>
T polish_root(T E, const BasicModelParams<T>& prm, bool ground) {
  const T mc2 = prm.rest();
  const T k = prm.g / prm.c;
  const T sign = ground ? 1 : -1;
  auto f = [&](T x) { return std::abs(bound_state_function(x, prm, ground)); };
  T best = E, fbest = f(E);
  for (int it = 0; it < 4 && fbest > 0; ++it) {
    const T pt = std::sqrt((mc2 - best) * (mc2 + best));
    if (!(pt > 0)) break;
    const T ex = mc2 * std::exp(-2 * pt * prm.R / prm.c);
    const T df = (1 - k * k / 4) * best / pt + k * (1 + sign * ex * 2 * prm.R * best / (prm.c * pt));
    const T next = best - bound_state_function(best, prm, ground) / df;
    if (!(std::abs(next) < mc2)) break;
    const T fn = f(next);
    if (!(fn < fbest)) break;
    best = next;
    fbest = fn;
  }
  const T start = best;
  for (T dir : {-mc2, mc2}) {
    T x = start;
    for (int j = 0; j < 2; ++j) {
      x = std::nextafter(x, dir);
      if (std::abs(x) >= mc2) break;
      const T fx = f(x);
      if (fx < fbest) {
        best = x;
        fbest = fx;
      }
    }
  }
  return best;
}

template <std::floating_point T>
std::optional<T> find_root(const BasicModelParams<T>& prm, bool ground) {
  const auto E = bracket_root(prm, ground);
  if (!E) return E;
  return polish_root(*E, prm, ground);
}
}  // namespace zf_detail

template <std::floating_point T>
BoundStateSet<T> bound_states(const BasicModelParams<T>& prm) {
  require_valid(prm);
  if (!(prm.g > 0)) return {};
  return {zf_detail::find_root(prm, true), zf_detail::find_root(prm, false)};
}

// Well strengths where the excited state appears at +mc^2 and the ground
// state leaves through -mc^2. In units with c = 1 these are
// -4 m R + 2 sqrt(4 m^2 R^2 + 1) and 4 m R + 2 sqrt(4 m^2 R^2 + 1).
template <std::floating_point T>
std::pair<T, T> critical_g(const BasicModelParams<T>& prm) {
  const T mcR = prm.m * prm.c * prm.R;
  const T root = 2 * prm.c * std::sqrt(4 * mcR * mcR + 1);
  return {-4 * prm.c * mcR + root, 4 * prm.c * mcR + root};
}

}  // namespace stark
