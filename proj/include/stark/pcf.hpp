// Parabolic cylinder function U(a, z) for complex order and argument.
//
// U solves w'' = (z^2/4 + a) w and is recessive as z -> +infinity. Values are
// returned in scaled form (log-modulus and phase) because e^{+-z^2/4}
// overflows double precision quickly.
//
// Evaluation routes, tried in order:
//   origin        closed-form Gamma expressions at z = 0
//   asymptotic    descending expansion, accepted only for |arg z| <= pi/4
//                 when the optimally truncated series has converged
//   series        Maclaurin series, accepted when its cancellation estimate
//                 is below 1e-13
//   wkb-inward    large |a| only: U decays outward along the ray, so a
//                 Liouville-Green anchor beyond z is integrated inward and
//                 normalised by the origin values
//   outward       U grows outward along the ray: Taylor integration of the
//                 Weber equation from the exact origin data
//   connection    left half plane: DLMF 12.2.18 style connection formula,
//                 accepted when it does not cancel badly
//   far-anchor    right half plane: integrate inward from a point where the
//                 asymptotic expansion converges, then along an arc
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "gamma.hpp"
#include "scaled.hpp"

namespace stark {

using cplx = std::complex<double>;

enum class PcfRoute { Origin, Asymptotic, Series, WkbInward, Outward, Connection, FarAnchor };

inline std::string_view to_string(PcfRoute r) {
  switch (r) {
    case PcfRoute::Origin: return "origin";
    case PcfRoute::Asymptotic: return "asymptotic";
    case PcfRoute::Series: return "series";
    case PcfRoute::WkbInward: return "wkb-inward";
    case PcfRoute::Outward: return "outward";
    case PcfRoute::Connection: return "connection";
    case PcfRoute::FarAnchor: return "far-anchor";
  }
  return "unknown";
}

// U(a, z) and its z-derivative, with the route used and an error estimate.
struct PcfResult {
  PcfValue value;
  PcfValue derivative;
  PcfRoute route = PcfRoute::Origin;
  double error = 0;            // estimated relative error
  bool accuracy_loss = false;  // error estimate above 1e-6
};

namespace pcf_detail {

inline constexpr double eps = std::numeric_limits<double>::epsilon();
inline constexpr double pi = std::numbers::pi;

// Below this |a| the generic routes are used unchanged.
inline constexpr double large_order = 60.0;

// U(a,0) = sqrt(pi) / (2^{a/2+1/4} Gamma(3/4+a/2)),
// U'(a,0) = -sqrt(pi) / (2^{a/2-1/4} Gamma(1/4+a/2)).
inline PcfResult origin(cplx a) {
  const double ln2 = std::numbers::ln2;
  const cplx half_log_pi = 0.5 * std::log(pi);
  PcfResult r;
  r.value = PcfValue::from_log(half_log_pi - (a / 2.0 + 0.25) * ln2) * rgamma(0.75 + a / 2.0);
  r.derivative = -(PcfValue::from_log(half_log_pi - (a / 2.0 - 0.25) * ln2) * rgamma(0.25 + a / 2.0));
  r.route = PcfRoute::Origin;
  r.error = 1e-14;
  return r;
}

// Maclaurin series about z = 0 for value and derivative. The error estimate
// is eps * sum|terms| / |sum|, i.e. the cancellation-induced rounding error.
inline PcfResult series(cplx a, cplx z) {
  const PcfResult o = origin(a);
  PcfResult r;
  r.route = PcfRoute::Series;
  if (z == cplx(0)) return o;
  const double shift = std::max(o.value.log_modulus, o.derivative.log_modulus);
  // Terms t_n = c_n z^n with c_{n+2} = (a c_n + c_{n-2}/4) / ((n+1)(n+2)).
  const cplx z2 = z * z, z4 = z2 * z2;
  // Rolling window: tm2 = t_{n-2}, tm1 = t_{n-1}, tn = t_n, tn1 = t_{n+1}.
  cplx tm2 = 0, tm1 = 0, tn = o.value.scaled(shift), tn1 = o.derivative.scaled(shift) * z;
  cplx sum = tn + tn1;
  cplx dsum = tn1;  // sum n t_n, i.e. z times the derivative
  double abs_sum = std::abs(tn) + std::abs(tn1);
  double abs_dsum = std::abs(tn1);
  double biggest = std::max(std::abs(tn), std::abs(tn1));
  int small = 0;
  for (int n = 0; n < 40000; ++n) {
    const cplx tn2 = (a * z2 * tn + 0.25 * z4 * tm2) / double((n + 1) * (n + 2));
    tm2 = tm1;
    tm1 = tn;
    tn = tn1;
    tn1 = tn2;
    if (!std::isfinite(tn2.real()) || !std::isfinite(tn2.imag())) {
      r.error = std::numeric_limits<double>::infinity();
      return r;
    }
    sum += tn2;
    dsum += double(n + 2) * tn2;
    const double at = std::abs(tn2);
    abs_sum += at;
    abs_dsum += double(n + 2) * at;
    biggest = std::max(biggest, at);
    if (n > 10 && at < 1e-18 * std::abs(sum) && at < 1e-18 * biggest) {
      if (++small > 3) break;
    } else {
      small = 0;
    }
  }
  if (sum == cplx(0) || dsum == cplx(0)) {
    r.error = std::numeric_limits<double>::infinity();
    return r;
  }
  r.value = PcfValue::from_log(std::log(sum) + shift);
  r.derivative = PcfValue::from_log(std::log(dsum / z) + shift);
  r.error = eps * std::max(abs_sum / std::abs(sum), abs_dsum / std::abs(dsum));
  return r;
}

// Sum_s sign^s (b)_{2s} / (s! (2 z^2)^s) with optimal truncation. The
// derivative series sums -2s * term / z. The tail is the relative
// size of the last retained term.
struct AsymSeries {
  cplx sum;
  cplx dsum;
  double tail;
};

inline AsymSeries asym_series(cplx b, double sign, cplx z) {
  const cplx two_z2 = 2.0 * z * z;
  cplx sum = 1, dsum = 0, t = 1;
  double tail = 0;
  for (int s = 0; s < 400; ++s) {
    const cplx tn = t * sign * (b + 2.0 * s) * (b + 2.0 * s + 1.0) / (double(s + 1) * two_z2);
    if (s > 0 && std::abs(tn) > std::abs(t)) {
      tail = std::abs(t) / std::abs(sum);
      return {sum, dsum, tail};
    }
    t = tn;
    sum += t;
    dsum += -2.0 * double(s + 1) * t / z;
    tail = std::abs(t) / std::abs(sum);
    if (std::abs(t) < 1e-17 * std::abs(sum)) break;
  }
  return {sum, dsum, tail};
}

// Descending expansion (DLMF 12.9.1, 12.9.3). For pi/4 < |arg z| the second
// exponential, with coefficient sqrt(2 pi)/Gamma(1/2 + a), is included.
inline PcfResult asymptotic(cplx a, cplx z) {
  PcfResult r;
  r.route = PcfRoute::Asymptotic;
  const double th = std::arg(z);
  const cplx lz = std::log(z);
  const AsymSeries s1 = asym_series(0.5 + a, -1.0, z);
  // log of e^{-z^2/4} z^{-a-1/2} S1 and its logarithmic derivative.
  const cplx L1 = -z * z / 4.0 + (-a - 0.5) * lz + std::log(s1.sum);
  const cplx dl1 = -z / 2.0 + (-a - 0.5) / z + s1.dsum / s1.sum;
  const PcfValue v1 = PcfValue::from_log(L1);
  if (std::abs(th) <= pi / 4) {
    r.value = v1;
    r.derivative = v1 * dl1;
    r.error = s1.tail + 1e-15;
    return r;
  }
  const double sg = th > 0 ? 1.0 : -1.0;
  const AsymSeries s2 = asym_series(0.5 - a, 1.0, z);
  const PcfValue coef = PcfValue::from_complex(cplx(0, sg * std::sqrt(2 * pi))) * rgamma(0.5 + a);
  if (coef.is_zero() || s2.sum == cplx(0)) {
    r.value = v1;
    r.derivative = v1 * dl1;
    r.error = s1.tail + 1e-15;
    return r;
  }
  const cplx L2 = -sg * cplx(0, 1) * pi * a + z * z / 4.0 + (a - 0.5) * lz + std::log(s2.sum);
  const cplx dl2 = z / 2.0 + (a - 0.5) / z + s2.dsum / s2.sum;
  const PcfValue v2 = coef * PcfValue::from_log(L2);
  const std::array<PcfValue, 2> vals{v1, v2};
  const std::array<PcfValue, 2> ders{v1 * dl1, v2 * dl2};
  const auto [val, canc] = scaled_sum<double>(vals);
  const auto [der, dcanc] = scaled_sum<double>(ders);
  r.value = val;
  r.derivative = der;
  const double w1 = std::exp(v1.log_modulus - val.log_modulus);
  const double w2 = std::exp(v2.log_modulus - val.log_modulus);
  // The sector formula switches the second exponential on at full strength,
  // but its true Stokes multiplier rises smoothly across arg z = +-pi/2
  // (Berry's erfc law). Charge the missing part to the error estimate.
  const double phi = std::min(std::abs(th) - pi / 2, pi / 4 - 1e-12);
  const double sigma = std::abs(z) * std::sin(2 * phi) / (2 * std::sqrt(std::cos(2 * phi)));
  const double stokes = 0.5 * std::erfc(sigma) * w2;
  r.error = std::max({s1.tail * w1, s2.tail * w2, stokes, eps * std::max(canc, dcanc)}) + 1e-15;
  return r;
}

// State of a Taylor integration: (w, w') * exp(scale).
struct OdeState {
  cplx w, dw;
  double scale;
};

// One Taylor step of w'' = (a + z^2/4) w from z0 over h.
inline void taylor_step(cplx a, cplx z0, OdeState& st, cplx h) {
  // With w(z0+t) = sum c_n t^n the coefficients obey
  // (n+1)(n+2) c_{n+2} = (a + z0^2/4) c_n + (z0/2) c_{n-1} + c_{n-2}/4.
  const cplx A0 = a + z0 * z0 / 4.0, A1 = z0 / 2.0;
  cplx cm2 = 0, cm1 = 0, cn = st.w, cn1 = st.dw;
  cplx val = st.w + st.dw * h, der = st.dw;
  cplx hn = h;  // h^{n+1}
  double biggest = std::max(std::abs(st.w), std::abs(st.dw * h));
  int small = 0;
  for (int n = 0; n < 400; ++n) {
    const cplx cn2 = (A0 * cn + A1 * cm1 + 0.25 * cm2) / double((n + 1) * (n + 2));
    der += double(n + 2) * cn2 * hn;
    hn *= h;
    const cplx t = cn2 * hn;
    val += t;
    const double at = std::abs(t);
    biggest = std::max(biggest, at);
    small = at < 1e-18 * biggest ? small + 1 : 0;
    if (small >= 3) break;
    cm2 = cm1;
    cm1 = cn;
    cn = cn1;
    cn1 = cn2;
  }
  st.w = val;
  st.dw = der;
}

// Integrate along the straight segment from z to target.
inline void integrate(cplx a, cplx& z, OdeState& st, cplx target) {
  while (std::abs(target - z) > 1e-15 * (1.0 + std::abs(z))) {
    const double rate = std::abs(std::sqrt(a + z * z / 4.0)) + std::sqrt(std::abs(z) / 2.0) + 1.0;
    const double hmax = 2.0 / rate;
    const cplx d = target - z;
    const cplx h = std::abs(d) <= hmax ? d : d / std::abs(d) * hmax;
    taylor_step(a, z, st, h);
    z += h;
    const double m = std::max(std::abs(st.w), std::abs(st.dw));
    if (m > 0 && std::isfinite(m)) {
      st.w /= m;
      st.dw /= m;
      st.scale += std::log(m);
    }
  }
}

inline PcfResult from_state(const OdeState& st, double phase, PcfRoute route, double err) {
  PcfResult r;
  r.value = PcfValue::from_log(cplx(st.scale, phase)) * st.w;
  r.derivative = PcfValue::from_log(cplx(st.scale, phase)) * st.dw;
  r.route = route;
  r.error = err;
  return r;
}

// Taylor integration outward from the exact origin data.
inline PcfResult outward(cplx a, cplx z) {
  const PcfResult o = origin(a);
  const double shift = std::max(o.value.log_modulus, o.derivative.log_modulus);
  OdeState st{o.value.scaled(shift), o.derivative.scaled(shift), shift};
  cplx pos = 0;
  integrate(a, pos, st, z);
  return from_state(st, 0.0, PcfRoute::Outward, 1e-12);
}

// Liouville-Green rate s = sqrt(z^2/4 + a), continued along the ray from
// the origin starting at the principal sqrt(a). Returns Re(s * dir) samples.
inline std::vector<double> ray_rates(cplx a, cplx z, cplx& s_end) {
  const double r = std::abs(z);
  const cplx dir = z / r;
  const int n = std::max(8, int(r * 4));
  cplx s = std::sqrt(a);
  std::vector<double> out;
  out.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const cplx zz = r * double(k) / n * dir;
    cplx sn = std::sqrt(a + zz * zz / 4.0);
    if (std::abs(sn - s) > std::abs(sn + s)) sn = -sn;
    s = sn;
    out.push_back((s * dir).real());
  }
  s_end = s;
  return out;
}

// Large |a|, U decaying outward along the ray through z: start from a
// first-order Liouville-Green anchor far enough beyond z that the unwanted
// solution is suppressed by e^{-45}, integrate inward through z to the
// origin and normalise with the exact U(a,0).
inline std::optional<PcfResult> wkb_inward(cplx a, cplx z, cplx s_at_z, double suppression = 45.0) {
  const double r = std::abs(z);
  const cplx dir = z / r;
  double acc = 0, rr = r;
  cplx sA = s_at_z;
  // Along a nearly oscillatory ray the decay rate is tiny and the anchor
  // would recede without bound; give up and let another route take over.
  const double r_max = 4.0 * (r + std::sqrt(std::abs(a))) + 20.0;
  while (acc < suppression) {
    if (rr > r_max) return std::nullopt;
    const double rr2 = rr + std::max(0.01, 1.0 / (std::abs(sA) + 1.0));
    const cplx zz = rr2 * dir;
    cplx sn = std::sqrt(a + zz * zz / 4.0);
    if (std::abs(sn - sA) > std::abs(sn + sA)) sn = -sn;
    if ((sn * dir).real() <= 0) return std::nullopt;  // reached a turning point
    acc += (sn * dir).real() * (rr2 - rr);
    rr = rr2;
    sA = sn;
  }
  const cplx zA = rr * dir;
  OdeState st{1.0, -sA - zA / (4.0 * sA * sA), 0.0};
  cplx pos = zA;
  integrate(a, pos, st, z);
  const OdeState at_z = st;
  integrate(a, pos, st, cplx(0));
  const PcfResult o = origin(a);
  if (o.value.is_zero() || st.w == cplx(0)) return std::nullopt;
  // U(z) = w(z) * U(0) / w(0).
  const PcfValue norm = o.value / (PcfValue::from_log(cplx(st.scale, 0)) * st.w);
  PcfResult res;
  res.value = norm * PcfValue::from_log(cplx(at_z.scale, 0)) * at_z.w;
  res.derivative = norm * PcfValue::from_log(cplx(at_z.scale, 0)) * at_z.dw;
  res.route = PcfRoute::WkbInward;
  res.error = 1e-12;
  return res;
}

// Right half plane continuation from a far point where the asymptotic
// expansion converges for both a and a - 1.
inline PcfResult far_anchor(cplx a, cplx z) {
  const double th = std::arg(z), r = std::abs(z);
  const double thA = std::clamp(th, -pi / 4, pi / 4);
  double rho = std::max(r, 2.0);
  cplx zA;
  PcfResult A;
  for (;;) {
    zA = std::polar(rho, thA);
    A = asymptotic(a, zA);
    if (A.error < 2e-15) break;
    rho *= 1.25;
  }
  const double shift = std::max(A.value.log_modulus, A.derivative.log_modulus);
  OdeState st{A.value.scaled(shift), A.derivative.scaled(shift), shift};
  cplx pos = zA;
  if (rho > r) integrate(a, pos, st, std::polar(r, thA));
  if (th != thA) {
    const int n = std::max(2, int(std::abs(th - thA) * r) + 1);
    for (int k = 1; k <= n; ++k) integrate(a, pos, st, std::polar(r, thA + (th - thA) * k / n));
  }
  return from_state(st, 0.0, PcfRoute::FarAnchor, 1e-12);
}

inline PcfResult right_half(cplx a, cplx z);

// Large-order routes driven by the Liouville-Green growth direction.
inline std::optional<PcfResult> large_order_route(cplx a, cplx z) {
  cplx s_end;
  const std::vector<double> rates = ray_rates(a, z, s_end);
  const bool grows = std::all_of(rates.begin() + 1, rates.end(), [](double x) { return x < 0; });
  const bool decays = std::all_of(rates.begin(), rates.end(), [](double x) { return x > 0; });
  if (grows) return outward(a, z);
  if (decays) return wkb_inward(a, z, s_end);
  return std::nullopt;
}

// Left half plane via the connection formula, with a = order and w = z:
//   U(a, w) = e^{-+ i pi (a/2 - 1/4)} [ sqrt(2 pi)/Gamma(1/2 + a) U(-a, -+ i w)
//                                       - e^{-+ i pi (a/2 - 1/4)} U(a, -w) ]
// (upper signs for arg w > pi/2). Returns the cancellation ratio too.
inline std::pair<PcfResult, double> connection(cplx a, cplx z) {
  const double th = std::arg(z);
  const cplx I(0, 1);
  const double sg = th > 0 ? 1.0 : -1.0;
  const cplx rot = -sg * I;  // argument map w -> -+ i w
  const PcfResult B = right_half(-a, rot * z);
  const PcfResult C = right_half(a, -z);
  const PcfValue ph = PcfValue::from_log(-sg * I * pi * (a / 2.0 - 0.25));
  const PcfValue k1 = ph * PcfValue::from_complex(std::sqrt(2 * pi)) * rgamma(0.5 + a);
  const PcfValue k2 = -(ph * ph);
  const std::array<PcfValue, 2> vals{k1 * B.value, k2 * C.value};
  const std::array<PcfValue, 2> ders{k1 * B.derivative * rot, -(k2 * C.derivative)};
  const auto [val, canc] = scaled_sum<double>(vals);
  const auto [der, dcanc] = scaled_sum<double>(ders);
  PcfResult r;
  r.value = val;
  r.derivative = der;
  r.route = PcfRoute::Connection;
  const double c = std::max(canc, dcanc);
  r.error = std::max(B.error, C.error) * c;
  return {r, c};
}

inline PcfResult right_half(cplx a, cplx z) {
  if (z == cplx(0)) return origin(a);
  if (std::abs(std::arg(z)) <= pi / 4) {
    PcfResult r = asymptotic(a, z);
    if (r.error < 2e-15) return r;
  }
  if (std::abs(z) < 60) {
    PcfResult r = series(a, z);
    if (r.error < 1e-13) return r;
  }
  if (std::abs(a) >= large_order) {
    if (auto r = large_order_route(a, z)) return *r;
  }
  return far_anchor(a, z);
}

inline PcfResult evaluate(cplx a, cplx z) {
  const double th = std::arg(z);
  if (std::abs(th) <= pi / 2) return right_half(a, z);
  if (std::abs(z) < 60) {
    PcfResult r = series(a, z);
    if (r.error < 1e-13) return r;
  }
  if (std::abs(a) >= large_order) {
    if (auto r = large_order_route(a, z)) return *r;
  }
  auto [r, canc] = connection(a, z);
  if (canc < 1e4) return r;
  return outward(a, z);
}

}  // namespace pcf_detail

// U(a, z) and its derivative. The result also records the route taken and
// an error estimate.
inline PcfResult pcf_evaluate(cplx a, cplx z) {
  const auto finite = [](cplx w) { return std::isfinite(w.real()) && std::isfinite(w.imag()); };
  if (!finite(a) || !finite(z)) {
    // Non-finite input: return a NaN value flagged as unusable.
    const double nan = std::numeric_limits<double>::quiet_NaN();
    PcfResult bad;
    bad.value = PcfValue::from_log(cplx(nan, nan));
    bad.derivative = bad.value;
    bad.error = std::numeric_limits<double>::infinity();
    bad.accuracy_loss = true;
    return bad;
  }
  PcfResult r = pcf_detail::evaluate(a, z);
  r.accuracy_loss = !(r.error <= 1e-6) || !r.value.finite();
  return r;
}

// U(a, z) in scaled form.
inline PcfValue pcf_u(cplx a, cplx z) { return pcf_evaluate(a, z).value; }

// Descending asymptotic expansion on its own (any sector of the principal
// branch), for cross-validation.
inline PcfResult pcf_asymptotic(cplx a, cplx z) {
  PcfResult r = pcf_detail::asymptotic(a, z);
  r.accuracy_loss = !(r.error <= 1e-6);
  return r;
}

// Maclaurin series on its own.
inline PcfResult pcf_series(cplx a, cplx z) {
  PcfResult r = pcf_detail::series(a, z);
  r.accuracy_loss = !(r.error <= 1e-6);
  return r;
}

// Residual of the two recurrences
//   z/2 U(a) + U'(a) + (a + 1/2) U(a+1) = 0,   z/2 U(a) - U'(a) - U(a-1) = 0,
// scaled by the largest term magnitude. U' comes from the route used for
// U(a, z) itself, not from the recurrences.
inline double pcf_recurrence_check(cplx a, cplx z) {
  const PcfResult u = pcf_evaluate(a, z);
  const PcfValue up = pcf_u(a + 1.0, z);
  const PcfValue um = pcf_u(a - 1.0, z);
  const PcfValue half_z_u = u.value * (z / 2.0);
  const PcfValue t3 = up * (a + 0.5);
  auto residual = [](std::initializer_list<PcfValue> terms) {
    double big = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) big = std::max(big, t.log_modulus);
    if (!std::isfinite(big)) return 0.0;
    cplx s = 0;
    for (const auto& t : terms) s += t.scaled(big);
    return std::abs(s);
  };
  return residual({half_z_u, u.derivative, t3}) + residual({half_z_u, -u.derivative, -um});
}

}  // namespace stark
