// Double point well in a constant field F > 0.
//
// With V(x) = -F x the Dirac system reduces to the Weber equation in
//   y(x) = e^{-i pi/4} sqrt(2c/F) (E + F x) / c,   a = i m^2 c^3 / (2F) - 1/2.
// The spinor built from a pair (U, Ut) is
//   psi1 = U + Ut,   i psi2 = U - Ut,
// where (U1, Ut1) = (U(a,y), mc sqrt(c/2F) e^{3i pi/4} U(a+1,y)) is recessive
// as x -> +infinity and (U2, Ut2) = (U(-a,-iy), (1/mc) sqrt(2F/c) e^{-i pi/4}
// U(-a-1,-iy)) is recessive as x -> -infinity (for Im E > 0).
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "model.hpp"
#include "pcf.hpp"
#include "scaled.hpp"
#include "zerofield.hpp"

namespace stark {

// The four basis functions at one point, in scaled form.
struct PcfQuad {
  PcfValue u1, u2, u1_tilde, u2_tilde;
  bool accuracy_loss = false;
  [[nodiscard]] PcfValue u1_plus() const { return u1 + u1_tilde; }
  [[nodiscard]] PcfValue u1_minus() const { return u1 - u1_tilde; }
  [[nodiscard]] PcfValue u2_plus() const { return u2 + u2_tilde; }
  [[nodiscard]] PcfValue u2_minus() const { return u2 - u2_tilde; }
};

inline void require_field(const ModelParams& p) {
  require_valid(p);
  if (!(p.F > 0)) throw std::invalid_argument("field-case routine requires F > 0");
}

// Order a of the Weber equation.
inline cplx weber_order(const ModelParams& p) {
  return {-0.5, p.m * p.m * p.c * p.c * p.c / (2 * p.F)};
}

// Weber variable y(x).
inline cplx weber_variable(const ModelParams& p, cplx E, double x) {
  const cplx rot = std::polar(1.0, -std::numbers::pi / 4);
  return rot * std::sqrt(2 * p.c / p.F) * (E + p.F * x) / p.c;
}

inline PcfQuad pcf_quad(const ModelParams& p, cplx E, double x) {
  require_field(p);
  const cplx a = weber_order(p);
  const cplx y = weber_variable(p, E, x);
  const cplx w = cplx(0, -1) * y;
  const double mc = p.m * p.c;
  const PcfResult r1 = pcf_evaluate(a, y);
  const PcfResult r2 = pcf_evaluate(-a, w);
  const PcfResult r1t = pcf_evaluate(a + 1.0, y);
  const PcfResult r2t = pcf_evaluate(-a - 1.0, w);
  PcfQuad q;
  q.u1 = r1.value;
  q.u2 = r2.value;
  q.u1_tilde = r1t.value * (mc * std::sqrt(p.c / (2 * p.F)) * std::polar(1.0, 0.75 * std::numbers::pi));
  q.u2_tilde = r2t.value * (std::sqrt(2 * p.F / p.c) / mc * std::polar(1.0, -0.25 * std::numbers::pi));
  q.accuracy_loss = r1.accuracy_loss || r2.accuracy_loss || r1t.accuracy_loss || r2t.accuracy_loss;
  return q;
}

// Central-region solutions u, v with u(0) = (1,0), v(0) = (0,1):
//   u = c1 S1 + c2 S2,  v = c1' S1 + c2' S2,
// with S_j = (U_j+, -i U_j-) evaluated at y(x).
struct FieldBasis {
  PcfValue c1, c2, c1p, c2p;
  PcfQuad at_origin;
  bool ill_conditioned = false;
  bool accuracy_loss = false;
};

inline FieldBasis central_basis(cplx E, const ModelParams& p) {
  FieldBasis b;
  b.at_origin = pcf_quad(p, E, 0.0);
  const PcfQuad& q = b.at_origin;
  // Conditions at y0: c1 U1+ + c2 U2+ = psi1(0), c1 U1- + c2 U2- = i psi2(0).
  // The determinant U1+ U2- - U2+ U1- equals -2 (Ut2 U1 - U2 Ut1).
  const std::array<PcfValue, 2> dterms{q.u2_tilde * q.u1, -(q.u2 * q.u1_tilde)};
  const auto [inner, canc] = scaled_sum<double>(dterms);
  const PcfValue det = inner * cplx(-2.0, 0.0);
  b.ill_conditioned = det.is_zero() || canc > 1e8;
  b.accuracy_loss = q.accuracy_loss;
  const PcfValue I = PcfValue::from_complex({0, 1});
  b.c1 = q.u2_minus() / det;
  b.c2 = -(q.u1_minus() / det);
  b.c1p = -(I * q.u2_plus() / det);
  b.c2p = I * q.u1_plus() / det;
  return b;
}

// u(x) and v(x) from the central basis.
struct FieldSolutions {
  Spinor<double> u, v;
  [[nodiscard]] cplx wronskian() const { return u[0] * v[1] - u[1] * v[0]; }
};

inline FieldSolutions evaluate_basis(const FieldBasis& b, const ModelParams& p, cplx E, double x) {
  const PcfQuad q = pcf_quad(p, E, x);
  const cplx minus_i(0, -1);
  auto comb = [](const PcfValue& k1, const PcfValue& f1, const PcfValue& k2, const PcfValue& f2) {
    return (k1 * f1 + k2 * f2).value();
  };
  FieldSolutions s;
  s.u = {comb(b.c1, q.u1_plus(), b.c2, q.u2_plus()), minus_i * comb(b.c1, q.u1_minus(), b.c2, q.u2_minus())};
  s.v = {comb(b.c1p, q.u1_plus(), b.c2p, q.u2_plus()), minus_i * comb(b.c1p, q.u1_minus(), b.c2p, q.u2_minus())};
  return s;
}

// Jumped boundary values: G = Lambda_right (u, v)(R-) and
// H = Lambda_left (u, v)(-R+), components ordered (first, second), i.e.
// G_u = (G_u-, G_u+) and H_u = (H_u-, H_u+).
struct BoundaryConstants {
  Spinor<double> Gu, Gv, Hu, Hv;
  bool accuracy_loss = false;
};

inline BoundaryConstants boundary_constants(cplx E, const ModelParams& p) {
  const FieldBasis b = central_basis(E, p);
  const FieldSolutions right = evaluate_basis(b, p, E, p.R);
  const FieldSolutions left = evaluate_basis(b, p, E, -p.R);
  const JumpMatrix jr = jump_matrix_right(p), jl = jump_matrix_left(p);
  return {jr.apply(right.u), jr.apply(right.v), jl.apply(left.u), jl.apply(left.v), b.accuracy_loss};
}

// Ratio Ut/U of one pair; m-functions only need these ratios.
struct WellRatios {
  cplx t1;  // Ut1 / U1 at y(R)
  cplx t2;  // Ut2 / U2 at y(-R)
  bool accuracy_loss = false;
};

inline WellRatios well_ratios(const PcfQuad& qr, const PcfQuad& ql) {
  return {(qr.u1_tilde / qr.u1).value(), (ql.u2_tilde / ql.u2).value(), qr.accuracy_loss || ql.accuracy_loss};
}

inline WellRatios well_ratios(cplx E, const ModelParams& p) {
  return well_ratios(pcf_quad(p, E, p.R), pcf_quad(p, E, -p.R));
}

// The four factors of the pole equation, with U1 and U2 divided out:
//   A  = i G_u+ U1+ - G_u- U1-,   Dv = i G_v+ U1+ - G_v- U1-   (at y(R))
//   C  = i H_u+ U2+ - H_u- U2-,   B  = i H_v+ U2+ - H_v- U2-   (at y(-R))
// so that m+ = -A / Dv, m- = -C / B and the pole denominator is A B - C Dv.
struct PoleFactors {
  cplx A, B, C, Dv;
  // Sum of the moduli of the two terms forming each factor; the factors can
  // be much smaller than this after cancellation.
  double A_scale = 0, B_scale = 0, C_scale = 0, Dv_scale = 0;
  bool accuracy_loss = false;
};

// Pole factors from precomputed basis functions at y(R) and y(-R).
inline PoleFactors pole_factors(cplx E, const ModelParams& p, const PcfQuad& qr, const PcfQuad& ql) {
  require_field(p);
  const BoundaryConstants k = boundary_constants(E, p);
  const WellRatios r = well_ratios(qr, ql);
  const cplx I(0, 1);
  const cplx p1 = 1.0 + r.t1, m1 = 1.0 - r.t1, p2 = 1.0 + r.t2, m2 = 1.0 - r.t2;
  PoleFactors f;
  f.A = I * k.Gu[1] * p1 - k.Gu[0] * m1;
  f.Dv = I * k.Gv[1] * p1 - k.Gv[0] * m1;
  f.C = I * k.Hu[1] * p2 - k.Hu[0] * m2;
  f.B = I * k.Hv[1] * p2 - k.Hv[0] * m2;
  f.A_scale = std::abs(k.Gu[1] * p1) + std::abs(k.Gu[0] * m1);
  f.Dv_scale = std::abs(k.Gv[1] * p1) + std::abs(k.Gv[0] * m1);
  f.C_scale = std::abs(k.Hu[1] * p2) + std::abs(k.Hu[0] * m2);
  f.B_scale = std::abs(k.Hv[1] * p2) + std::abs(k.Hv[0] * m2);
  f.accuracy_loss = k.accuracy_loss || r.accuracy_loss;
  return f;
}

inline PoleFactors pole_factors(cplx E, const ModelParams& p) {
  require_field(p);
  return pole_factors(E, p, pcf_quad(p, E, p.R), pcf_quad(p, E, -p.R));
}

struct MPair {
  cplx m_plus, m_minus;
  bool pole = false;  // a denominator vanished exactly
};

inline MPair m_functions(cplx E, const ModelParams& p) {
  const PoleFactors f = pole_factors(E, p);
  MPair m;
  m.pole = f.Dv == cplx(0) || f.B == cplx(0);
  m.m_plus = -f.A / f.Dv;
  m.m_minus = -f.C / f.B;
  return m;
}

// Pole denominator A B - C Dv divided by the largest product of factor
// scales, so that |D| compares the root against the rounding level of the
// ingredients rather than against factors that have already cancelled.
inline cplx normalized_denominator(const PoleFactors& f) {
  const double scale = std::max(f.A_scale * f.B_scale, f.C_scale * f.Dv_scale);
  if (scale == 0) return 0;
  return (f.A * f.B - f.C * f.Dv) / scale;
}

inline cplx pole_denominator(cplx E, const ModelParams& p) { return normalized_denominator(pole_factors(E, p)); }

// Relative current f = 1 - |Ut/U|^2 of one pair at its well (pair 1 at +R,
// pair 2 at -R), for real E. For real E the current |U|^2 - |Ut|^2 of a pair
// is independent of x, so it is evaluated beyond the classical turning point,
// where it does not cancel, and carried back with |U(far)|^2 / |U(well)|^2.
// Inside the gap f is exponentially small and would otherwise be lost.
struct RelativeFlux {
  double value = 0;
  bool accuracy_loss = false;
};

inline RelativeFlux relative_flux(const ModelParams& p, double E, bool right, const PcfQuad& at_well) {
  const double dir = right ? 1.0 : -1.0;
  const double x0 = dir * p.R;
  const PcfValue u0 = right ? at_well.u1 : at_well.u2;
  // Turning point E + F x = +-mc^2 on the side of this pair.
  const double turn = (dir * p.rest() - E) / p.F;
  const double scale = std::cbrt(p.c * p.c / p.F);
  double x = x0;
  RelativeFlux out;
  for (int k = 0; k < 40; ++k) {
    const PcfQuad q = k == 0 ? at_well : pcf_quad(p, E, x);
    const PcfValue& u = right ? q.u1 : q.u2;
    const PcfValue& ut = right ? q.u1_tilde : q.u2_tilde;
    const double d = ut.log_modulus - u.log_modulus;
    const double s = std::exp(-2 * std::abs(d));  // smaller over larger squared modulus
    if ((1 - s) / (1 + s) > 0.1 || k == 39) {
      out.accuracy_loss = q.accuracy_loss || k == 39;
      // |u|^2 - |ut|^2 over |u0|^2, factored by the larger term.
      if (d <= 0) {
        out.value = (1 - s) * std::exp(2 * (u.log_modulus - u0.log_modulus));
      } else {
        out.value = -(1 - s) * std::exp(2 * (ut.log_modulus - u0.log_modulus));
      }
      return out;
    }
    const double beyond = dir * (turn - x0) > 0 ? turn : x0;
    x = beyond + dir * 0.25 * std::ldexp(scale, k);
  }
  return out;
}

// rho(E) = Im[(m+ m- + 1)/(m+ - m-)] / pi. With m+ = -A/Dv, m- = -C/B and
// the real-energy identities Im(A conj Dv) = f1 and Im(C conj B) = f2 (the
// jumped G and H pairs have unit Wronskian) this becomes
//   rho = [f1 (|B|^2 + |C|^2) - f2 (|A|^2 + |Dv|^2)] / (pi |C Dv - A B|^2),
// a sum of two non-negative terms that stays accurate when the resonance
// widths are far below the rounding level of the factors.
inline SpectralSample<double> stark_density(double E, const ModelParams& p) {
  require_field(p);
  const PcfQuad qr = pcf_quad(p, E, p.R), ql = pcf_quad(p, E, -p.R);
  const PoleFactors f = pole_factors(cplx(E, 0), p, qr, ql);
  SpectralSample<double> s{E, 0, std::abs(E) < p.rest(), false};
  const cplx den = f.C * f.Dv - f.A * f.B;
  if (den == cplx(0)) {
    s.rho = std::numeric_limits<double>::infinity();
    s.singular = true;
    return s;
  }
  const RelativeFlux f1 = relative_flux(p, E, true, qr);
  const RelativeFlux f2 = relative_flux(p, E, false, ql);
  const double num = f1.value * (std::norm(f.B) + std::norm(f.C)) - f2.value * (std::norm(f.A) + std::norm(f.Dv));
  s.rho = num / (std::numbers::pi * std::norm(den));
  s.singular = f.accuracy_loss || f1.accuracy_loss || f2.accuracy_loss || !std::isfinite(s.rho);
  return s;
}

// The same density from the direct formula Im[(A C + B Dv)/(C Dv - A B)] / pi,
// kept for cross-checks; it loses the exponentially small imaginary parts.
inline double stark_density_direct(double E, const ModelParams& p) {
  const PoleFactors f = pole_factors(cplx(E, 0), p);
  return ((f.A * f.C + f.B * f.Dv) / (f.C * f.Dv - f.A * f.B)).imag() / std::numbers::pi;
}

}  // namespace stark
