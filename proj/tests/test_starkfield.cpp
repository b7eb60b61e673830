#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "stark/starkfield.hpp"
#include "stark/zerofield.hpp"

namespace {

using cd = std::complex<double>;
using stark::ModelParams;

ModelParams field(double F, double g = 3.0, double R = 1.0) {
  ModelParams p;
  p.g = g;
  p.R = R;
  p.F = F;
  return p;
}

struct Peak {
  double E, rho, fwhm;
};

// Local maxima of rho inside the gap on a midpoint grid, with full widths
// at half maximum measured on the same grid.
std::vector<Peak> gap_peaks(const ModelParams& p, int n = 4000) {
  std::vector<double> E(n), r(n);
  for (int i = 0; i < n; ++i) {
    E[i] = -p.rest() + 2 * p.rest() * (i + 0.5) / n;
    r[i] = stark::stark_density(E[i], p).rho;
  }
  std::vector<Peak> out;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(r[i] > r[i - 1] && r[i] > r[i + 1])) continue;
    int a = i, b = i;
    while (a > 0 && r[a] > r[i] / 2) --a;
    while (b < n - 1 && r[b] > r[i] / 2) ++b;
    out.push_back({E[i], r[i], E[b] - E[a]});
  }
  std::sort(out.begin(), out.end(), [](const Peak& x, const Peak& y) { return x.rho > y.rho; });
  return out;
}

TEST(CentralBasis, ReproducesInitialData) {
  const ModelParams p = field(0.2);
  const cd E(0.3, 0);
  const auto b = stark::central_basis(E, p);
  EXPECT_FALSE(b.ill_conditioned);
  const auto s = stark::evaluate_basis(b, p, E, 0.0);
  EXPECT_LT(std::abs(s.u[0] - 1.0), 1e-10);
  EXPECT_LT(std::abs(s.u[1]), 1e-10);
  EXPECT_LT(std::abs(s.v[0]), 1e-10);
  EXPECT_LT(std::abs(s.v[1] - 1.0), 1e-10);
}

TEST(CentralBasis, WronskianIsOne) {
  const ModelParams p = field(0.2);
  for (cd E : {cd(0.3, 0), cd(-2, 0), cd(0.5, 0.2)}) {
    const auto b = stark::central_basis(E, p);
    for (double x : {-0.5, 0.5}) EXPECT_LT(std::abs(stark::evaluate_basis(b, p, E, x).wronskian() - 1.0), 1e-9) << E << " " << x;
  }
}

TEST(BoundaryConstants, NoWellsMeansNoJump) {
  const ModelParams p = field(0.2, 0.0);
  const cd E(0.3, 0);
  const auto k = stark::boundary_constants(E, p);
  const auto s = stark::evaluate_basis(stark::central_basis(E, p), p, E, p.R);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(std::abs(k.Gu[i] - s.u[i]), 1e-12);
    EXPECT_LT(std::abs(k.Gv[i] - s.v[i]), 1e-12);
  }
}

TEST(BoundaryConstants, JumpedPairsKeepUnitWronskian) {
  for (double F : {0.2, 1.0}) {
    for (cd E : {cd(0.3, 0), cd(2.5, 0), cd(-0.7, 0.1)}) {
      const auto k = stark::boundary_constants(E, field(F));
      EXPECT_LT(std::abs(k.Gu[0] * k.Gv[1] - k.Gu[1] * k.Gv[0] - 1.0), 1e-9) << F << " " << E;
      EXPECT_LT(std::abs(k.Hu[0] * k.Hv[1] - k.Hu[1] * k.Hv[0] - 1.0), 1e-9) << F << " " << E;
    }
  }
}

TEST(BoundaryConstants, WeakFieldMatchesZeroFieldClosedForms) {
  const ModelParams p = field(1e-4);
  ModelParams q = p;
  q.F = 0;
  for (cd E : {cd(0.3, 0), cd(2, 0), cd(-0.5, 0.01)}) {
    const auto k = stark::boundary_constants(E, p);
    const auto z = stark::zero_field_boundary(E, q);
    // Left constants from the free basis at -R and the inverse jump.
    const auto left = stark::trig_basis(E, -q.R, q);
    const auto Hu = stark::jump_matrix_left(q).apply(left.u);
    const auto Hv = stark::jump_matrix_left(q).apply(left.v);
    for (int i = 0; i < 2; ++i) {
      EXPECT_LT(std::abs(k.Gu[i] - z.Gu[i]), 1e-3) << E;
      EXPECT_LT(std::abs(k.Gv[i] - z.Gv[i]), 1e-3) << E;
      EXPECT_LT(std::abs(k.Hu[i] - Hu[i]), 1e-3) << E;
      EXPECT_LT(std::abs(k.Hv[i] - Hv[i]), 1e-3) << E;
    }
  }
}

TEST(JumpConditions, MirrorSymmetry) {
  // Reflecting x -> -x with psi2 -> -psi2 maps the left jump onto the right
  // one: sigma_z Lambda_left sigma_z = Lambda_right. Together with F -> -F
  // this is the parity of the double well in a field.
  std::mt19937_64 gen(53);
  std::uniform_real_distribution<double> ug(0, 50);
  for (int i = 0; i < 200; ++i) {
    const ModelParams p = field(0.2, ug(gen));
    const auto l = stark::jump_matrix_left(p), r = stark::jump_matrix_right(p);
    EXPECT_NEAR(l.d, r.d, 1e-14);
    EXPECT_NEAR(-l.gm, r.gm, 1e-14);
    EXPECT_NEAR(-l.b, r.b, 1e-14);
    EXPECT_NEAR(l.a, r.a, 1e-14);
  }
}

TEST(MFunctions, SelectRecessiveSolutions) {
  const ModelParams p = field(0.2);
  for (cd E : {cd(0.3, 0.1), cd(-2, 0.05), cd(1.5, 0)}) {
    const auto m = stark::m_functions(E, p);
    const auto k = stark::boundary_constants(E, p);
    const auto qr = stark::pcf_quad(p, E, p.R);
    const auto ql = stark::pcf_quad(p, E, -p.R);
    // S_j / U_j = (1 + t_j, -i (1 - t_j)).
    const cd t1 = (qr.u1_tilde / qr.u1).value(), t2 = (ql.u2_tilde / ql.u2).value();
    const stark::Spinor<double> s1{1.0 + t1, cd(0, -1) * (1.0 - t1)};
    const stark::Spinor<double> s2{1.0 + t2, cd(0, -1) * (1.0 - t2)};
    const stark::Spinor<double> right{k.Gu[0] + m.m_plus * k.Gv[0], k.Gu[1] + m.m_plus * k.Gv[1]};
    const stark::Spinor<double> left{k.Hu[0] + m.m_minus * k.Hv[0], k.Hu[1] + m.m_minus * k.Hv[1]};
    auto w = [](const stark::Spinor<double>& a, const stark::Spinor<double>& b) { return a[0] * b[1] - a[1] * b[0]; };
    auto norm = [](const stark::Spinor<double>& a) { return std::abs(a[0]) + std::abs(a[1]); };
    // The component along the other solution is W(s_j, psi) / W(s1, s2) = 0.
    EXPECT_LT(std::abs(w(s1, right)) / (norm(s1) * norm(right)), 1e-8) << E;
    EXPECT_LT(std::abs(w(s2, left)) / (norm(s2) * norm(left)), 1e-8) << E;
  }
}

TEST(MFunctions, PairsDecayTowardsTheirSide) {
  // For Im E > 0 the first pair decays as x -> +infinity and the second as
  // x -> -infinity.
  const ModelParams p = field(0.2);
  for (cd E : {cd(0.3, 0.1), cd(-1, 0.3)}) {
    const auto near = stark::pcf_quad(p, E, 10.0), far = stark::pcf_quad(p, E, 20.0);
    EXPECT_LT(far.u1.log_modulus, near.u1.log_modulus - 1) << E;
    const auto lnear = stark::pcf_quad(p, E, -10.0), lfar = stark::pcf_quad(p, E, -20.0);
    EXPECT_LT(lfar.u2.log_modulus, lnear.u2.log_modulus - 1) << E;
  }
}

TEST(MFunctions, LowerHalfPlaneIsTheAnalyticContinuation) {
  // The formulas continue analytically through the real axis, so below it
  // they describe the resonance sheet rather than the reflected values.
  const ModelParams p = field(0.2);
  const cd E0(0.3, 0);
  for (double eta : {1e-3, 1e-5, 1e-7}) {
    const cd up = stark::m_functions(E0 + cd(0, eta), p).m_plus;
    const cd down = stark::m_functions(E0 - cd(0, eta), p).m_plus;
    EXPECT_LT(std::abs(up - down), 10 * eta);
  }
  const cd E(0.3, 0.1);
  const cd a = stark::m_functions(E, p).m_plus, b = stark::m_functions(std::conj(E), p).m_plus;
  EXPECT_GT(std::abs(b - std::conj(a)), 1e-3);
}

TEST(MFunctionsProperty, StableUnderSmallImaginaryShift) {
  const ModelParams p = field(0.2);
  const double eta = 1e-8, h = 1e-6;
  for (int i = 0; i < 400; ++i) {
    const double E = -8 + 16.0 * (i + 0.5) / 400;
    const cd m0 = stark::m_functions(cd(E, 0), p).m_plus;
    const cd m1 = stark::m_functions(cd(E, eta), p).m_plus;
    const cd dm = (stark::m_functions(cd(E + h, 0), p).m_plus - stark::m_functions(cd(E - h, 0), p).m_plus) / (2 * h);
    // The change is the smooth analytic variation i eta m'(E).
    EXPECT_LT(std::abs(m1 - m0 - cd(0, eta) * dm), 1e-2 * std::abs(m1 - m0) + 1e-12 * std::abs(m0)) << E;
    if (std::abs(m0) > 0.1 && std::abs(m0) < 10) {
      EXPECT_LT(std::abs(m1 - m0) / std::abs(m0), 1e-5) << E;
    }
  }
}

TEST(StarkDensity, NonNegativeOnWideGrid) {
  for (double F : {0.2, 0.5, 1.0, 2.0}) {
    for (double g : {0.2, 3.0, 10.0}) {
      for (int i = 0; i < 400; ++i) {
        const double E = -8 + 16.0 * (i + 0.5) / 400;
        const auto s = stark::stark_density(E, field(F, g));
        EXPECT_FALSE(s.singular) << F << " " << g << " " << E;
        EXPECT_GE(s.rho, 0.0) << F << " " << g << " " << E;
      }
    }
  }
}

TEST(StarkDensity, NonNegativeAtWeakField) {
  // Here the imaginary parts are exponentially small; the direct formula
  // returns rounding noise of either sign while the current form does not.
  const ModelParams p = field(0.01);
  int direct_negative = 0;
  for (int i = 0; i < 400; ++i) {
    const double E = -8 + 16.0 * (i + 0.5) / 400;
    EXPECT_GE(stark::stark_density(E, p).rho, 0.0) << E;
    direct_negative += stark::stark_density_direct(E, p) < 0;
  }
  EXPECT_GT(direct_negative, 0);
}

TEST(StarkDensity, AgreesWithDirectFormulaWhereWellConditioned) {
  for (double F : {0.2, 0.5, 2.0}) {
    for (int i = 0; i < 200; ++i) {
      const double E = -8 + 16.0 * (i + 0.5) / 200;
      const double direct = stark::stark_density_direct(E, field(F));
      if (std::abs(direct) < 1e-6) continue;
      EXPECT_NEAR(stark::stark_density(E, field(F)).rho, direct, 1e-10 * std::abs(direct)) << F << " " << E;
    }
  }
}

TEST(StarkDensity, StableUnderSmallImaginaryShift) {
  // rho from the boundary values against Im[(m+ m- + 1)/(m+ - m-)]/pi at E + 1e-8 i.
  const ModelParams p = field(0.2);
  for (int i = 0; i < 200; ++i) {
    const double E = -8 + 16.0 * (i + 0.5) / 200;
    const auto m = stark::m_functions(cd(E, 1e-8), p);
    const double shifted = ((m.m_plus * m.m_minus + 1.0) / (m.m_plus - m.m_minus)).imag() / std::numbers::pi;
    const double rho = stark::stark_density(E, p).rho;
    EXPECT_LT(std::abs(shifted - rho), 1e-5 * std::max(1.0, rho)) << E;
  }
}

TEST(StarkDensity, GapPeaksShiftInOppositeDirections) {
  const ModelParams p = field(0.2);
  ModelParams q = p;
  q.F = 0;
  const auto bound = stark::bound_states(q);
  ASSERT_EQ(bound.count(), 2);
  auto peaks = gap_peaks(p);
  ASSERT_GE(peaks.size(), 2u);
  const double a = std::min(peaks[0].E, peaks[1].E), b = std::max(peaks[0].E, peaks[1].E);
  // Ground peak moves down, excited peak moves up.
  EXPECT_LT(a, *bound.ground);
  EXPECT_GT(b, *bound.excited);
  EXPECT_LT(std::abs(a - *bound.ground), 0.2);
  EXPECT_LT(std::abs(b - *bound.excited), 0.2);
}

TEST(StarkDensity, GroundPeakWidensWithField) {
  auto ground = [](double F) {
    auto peaks = gap_peaks(field(F));
    // The ground peak is the lower of the two dominant ones.
    return peaks[0].E < peaks[1].E ? peaks[0] : peaks[1];
  };
  EXPECT_GT(ground(0.5).fwhm, ground(0.2).fwhm);
}

TEST(StarkDensity, WeakFieldPeaksSitAtBoundStates) {
  // At F = 1e-3 the widths are far below double precision, so the peaks
  // are located as minima of the density denominator on the real axis.
  const ModelParams p = field(1e-3);
  ModelParams q = p;
  q.F = 0;
  const auto bound = stark::bound_states(q);
  std::vector<double> shifts;
  for (double E0 : {*bound.ground, *bound.excited}) {
    double lo = E0 - 5e-3, hi = E0 + 5e-3;
    auto f = [&](double E) { return std::abs(stark::pole_denominator(cd(E, 0), p)); };
    for (int it = 0; it < 70; ++it) {
      const double m1 = lo + (hi - lo) * 0.381966, m2 = hi - (hi - lo) * 0.381966;
      if (f(m1) < f(m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    const double peak = (lo + hi) / 2;
    EXPECT_LT(std::abs(peak - E0), 5e-3);
    EXPECT_LT(f(peak), 1e-3 * f(E0 + 5e-3));
    shifts.push_back(peak - E0);
  }
  EXPECT_LT(shifts[0], 0);
  EXPECT_GT(shifts[1], 0);
}

TEST(StarkDensity, RequiresPositiveField) {
  EXPECT_THROW(stark::stark_density(0.0, field(0)), std::invalid_argument);
}

}  // namespace
