#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stark/pcf.hpp"

namespace {

using cd = std::complex<double>;
using stark::PcfResult;
using stark::PcfValue;
constexpr double pi = std::numbers::pi;

// Distance between two scaled values measured on log U, with the phase
// compared modulo 2 pi. For small differences this is the relative error.
double log_distance(const PcfValue& x, cd log_ref) {
  const double dm = x.log_modulus - log_ref.real();
  const double dp = std::remainder(x.phase - log_ref.imag(), 2 * pi);
  return std::hypot(dm, dp);
}

double log_distance(const PcfValue& x, const PcfValue& y) { return log_distance(x, y.log()); }

TEST(PcfClosedForm, GaussianOrderMinusHalf) {
  // U(-1/2, z) = exp(-z^2/4).
  const PcfResult r = stark::pcf_evaluate(-0.5, 1.0);
  EXPECT_NEAR(r.value.value().real(), std::exp(-0.25), 1e-14);
  EXPECT_NEAR(r.value.value().imag(), 0, 1e-14);
  EXPECT_NEAR(r.derivative.value().real(), -0.5 * std::exp(-0.25), 1e-14);
  for (cd z : {cd(3, 1), cd(-2, 4), cd(0.5, -7), cd(-12, -3), cd(25, 2)}) {
    EXPECT_LT(log_distance(stark::pcf_u(-0.5, z), -z * z / 4.0), 1e-11) << z;
  }
}

TEST(PcfClosedForm, OrderMinusThreeHalves) {
  // U(-3/2, z) = z exp(-z^2/4).
  const PcfResult r = stark::pcf_evaluate(-1.5, 2.0);
  EXPECT_NEAR(r.value.value().real(), 2 * std::exp(-1.0), 1e-14);
  for (cd z : {cd(1, 1), cd(-3, 2), cd(6, -6)}) {
    EXPECT_LT(log_distance(stark::pcf_u(-1.5, z), std::log(z) - z * z / 4.0), 1e-11) << z;
  }
}

TEST(PcfClosedForm, OriginValue) {
  const PcfResult r = stark::pcf_evaluate(0.5, 0.0);
  EXPECT_EQ(r.route, stark::PcfRoute::Origin);
  EXPECT_NEAR(r.value.value().real(), std::sqrt(pi / 2), 1e-14);
}

TEST(PcfAsymptotic, RecessiveDecayOnRealAxis) {
  const PcfResult r = stark::pcf_asymptotic(-0.5, 20.0);
  EXPECT_NEAR(r.value.log_modulus, -100, 1e-12);
  EXPECT_NEAR(r.value.phase, 0, 1e-12);
  EXPECT_FALSE(r.accuracy_loss);
}

TEST(PcfAsymptotic, DominantTermOnImaginaryAxis) {
  // At z = 20i the expansion includes exp(+z^2/4)-type growth: |U| = e^{100}.
  const PcfResult r = stark::pcf_asymptotic(-0.5, cd(0, 20));
  EXPECT_NEAR(r.value.log_modulus, 100, 1e-12);
  EXPECT_TRUE(r.value.finite());
}

double switch_radius(cd a) { return 6 * std::max(1.0, std::sqrt(std::abs(a))); }

TEST(PcfAsymptotic, AgreesWithSeriesWithinErrorEstimates) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> ure(-1.5, 1.5), uim(-5, 5), uth(-pi, pi);
  for (int i = 0; i < 20; ++i) {
    const cd a(ure(gen), uim(gen));
    const cd z = std::polar(switch_radius(a), uth(gen));
    const PcfResult as = stark::pcf_asymptotic(a, z);
    const PcfResult se = stark::pcf_series(a, z);
    if (as.error > 0.1 || se.error > 0.1) continue;
    const double tol = 10 * (as.error + se.error) + 1e-12;
    EXPECT_LT(log_distance(as.value, se.value), tol) << "a=" << a << " z=" << z;
    EXPECT_LT(log_distance(as.derivative, se.derivative), tol) << "a=" << a << " z=" << z;
  }
}

TEST(PcfAsymptotic, AgreesWithSeriesWhereBothAreAccurate) {
  // Near arg z = 0 the double precision Maclaurin series cancels badly on
  // this circle, and near arg z = +-pi/4 the expansion meets its Stokes
  // smoothing; everywhere else both are accurate and must agree to 1e-8.
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> ure(-1.5, 1.5), uim(-5, 5);
  std::vector<cd> orders{cd(-0.5, 2.5)};
  for (int i = 0; i < 20; ++i) orders.emplace_back(ure(gen), uim(gen));
  for (const cd a : orders) {
    int compared = 0;
    for (int k = -180; k < 180; k += 5) {
      const cd z = std::polar(switch_radius(a), k * pi / 180);
      const PcfResult as = stark::pcf_asymptotic(a, z);
      const PcfResult se = stark::pcf_series(a, z);
      if (as.error > 1e-10 || se.error > 1e-10) continue;
      EXPECT_LT(log_distance(as.value, se.value), 1e-8) << "a=" << a << " z=" << z;
      EXPECT_LT(log_distance(as.derivative, se.derivative), 1e-8) << "a=" << a << " z=" << z;
      ++compared;
    }
    EXPECT_GE(compared, 5) << "a=" << a;
  }
}

TEST(PcfAsymptotic, StokesErrorEstimateIsHonest) {
  // Between the anti-Stokes line and the Stokes line the sector formula
  // overweights the subdominant exponential; the estimate must say so.
  const cd a(0.3, -2);
  const cd z = std::polar(10.0, 0.9);
  const PcfResult as = stark::pcf_asymptotic(a, z);
  const PcfResult ref = stark::pcf_evaluate(a, z);
  EXPECT_FALSE(ref.accuracy_loss);
  EXPECT_LE(log_distance(as.value, ref.value), 2 * as.error + 1e-13);
}

TEST(PcfEvaluate, ContinuousAcrossSwitchRadius) {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> ure(-1.5, 1.5), uim(-50, 50), uth(-pi, pi);
  for (int i = 0; i < 20; ++i) {
    const cd a(ure(gen), uim(gen));
    const cd dir = std::polar(1.0, uth(gen));
    const double r = switch_radius(a);
    const double dr = 1e-9 * r;
    const PcfResult in = stark::pcf_evaluate(a, dir * (r - dr));
    const PcfResult out = stark::pcf_evaluate(a, dir * (r + dr));
    ASSERT_FALSE(in.accuracy_loss || out.accuracy_loss) << a;
    // Predict the outer value from the inner one with the derivative.
    const cd ratio = (out.value / in.value).value();
    const cd predicted = 1.0 + (in.derivative / in.value).value() * dir * (2 * dr);
    EXPECT_LT(std::abs(ratio - predicted), 1e-8) << "a=" << a << " dir=" << dir;
  }
}

TEST(PcfSeries, FlagsCancellationFarFromOrigin) {
  const PcfResult r = stark::pcf_series(-0.5, 40.0);
  EXPECT_TRUE(r.accuracy_loss);
}

TEST(PcfRecurrence, HoldsOnRandomGrid) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> ure(-1.5, 1.5), uim(-50, 50), ur(0, 40), uth(-pi, pi);
  for (int i = 0; i < 60; ++i) {
    const cd a(ure(gen), uim(gen));
    const cd z = std::polar(ur(gen), uth(gen));
    if (stark::pcf_evaluate(a, z).accuracy_loss) continue;
    EXPECT_LT(stark::pcf_recurrence_check(a, z), 1e-8) << "a=" << a << " z=" << z;
  }
}

TEST(PcfRecurrence, HoldsOnFieldOrders) {
  // Orders -1/2 +- i m^2 c^3 / (2F) for F in {0.5, 0.05, 0.01} and the
  // arguments the field solution actually uses (arg = -pi/4 and 3 pi/4).
  for (double F : {0.5, 0.05, 0.01}) {
    const cd a(-0.5, 1.0 / (2 * F));
    const double scale = std::sqrt(2.0 / F);
    for (double w : {-8.0, -3.0, 0.0, 1.0, 4.0, 8.0}) {
      const cd z = std::polar(1.0, -pi / 4) * scale * w;
      EXPECT_LT(stark::pcf_recurrence_check(a, z), 1e-8) << "a=" << a << " z=" << z;
    }
  }
}

// Relative residual of U'' = (z^2/4 + a) U, with U'' from a central
// difference of the returned derivative.
double ode_residual(cd a, cd z) {
  const cd q = z * z / 4.0 + a;
  const double h = 1e-4 / std::sqrt(std::max(1.0, std::abs(q)));
  const PcfResult mid = stark::pcf_evaluate(a, z);
  const cd dp = (stark::pcf_evaluate(a, z + h).derivative / mid.value).value();
  const cd dm = (stark::pcf_evaluate(a, z - h).derivative / mid.value).value();
  const cd second = (dp - dm) / (2 * h);
  return std::abs(second - q) / std::max(1.0, std::abs(q));
}

TEST(PcfOde, FiniteDifferenceResidualIsSmall) {
  for (cd a : {cd(-0.5, 0), cd(0.3, 2), cd(-0.5, 10), cd(-0.5, -25), cd(1.2, 40)}) {
    for (cd z : {cd(0.7, 0.2), cd(4, -4), cd(-5, 3), cd(12, 0), cd(-9, -9), cd(0, 15)}) {
      if (stark::pcf_evaluate(a, z).accuracy_loss) continue;
      EXPECT_LT(ode_residual(a, z), 1e-6) << "a=" << a << " z=" << z;
    }
  }
}

TEST(PcfRoutes, ErrorEstimatesAreReportedAndSmall) {
  std::set<stark::PcfRoute> seen;
  for (cd a : {cd(-0.5, 0), cd(-0.5, 50), cd(0.5, -50), cd(-0.5, 250)}) {
    for (double r : {0.0, 2.0, 9.0, 30.0, 60.0}) {
      for (double th : {-3 * pi / 4, -pi / 4, pi / 4, 3 * pi / 4}) {
        const PcfResult res = stark::pcf_evaluate(a, std::polar(r, th));
        seen.insert(res.route);
        EXPECT_TRUE(res.value.finite()) << a << " r=" << r << " th=" << th;
        EXPECT_FALSE(res.accuracy_loss) << a << " r=" << r << " th=" << th << " route=" << stark::to_string(res.route);
      }
    }
  }
  EXPECT_GE(seen.size(), 4u);
}

struct OracleRow {
  std::string kind;
  cd a, z, log_u, log_du;
};

std::vector<OracleRow> load_oracle() {
  std::ifstream in(std::string(STARK_TEST_DATA) + "/pcf_oracle.csv");
  std::vector<OracleRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) continue;
    auto num = [&](int i) { return std::stod(cells[i]); };
    rows.push_back({cells[0], {num(1), num(2)}, {num(3), num(4)}, {num(5), num(6)}, {num(7), num(8)}});
  }
  return rows;
}

TEST(PcfOracle, MatchesHighPrecisionReference) {
  const auto rows = load_oracle();
  ASSERT_GE(rows.size(), 200u);
  int checked = 0;
  for (const auto& row : rows) {
    const PcfResult r = stark::pcf_evaluate(row.a, row.z);
    EXPECT_FALSE(r.accuracy_loss) << row.kind << " a=" << row.a << " z=" << row.z;
    EXPECT_LT(log_distance(r.value, row.log_u), 1e-7) << row.kind << " a=" << row.a << " z=" << row.z
                                                      << " route=" << stark::to_string(r.route);
    EXPECT_LT(log_distance(r.derivative, row.log_du), 1e-7) << row.kind << " a=" << row.a << " z=" << row.z
                                                            << " route=" << stark::to_string(r.route);
    ++checked;
  }
  EXPECT_EQ(checked, static_cast<int>(rows.size()));
}

}  // namespace

namespace {

TEST(PcfEvaluate, NonFiniteInputIsFlagged) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto [a, z] : {std::pair{std::complex<double>(0.3, 0), std::complex<double>(nan, 0)},
                      std::pair{std::complex<double>(nan, 0), std::complex<double>(1, 1)},
                      std::pair{std::complex<double>(0.3, 0), std::complex<double>(INFINITY, 0)}}) {
    const auto r = stark::pcf_evaluate(a, z);
    EXPECT_TRUE(r.accuracy_loss);
    EXPECT_FALSE(r.value.finite());
  }
}

}  // namespace
