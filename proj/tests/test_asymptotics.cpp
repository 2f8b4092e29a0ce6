#include "dopasym/asymptotics.hpp"
#include "dopasym/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace dopasym;

namespace {

struct Case {
  EquilibriumMeasure m;
  OrthoSystem sys;
  OuterModel model;
  int k;
};

Case hahn_case(double A, double B, double c, int N) {
  auto w = make_weights(FamilySpec::hahn_scaled(A, B, N), uniform_nodes(N), 256);
  const int k = static_cast<int>(c * N + 1e-9);
  auto m = hahn_equilibrium(A, B, c);
  OuterModel model(m, [e = w.eta_limit()](double) { return e; }, k - c * N, N);
  return {m, stieltjes_recurrence(w, k, {true, 4096, false}), model, k};
}

Case krawtchouk_case(double c, int N) {
  auto w = make_weights(FamilySpec::krawtchouk(0.5, 0.5), uniform_nodes(N), 256);
  const int k = static_cast<int>(c * N + 1e-9);
  auto m = krawtchouk_equilibrium(0.5, 0.5, c);
  OuterModel model(m, {}, k - c * N, N);
  return {m, stieltjes_recurrence(w, k, {true, 4096, false}), model, k};
}

}  // namespace

TEST(Classify, Examples) {
  auto m = hahn_equilibrium(0.2, 8, 0.45);
  EXPECT_EQ(classify_point(m, Complex(m.alpha(), 0), 100).region, Region::AiryEdge);
  const auto hard = classify_point(m, Complex(0.0, 0), 100);
  EXPECT_EQ(hard.region, Region::HardEdge);
  EXPECT_EQ(hard.edge, Edge::Left);
  EXPECT_EQ(classify_point(m, Complex(2.0, 0), 100).region, Region::Outer);
  EXPECT_EQ(classify_point(m, Complex(0.5, 0.3), 100).region, Region::Outer);
  EXPECT_EQ(classify_point(m, Complex(0.5, 0), 100).region, Region::Band);
  EXPECT_EQ(classify_point(m, Complex(0.1, 0), 100).region, Region::Saturated);
  EXPECT_EQ(classify_point(m, Complex(0.9, 0), 100).region, Region::Void);
  EXPECT_EQ(classify_point(m, Complex(m.beta() + 0.01, 0), 100).gap, GapType::Void);
}

TEST(Approx, RegionMismatch) {
  auto cs = krawtchouk_case(0.3, 40);
  EXPECT_THROW(approx_pi(cs.model, {Region::Band}, Complex(0.01, 0)), ValidationError);
  EXPECT_THROW(approx_pi(cs.model, {Region::Band}, Complex(0.5, 0.01)), ValidationError);
  EXPECT_THROW(approx_pi(cs.model, {Region::Saturated}, Complex(0.01, 0)), ValidationError);
  EXPECT_THROW(approx_pi(cs.model, {Region::HardEdge}, Complex(0.01, 0)), ValidationError);
  EXPECT_THROW(approx_pi(cs.model, {Region::Outer}, Complex(0.5, 0)), ValidationError);
  try {
    approx_pi(cs.model, {Region::Void}, Complex(0.5, 0));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.kind(), "RegionMismatch");
  }
}

TEST(Approx, OuterErrorHalvesOnDoubling) {
  double err[2];
  int i = 0;
  for (int N : {100, 200}) {
    auto cs = krawtchouk_case(0.3, N);
    const Complex z(2.0, 0.0);
    const auto ap = approx_pi(cs.model, {}, z);
    const Complex ex = exact_scaled(cs.sys, cs.k, z, ap.log_scale);
    err[i++] = std::abs(ex / ap.mantissa - 1.0);
  }
  EXPECT_GT(err[0] / err[1], 1.6);
  EXPECT_LT(err[0] / err[1], 2.5);
}

TEST(Approx, BandErrorTimesNStable) {
  // C in the C/N bound is measured as the sup of N * error over a grid inside the band.
  std::vector<double> c;
  for (int N : {50, 100, 200}) {
    auto cs = krawtchouk_case(0.3, N);
    const double al = cs.m.alpha(), w = cs.m.beta() - al;
    double sup = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const Complex x(al + w * (0.1 + 0.8 * i / 40.0), 0.0);
      const auto ap = approx_pi(cs.model, {Region::Band}, x);
      sup = std::max(sup, std::abs(exact_scaled(cs.sys, cs.k, x, ap.log_scale) - ap.mantissa) * N);
    }
    c.push_back(sup);
  }
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  EXPECT_LT(*hi, 5.0);
  EXPECT_LT(*hi / *lo, 2.0);
}

TEST(Approx, HardEdgeReducesToSaturatedFormula) {
  // The ratio of the two leading terms is Gamma(1/2 + z)/(sqrt(2 pi) z^z e^-z) = 1 - 1/(24 z) + ...
  double prev = 1.0;
  for (int N : {40, 80, 160, 320}) {
    auto m = hahn_equilibrium(0.2, 8, 0.45);
    const int k = static_cast<int>(0.45 * N);
    OuterModel model(m, {}, k - 0.45 * N, N);
    const double x = 0.1003;
    const auto hard = approx_pi(model, {Region::HardEdge, Edge::Left, GapType::Saturated}, Complex(x, 0));
    const auto sat = approx_pi(model, {Region::Saturated}, Complex(x, 0));
    const double zeta = N * x;
    const double dev = std::abs(hard.mantissa / sat.mantissa - 1.0);
    EXPECT_NEAR(dev, 1.0 / (24 * zeta), 0.1 / (24 * zeta));
    EXPECT_LT(dev, prev);
    prev = dev;
  }
}

TEST(Approx, RealOnTheRealAxis) {
  auto cs = hahn_case(0.2, 8, 0.45, 80);
  for (const auto& p : standard_test_points(cs.model)) {
    if (p.tag.region == Region::Outer && p.z.imag() != 0) continue;
    const auto ap = approx_pi(cs.model, p.tag, p.z);
    EXPECT_LT(std::abs(ap.mantissa.imag()), 1e-12 * std::max(1.0, std::abs(ap.mantissa))) << p.label;
  }
}

TEST(Approx, RegionsOverlapNearTheEdge) {
  // Just inside the band outside the Airy disc both formulas apply.
  std::vector<double> gap;
  for (int N : {40, 80, 160, 320}) {
    auto m = hahn_equilibrium(0.2, 8, 0.45);
    const int k = static_cast<int>(0.45 * N);
    OuterModel model(m, [](double) { return 0.5 * std::log(0.2 / 9.0); }, k - 0.45 * N, N);
    const double x = m.beta() - 0.06 * (m.beta() - m.alpha());
    const auto band = approx_pi(model, {Region::Band}, Complex(x, 0));
    const auto edge = approx_pi(model, {Region::AiryEdge, Edge::Right, GapType::Void}, Complex(x, 0));
    gap.push_back(std::abs(band.mantissa - edge.mantissa) / std::abs(band.mantissa));
  }
  EXPECT_LT(gap.back(), gap.front());
  EXPECT_LT(gap.back(), 0.05);
}

TEST(Approx, SweepCsv) {
  auto cs = krawtchouk_case(0.3, 30);
  const auto rows = regional_errors(cs.sys, cs.k, cs.model, standard_test_points(cs.model));
  std::ostringstream os;
  write_sweep_csv(rows, os);
  EXPECT_EQ(os.str().rfind("theorem,N,test_point,exact,approx,scaled_error\n", 0), 0u);
  EXPECT_GE(rows.size(), 8u);
}

TEST(BandZeros, SymmetricAndCounted) {
  auto cs = krawtchouk_case(0.3, 60);
  const auto z = predicted_band_zeros(cs.model);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(z[i] + z[z.size() - 1 - i], 1.0, 1e-9);
  const double w = cs.m.beta() - cs.m.alpha();
  const double frac = cs.m.mass(cs.m.alpha() + 0.02 * w, cs.m.beta() - 0.02 * w);
  EXPECT_LE(std::abs(double(z.size()) - cs.k * frac), 2.0);
}

TEST(BandZeros, CloseToExactZeros) {
  auto cs = hahn_case(1, 1, 0.4, 40);
  const auto model_z = predicted_band_zeros(cs.model);
  const auto exact = zeros_double(cs.sys, cs.k);
  double worst = 0;
  for (double z : model_z) {
    auto it = std::lower_bound(exact.begin(), exact.end(), z);
    double d = 1.0;
    if (it != exact.end()) d = std::min(d, *it - z);
    if (it != exact.begin()) d = std::min(d, z - *(it - 1));
    worst = std::max(worst, d);
  }
  EXPECT_LT(worst * 40 * 40, 5.0);
}

TEST(SaturatedPairing, OrderingAndEmptyCase) {
  const int N = 30;
  auto w = make_weights(FamilySpec::hahn_scaled(1, 5, N), uniform_nodes(N), 256);
  const int k = 21;
  auto sys = stieltjes_recurrence(w, k, {true, 4096, false});
  const auto rep = saturated_zero_pairing(sys, hahn_equilibrium(1, 5, 0.7), k);
  EXPECT_FALSE(rep.pairs.empty());
  EXPECT_TRUE(rep.ordering_ok);
  EXPECT_GE(rep.precision_bits, 8 * N);
  EXPECT_LT(rep.max_distance, 1e-3);
  auto none = saturated_zero_pairing(sys, hahn_equilibrium(3, 7, 0.2), 6);
  EXPECT_TRUE(none.pairs.empty());
}

TEST(Recurrence, SymmetricKrawtchoukCentre) {
  auto cs = krawtchouk_case(0.3, 40);
  // Endpoints come from a Newton solve, so the centre is exact up to rounding.
  EXPECT_NEAR(predicted_recurrence(cs.model).a_k, 0.5, 1e-14);
  EXPECT_NEAR(static_cast<double>(cs.sys.a[static_cast<std::size_t>(cs.k)]), 0.5, 1e-30);
}

TEST(Recurrence, HahnCoefficientsWithinCOverN) {
  std::vector<double> ca, cg;
  for (int N : {40, 80}) {
    auto cs = hahn_case(3, 7, 0.5, N);
    const auto pr = predicted_recurrence(cs.model);
    const auto k = static_cast<std::size_t>(cs.k);
    ca.push_back(std::abs(static_cast<double>(cs.sys.a[k]) - pr.a_k) * N);
    const double lg = 2 * static_cast<double>(log(cs.sys.gamma[k]));
    cg.push_back(std::abs(lg - pr.log_gamma2_k) * N);
    EXPECT_NEAR(static_cast<double>(cs.sys.b[k - 1]), pr.b_km1, 2.0 / N);
  }
  EXPECT_NEAR(ca[1] / ca[0], 1.0, 0.5);
  EXPECT_LT(cg[1], 2 * cg[0] + 1.0);
}
