#include "dopasym/errors.hpp"
#include "dopasym/orthopoly.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace dopasym;

namespace {

OrthoSystem build(const FamilySpec& spec, int N, int kmax, int bits = 256) {
  return stieltjes_recurrence(make_weights(spec, uniform_nodes(N), bits), kmax);
}

// Orthonormality recomputed from recurrence evaluations rather than Lanczos vectors.
double gram_residual_from_evaluation(const OrthoSystem& sys) {
  PrecisionScope s(sys.precision_bits);
  const int N = sys.N();
  std::vector<std::vector<Real>> P(static_cast<std::size_t>(sys.kmax + 1), std::vector<Real>(N));
  for (int n = 0; n < N; ++n) {
    Real x = sys.weights.nodes().node_hp(n);
    for (int k = 0; k <= sys.kmax; ++k) P[k][n] = monic_value(sys, k, x) * sys.gamma[k];
  }
  Real worst = 0;
  for (int j = 0; j <= sys.kmax; ++j)
    for (int k = j; k <= sys.kmax; ++k) {
      Real acc = 0;
      for (int n = 0; n < N; ++n) acc += P[j][n] * P[k][n] * exp(sys.weights.log_weights()[n]);
      if (j == k) acc -= 1;
      if (abs(acc) > worst) worst = abs(acc);
    }
  return static_cast<double>(worst);
}

}  // namespace

TEST(Stieltjes, FirstMomentAndGamma0) {
  auto sys = build(FamilySpec::hahn_scaled(3, 7, 15), 15, 3);
  PrecisionScope s(256);
  Real S = 0, M = 0;
  for (int n = 0; n < 15; ++n) {
    Real w = exp(sys.weights.log_weights()[n]);
    S += w;
    M += w * sys.weights.nodes().node_hp(n);
  }
  EXPECT_LT(abs(sys.gamma[0] - 1 / sqrt(S)) / sys.gamma[0], Real(1e-60));
  EXPECT_LT(abs(sys.a[0] - M / S), Real(1e-60));
}

TEST(Stieltjes, SymmetricKrawtchoukDiagonalIsHalf) {
  auto sys = build(FamilySpec::krawtchouk(0.5, 0.5), 40, 39);
  for (int k = 0; k <= 39; ++k) EXPECT_LT(abs(sys.a[k] - Real(0.5)), Real(1e-40));
}

TEST(Stieltjes, OrthonormalityIndependentCheck) {
  for (auto spec : {FamilySpec::krawtchouk(0.3, 0.7), FamilySpec::hahn_scaled(3, 7, 30),
                    FamilySpec::assoc_hahn_scaled(3, 7, 30)}) {
    auto sys = build(spec, 30, 29);
    EXPECT_LT(static_cast<double>(sys.residual), 1e-32);
    EXPECT_LT(gram_residual_from_evaluation(sys), 1e-20) << family_name(spec.kind);
  }
}

TEST(Stieltjes, GammaRatioIsOffDiagonal) {
  auto sys = build(FamilySpec::hahn_scaled(1, 2, 25), 25, 24);
  PrecisionScope s(256);
  for (int k = 0; k < 24; ++k) {
    EXPECT_GT(sys.b[k], 0);
    EXPECT_LT(abs(sys.b[k] - sys.gamma[k] / sys.gamma[k + 1]) / sys.b[k], Real(1e-50));
  }
}

TEST(Stieltjes, RejectsDegreePastLastNode) {
  auto w = make_weights(FamilySpec::krawtchouk(0.5, 0.5), uniform_nodes(10), 128);
  EXPECT_THROW(stieltjes_recurrence(w, 10), ValidationError);
}

TEST(Stieltjes, EscalatesPrecisionWhenMantissaTooShort) {
  // Strongly skewed weights lose orthogonality at 64 bits.
  auto w = make_weights(FamilySpec::hahn_scaled(3, 7, 120), uniform_nodes(120), 64);
  auto sys = stieltjes_recurrence(w, 119);
  EXPECT_GT(sys.precision_bits, 64);
  StieltjesOptions strict;
  strict.escalate = false;
  try {
    stieltjes_recurrence(w, 119, strict);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), "PrecisionExhausted");
  }
}

TEST(Evaluate, LowDegrees) {
  auto sys = build(FamilySpec::hahn_scaled(1, 1, 12), 12, 11);
  auto v0 = evaluate(sys, 0, std::complex<double>(0.3, 0.1));
  EXPECT_EQ(v0.monic.re, 1);
  EXPECT_EQ(v0.orthonormal.re, sys.gamma[0]);
  PrecisionScope s(256);
  auto v1 = evaluate(sys, 1, ComplexHP(sys.a[0], Real(0)));
  EXPECT_EQ(v1.monic.re, 0);
  EXPECT_EQ(v1.monic.im, 0);
}

TEST(Zeros, BasicProperties) {
  auto sys = build(FamilySpec::krawtchouk(0.5, 0.5), 40, 39);
  auto z1 = zeros(sys, 1);
  ASSERT_EQ(z1.size(), 1u);
  EXPECT_LT(abs(z1[0] - sys.a[0]), Real(1e-60));
  for (int k : {5, 20, 39}) {
    auto z = zeros(sys, k);
    ASSERT_EQ(static_cast<int>(z.size()), k);
    for (int i = 0; i < k; ++i) EXPECT_LT(abs(z[i] + z[k - 1 - i] - 1), Real(1e-50));
    EXPECT_TRUE(zeros_confined(z, sys.weights.nodes()));
  }
}

TEST(Zeros, InterlacingAndConfinementHahn) {
  auto sys = build(FamilySpec::hahn_scaled(3, 7, 40), 40, 39);
  auto prev = zeros(sys, 10);
  auto next = zeros(sys, 11);
  for (int i = 0; i < 10; ++i) {
    EXPECT_LT(next[i], prev[i]);
    EXPECT_GT(next[i + 1], prev[i]);
  }
  for (int k = 1; k <= 39; k += 6) EXPECT_TRUE(zeros_confined(zeros(sys, k), sys.weights.nodes()));
  // The monic polynomial vanishes at the returned zeros to working precision.
  PrecisionScope s(256);
  for (const auto& z : next) EXPECT_LT(abs(monic_value(sys, 11, z)), Real(1e-50));
}

TEST(Zeros, ConfinementPredicateDetectsViolations) {
  auto ns = uniform_nodes(4);
  PrecisionScope s(128);
  std::vector<Real> two_in_one = {Real(0.2), Real(0.3)};
  EXPECT_FALSE(zeros_confined(two_in_one, ns));
  std::vector<Real> outside = {Real(0.05)};
  EXPECT_FALSE(zeros_confined(outside, ns));
  std::vector<Real> good = {Real(0.2), Real(0.5), Real(0.8)};
  EXPECT_TRUE(zeros_confined(good, ns));
}

TEST(Duality, NormalizationIdentity) {
  const int N = 12;
  auto w = make_weights(FamilySpec::hahn_scaled(3, 7, N), uniform_nodes(N), 256);
  auto sys = stieltjes_recurrence(w, N - 1);
  auto dual = stieltjes_recurrence(dual_weights(w), N - 1);
  auto r5 = check_duality(sys, dual, 5);
  EXPECT_LT(r5.normalization_residual, 1e-20);
  EXPECT_LT(r5.node_residual, 1e-20);
}

TEST(Duality, AllDegreesChebyshevHahn) {
  const int N = 10;
  auto w = make_weights(FamilySpec::hahn_scaled(1, 1, N), uniform_nodes(N), 256);
  auto sys = stieltjes_recurrence(w, N - 1);
  auto dual = stieltjes_recurrence(dual_weights(w), N - 1);
  auto r = check_duality(sys, dual);
  EXPECT_EQ(r.degrees_checked, N);
  EXPECT_LT(r.node_residual, 1e-20);
  EXPECT_LT(r.normalization_residual, 1e-20);
  EXPECT_THROW(check_duality(sys, dual, 0), ValidationError);
}

TEST(Duality, SymmetricKrawtchoukIsSelfDual) {
  const int N = 16;
  auto w = make_weights(FamilySpec::krawtchouk(0.5, 0.5), uniform_nodes(N), 256);
  auto sys = stieltjes_recurrence(w, N - 1);
  auto dual = stieltjes_recurrence(dual_weights(w), N - 1);
  PrecisionScope s(256);
  for (int k = 0; k < N; ++k) EXPECT_LT(abs(sys.a[k] - dual.a[k]), Real(1e-20));
  for (int k = 0; k < N - 1; ++k) EXPECT_LT(abs(sys.b[k] - dual.b[k]), Real(1e-20));
}

TEST(Export, CsvHasThirtyDigits) {
  auto sys = build(FamilySpec::krawtchouk(0.5, 0.5), 6, 5);
  std::ostringstream os;
  write_ortho_csv(sys, os);
  std::string s = os.str();
  EXPECT_EQ(s.substr(0, 20), "k,a_k,b_k,gamma_k\n0,");
  EXPECT_NE(s.find("0.5"), std::string::npos);
}
