#include "dopasym/errors.hpp"
#include "dopasym/kernels.hpp"
#include "dopasym/special.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/airy.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

using namespace dopasym;

namespace {

OrthoSystem system_for(const FamilySpec& spec, int N, int kmax) {
  return stieltjes_recurrence(make_weights(spec, uniform_nodes(N), 256), kmax);
}

// Exhaustive ensemble: P(X) proportional to prod w(x) prod (x_i - x_j)^2 over k-subsets.
struct BruteForce {
  std::vector<double> prob;  // indexed by bitmask
  int N, k;

  BruteForce(const WeightFamily& w, int k_) : prob(std::size_t{1} << w.N(), 0.0), N(w.N()), k(k_) {
    PrecisionScope scope(w.precision_bits());
    const auto& x = w.nodes().nodes;
    double Z = 0;
    for (unsigned mask = 0; mask < prob.size(); ++mask) {
      if (std::popcount(mask) != k) continue;
      double p = 1;
      for (int i = 0; i < N; ++i) {
        if (!(mask >> i & 1u)) continue;
        p *= static_cast<double>(exp(w.log_weights()[static_cast<std::size_t>(i)]));
        for (int j = 0; j < i; ++j)
          if (mask >> j & 1u) p *= (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]) *
                                    (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
      }
      prob[mask] = p;
      Z += p;
    }
    for (double& p : prob) p /= Z;
  }

  double containing(unsigned S) const {
    double s = 0;
    for (unsigned m = 0; m < prob.size(); ++m)
      if ((m & S) == S) s += prob[m];
    return s;
  }
  double avoiding(unsigned S) const {
    double s = 0;
    for (unsigned m = 0; m < prob.size(); ++m)
      if ((m & S) == 0) s += prob[m];
    return s;
  }
  double count_in(unsigned B, int c) const {
    double s = 0;
    for (unsigned m = 0; m < prob.size(); ++m)
      if (std::popcount(m & B) == c) s += prob[m];
    return s;
  }
};

std::vector<int> bits_of(unsigned S, int N) {
  std::vector<int> v;
  for (int i = 0; i < N; ++i)
    if (S >> i & 1u) v.push_back(i);
  return v;
}

}  // namespace

TEST(Kernel, ProjectionInvariants) {
  auto sys = system_for(FamilySpec::hahn_scaled(1, 1, 30), 30, 12);
  const auto K = cd_kernel(sys, 12);
  const auto r = check_kernel(K);
  EXPECT_LT(r.trace_error, 1e-10);
  EXPECT_LT(r.projection, 1e-8);
  EXPECT_LT(r.symmetry, 1e-15);
  EXPECT_GE(r.diagonal_min, -1e-10);
  EXPECT_LE(r.diagonal_max, 1 + 1e-10);
  const auto Kb = basis_kernel(sys, 12);
  EXPECT_LT((K.K - Kb.K).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kernel, DiagonalFollowsEquilibriumDensity) {
  auto m = hahn_equilibrium(3, 7, 0.5);
  for (int N : {60, 120}) {
    auto sys = system_for(FamilySpec::hahn_scaled(3, 7, N), N, N / 2);
    const auto K = cd_kernel(sys, N / 2);
    const int i = N / 2;
    EXPECT_LT(std::abs(K(i, i) - local_density(m, K.nodes[static_cast<std::size_t>(i)])), 3.0 / N);
  }
}

TEST(Kernel, CorrelationBasics) {
  auto sys = system_for(FamilySpec::krawtchouk(0.4, 0.6), 12, 5);
  const auto K = cd_kernel(sys, 5);
  EXPECT_DOUBLE_EQ(correlation(K, {3}), K(3, 3));
  EXPECT_EQ(correlation(K, {2, 7, 2}), 0.0);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> all(12);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(1 + t % 5);
    EXPECT_GE(correlation(K, all), -1e-12);
  }
}

TEST(Kernel, BruteForceEnsembleN8) {
  const int N = 8, k = 3;
  auto w = make_weights(FamilySpec::hahn(2.0, 3.0), uniform_nodes(N), 256);
  const BruteForce bf(w, k);
  const auto K = cd_kernel(stieltjes_recurrence(w, k), k);
  for (unsigned S = 1; S < (1u << N); ++S) {
    if (std::popcount(S) > 4) continue;
    EXPECT_NEAR(correlation(K, bits_of(S, N)), bf.containing(S), 1e-10);
  }
  for (unsigned B : {0b00110110u, 0b11110000u, 0b10000001u, 0b11111111u}) {
    const auto dist = occupation_distribution(K, bits_of(B, N));
    double total = 0;
    for (std::size_t m = 0; m < dist.size(); ++m) {
      EXPECT_NEAR(dist[m], bf.count_in(B, static_cast<int>(m)), 1e-10);
      total += dist[m];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  // No particles in S is the hole correlation on S.
  const auto H = hole_kernel(K);
  for (unsigned S : {0b1u, 0b101u, 0b11000100u, 0b01011010u}) {
    EXPECT_NEAR(correlation(H, bits_of(S, N)), bf.avoiding(S), 1e-10);
  }
}

TEST(Kernel, OccupationAllNodes) {
  auto sys = system_for(FamilySpec::krawtchouk(0.5, 0.5), 14, 6);
  const auto K = cd_kernel(sys, 6);
  std::vector<int> all(14);
  std::iota(all.begin(), all.end(), 0);
  const auto dist = occupation_distribution(K, all);
  for (std::size_t m = 0; m < dist.size(); ++m) EXPECT_NEAR(dist[m], m == 6 ? 1.0 : 0.0, 1e-10);
  EXPECT_THROW(occupation_prob(K, {1, 2}, 3), ValidationError);
}

TEST(Kernel, OccupationFromDeterminantExpansion) {
  // (1/m!)(-d/dt)^m det(1 - t K_B) at t = 1 expands as sum over S subset of B.
  auto sys = system_for(FamilySpec::hahn_scaled(2, 3, 10), 10, 4);
  const auto K = cd_kernel(sys, 4);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 5; ++t) {
    std::vector<int> all(10);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(5);
    const auto dist = occupation_distribution(K, all);
    for (int m = 0; m <= 5; ++m) {
      double s = 0;
      for (unsigned S = 0; S < 32u; ++S) {
        const int n = std::popcount(S);
        if (n < m) continue;
        std::vector<int> sub;
        for (int i = 0; i < 5; ++i)
          if (S >> i & 1u) sub.push_back(all[static_cast<std::size_t>(i)]);
        double binom = 1;
        for (int j = 0; j < m; ++j) binom = binom * (n - j) / (j + 1);
        s += ((n - m) % 2 ? -1.0 : 1.0) * binom * correlation(K, sub);
      }
      EXPECT_NEAR(dist[static_cast<std::size_t>(m)], s, 1e-10);
    }
  }
}

TEST(Kernel, HoleKernelMatchesDualSystem) {
  const int N = 20, k = 8;
  auto w = make_weights(FamilySpec::hahn_scaled(1, 1, N), uniform_nodes(N), 256);
  const auto K = cd_kernel(stieltjes_recurrence(w, k), k);
  const auto H = hole_kernel(K);
  EXPECT_NEAR(H.K.trace(), N - k, 1e-10);
  const auto D = cd_kernel(stieltjes_recurrence(dual_weights(w), N - k), N - k);
  EXPECT_LT((H.K - D.K).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Kernel, ParticleHoleDeterminantIdentity) {
  auto sys = system_for(FamilySpec::krawtchouk(0.3, 0.7), 12, 5);
  const auto K = cd_kernel(sys, 5);
  const auto H = hole_kernel(K);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<int> B(12);
    std::iota(B.begin(), B.end(), 0);
    std::shuffle(B.begin(), B.end(), rng);
    B.resize(1 + t % 6);
    Eigen::MatrixXd Hb(B.size(), B.size());
    for (std::size_t i = 0; i < B.size(); ++i)
      for (std::size_t j = 0; j < B.size(); ++j) Hb(i, j) = (i == j ? 1.0 : 0.0) - H(B[i], B[j]);
    EXPECT_NEAR(correlation(K, B), Hb.determinant(), 1e-12);
  }
}

TEST(Kernel, SineKernelUniversality) {
  auto m = hahn_equilibrium(3, 7, 0.5);
  const double x = 0.5 * (m.alpha() + m.beta());
  std::vector<double> scaled;
  for (int N : {50, 100, 200}) {
    auto sys = system_for(FamilySpec::hahn_scaled(3, 7, N), N, N / 2);
    const auto K = cd_kernel(sys, N / 2);
    scaled.push_back(sine_compare(K, m, x, 3) * N);
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  EXPECT_LT(*hi / *lo, 1.3 * 1.3);
  const double q = local_density(m, x);
  EXPECT_GT(q, 0.0);
  EXPECT_LT(q, 1.0);
  EXPECT_EQ(sine_kernel(q, 0), q);
}

TEST(Kernel, AiryKernelNearVoidEdge) {
  // c N is an integer for every N, so the comparison carries no kappa drift.
  auto m = hahn_equilibrium(3, 7, 0.25);
  std::vector<double> dev;
  for (int N : {64, 128, 256}) {
    const int k = N / 4;
    auto sys = system_for(FamilySpec::hahn_scaled(3, 7, N), N, k);
    // The left edge sits almost on the wall at 0; the right edge has a wide void.
    dev.push_back(airy_compare(cd_kernel(sys, k), m, Edge::Right, 2.0).deviation);
  }
  EXPECT_LT(dev[1], dev[0]);
  EXPECT_LT(dev[2], dev[1]);
  const double slope = std::log(dev[2] / dev[0]) / std::log(4.0);
  EXPECT_LT(slope, -0.2);
  EXPECT_NEAR(airy_kernel(0, 0), std::pow(boost::math::airy_ai_prime(0.0), 2), 1e-15);
}

TEST(Kernel, AiryKernelNearSaturatedEdgeViaHoles) {
  auto m = hahn_equilibrium(3, 7, 0.75);
  ASSERT_EQ(m.configuration(), "SBS");
  const auto dual = dual_measure(m);
  std::vector<double> dev;
  for (int N : {64, 128, 256}) {
    const int k = 3 * N / 4;
    auto sys = system_for(FamilySpec::hahn_scaled(3, 7, N), N, k);
    const auto K = cd_kernel(sys, k);
    EXPECT_THROW(airy_compare(K, m, Edge::Left, 2.0), ValidationError);
    dev.push_back(airy_compare(hole_kernel(K), dual, Edge::Left, 2.0).deviation);
  }
  EXPECT_LT(dev[2], dev[0]);
  EXPECT_LT(std::log(dev[2] / dev[0]) / std::log(4.0), -0.2);
}

TEST(TracyWidom, LimitsAndConvergence) {
  EXPECT_GT(tracy_widom_cdf(6.0, 40), 1 - 1e-6);
  EXPECT_LT(tracy_widom_cdf(-8.0, 40), 1e-3);
  EXPECT_LT(std::abs(tracy_widom_cdf(0.0, 40) - tracy_widom_cdf(0.0, 80)), 1e-8);
  double prev = 0;
  for (double s = -6; s <= 4; s += 0.5) {
    const double f = tracy_widom_cdf(s, 40);
    EXPECT_GE(f, prev);
    prev = f;
  }
  EXPECT_THROW(tracy_widom_cdf(0.0, 10), ValidationError);
}

TEST(Sampler, PairFrequenciesMatchMinors) {
  const int N = 6, k = 2;
  auto sys = system_for(FamilySpec::krawtchouk(0.4, 0.6), N, k);
  const auto K = cd_kernel(sys, k);
  ProjectionSampler sampler(K);
  Rng rng(2024);
  std::map<std::pair<int, int>, int> count;
  const int draws = 200000;
  for (int t = 0; t < draws; ++t) {
    const auto s = sampler.draw(rng);
    ASSERT_EQ(s.size(), 2u);
    ASSERT_LT(s[0], s[1]);
    ++count[std::make_pair(s[0], s[1])];
  }
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      const double p = correlation(K, {i, j});
      const double sigma = std::sqrt(p * (1 - p) / draws);
      const double freq = count[std::make_pair(i, j)] / double(draws);
      EXPECT_NEAR(freq, p, 3 * sigma + 1e-12) << i << ',' << j;
    }
}

TEST(Sampler, DeterministicAndRejectsNonProjection) {
  auto sys = system_for(FamilySpec::krawtchouk(0.5, 0.5), 20, 7);
  const auto K = cd_kernel(sys, 7);
  EXPECT_EQ(sample_dpp(K, 99u), sample_dpp(K, 99u));
  auto bad = K;
  bad.K *= 0.9;
  EXPECT_THROW(sample_dpp(bad, 1u), NumericalError);
}

TEST(Kernel, CsvExport) {
  auto sys = system_for(FamilySpec::krawtchouk(0.5, 0.5), 4, 2);
  std::ostringstream os;
  write_kernel_csv(cd_kernel(sys, 2), os);
  const std::string out = os.str();
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 17);
}
