#pragma once

#include "dopasym/equilibrium.hpp"
#include "dopasym/orthopoly.hpp"
#include "dopasym/outer_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace dopasym {

struct KernelMatrix {
  int N = 0;
  int k = 0;
  Eigen::MatrixXd K;
  std::vector<double> nodes;

  double operator()(int i, int j) const { return K(i, j); }
};

struct KernelReport {
  double symmetry = 0.0;
  double projection = 0.0;  // max |K^2 - K|
  double trace_error = 0.0;
  double diagonal_min = 0.0;
  double diagonal_max = 0.0;
};

KernelMatrix cd_kernel(const OrthoSystem& sys, int k);
// Direct sum over the orthonormal basis; independent of the Christoffel-Darboux route.
KernelMatrix basis_kernel(const OrthoSystem& sys, int k);
KernelReport check_kernel(const KernelMatrix& K);

// Determinant of the principal minor on the given node indices.
double correlation(const KernelMatrix& K, const std::vector<int>& subset);

// Probabilities of exactly m = 0..|B| particles in B.
std::vector<double> occupation_distribution(const KernelMatrix& K, const std::vector<int>& B);
double occupation_prob(const KernelMatrix& K, const std::vector<int>& B, int m);

KernelMatrix hole_kernel(const KernelMatrix& K);

// Local density q(x) = c (d mu/dx) / rho0.
double local_density(const EquilibriumMeasure& m, double x);
double sine_kernel(double q, int d);
double sine_compare(const KernelMatrix& K, const EquilibriumMeasure& m, double x, int window);

struct AiryComparison {
  double deviation = 0.0;
  int pairs = 0;
  double scale = 0.0;  // (N pi c B)^{2/3}
};
// Compares the rescaled kernel with the Airy kernel for nodes with |xi| <= window.
AiryComparison airy_compare(const KernelMatrix& K, const EquilibriumMeasure& m, Edge edge, double window);

// det(1 - A) on [s, inf) by Gauss-Legendre Nystrom quadrature under t -> s + 10(1+t)/(1-t).
double tracy_widom_cdf(double s, int quad_points = 60);
void write_tw_table_csv(std::ostream& os, int quad_points = 60);

using Rng = std::mt19937_64;

// Checks the projection property once, then draws exact samples.
class ProjectionSampler {
 public:
  explicit ProjectionSampler(const KernelMatrix& K);
  std::vector<int> draw(Rng& rng) const;

 private:
  KernelMatrix K_;
};

// Exact sampling of a rank-k projection ensemble; returns sorted node indices.
std::vector<int> sample_dpp(const KernelMatrix& K, Rng& rng);
std::vector<int> sample_dpp(const KernelMatrix& K, std::uint64_t seed);

void write_kernel_csv(const KernelMatrix& K, std::ostream& os);

}  // namespace dopasym
