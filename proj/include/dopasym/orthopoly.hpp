#pragma once

#include "dopasym/lattice.hpp"

#include <complex>
#include <iosfwd>
#include <vector>

namespace dopasym {

struct OrthoSystem {
  WeightFamily weights;
  int kmax = 0;
  std::vector<Real> a;      // a_0 .. a_kmax
  std::vector<Real> b;      // b_0 .. b_{kmax-1}
  std::vector<Real> gamma;  // gamma_0 .. gamma_kmax
  int precision_bits = kDefaultPrecisionBits;
  Real residual;            // max |<q_j, q_k> - delta_jk|
  // basis[j][n] = sqrt(w_n) p_j(x_n); rows are orthonormal in the weighted inner product.
  std::vector<std::vector<Real>> basis;

  int N() const { return weights.N(); }
};

struct StieltjesOptions {
  bool escalate = true;     // double the mantissa on failure
  int max_bits = 4096;
  bool keep_basis = true;
};

OrthoSystem stieltjes_recurrence(const WeightFamily& w, int kmax, StieltjesOptions opt = {});

struct PolyValue {
  ComplexHP monic;
  ComplexHP orthonormal;
};

PolyValue evaluate(const OrthoSystem& sys, int k, const ComplexHP& z);
PolyValue evaluate(const OrthoSystem& sys, int k, std::complex<double> z);
// Monic value at a real point, at the system's precision.
Real monic_value(const OrthoSystem& sys, int k, const Real& x);

// Monic pi_k and its derivative at a real point.
struct MonicPair {
  Real value;
  Real derivative;
};
std::vector<MonicPair> monic_with_derivative(const OrthoSystem& sys, int k, const Real& x);

// Zeros of pi_k by Sturm bisection on the Jacobi matrix, ascending.
std::vector<Real> zeros(const OrthoSystem& sys, int k);
std::vector<double> zeros_double(const OrthoSystem& sys, int k);

// At most one zero per closed inter-node interval and all zeros inside the node hull.
bool zeros_confined(const std::vector<Real>& z, const NodeSet& nodes);

// Number of negative pivots in the Sturm sequence of the leading k x k Jacobi block at x.
int sturm_count(const OrthoSystem& sys, int k, const Real& x);

struct DualityReport {
  double node_residual = 0.0;           // max over k of the relative node identity residual
  double normalization_residual = 0.0;  // max over k of |gamma_bar_{N-k-1} gamma_k - 1|
  int degrees_checked = 0;
};

DualityReport check_duality(const OrthoSystem& sys, const OrthoSystem& dual_sys, int k);
DualityReport check_duality(const OrthoSystem& sys, const OrthoSystem& dual_sys);

void write_ortho_csv(const OrthoSystem& sys, std::ostream& os);

Real pairwise_sum(const std::vector<Real>& v);

}  // namespace dopasym
