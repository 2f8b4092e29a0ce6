#pragma once

#include "dopasym/equilibrium.hpp"

#include <complex>
#include <iosfwd>
#include <utility>

namespace dopasym {

using Complex = std::complex<double>;

enum class Edge { Left, Right };

struct Potentials {
  Complex L;          // analytic log potential L_c(z)
  double Lbar_gap;    // real part of the boundary values of L_c on the real axis
  double Lbar_band;   // (phi - ell)/2
  double theta;       // gap constant, continued into the band by -2 pi c mu([x, b])
  double theta0;      // 2 pi int_x^b rho0
  double variation;   // variational derivative of the energy
};

struct BandPhase {
  double amplitude;  // 2|W_+|
  double phase;      // arg W_+
};

struct EdgeFactors {
  Complex plus, minus;
};

// One-band analytic ingredients of the asymptotic formulas.
class OuterModel {
 public:
  OuterModel() = default;
  // eta is needed on the band; eta_prime, when given, switches h to the integral representation.
  OuterModel(EquilibriumMeasure m, RealFn eta, double kappa, int N, RealFn eta_prime = {});

  const EquilibriumMeasure& measure() const { return m_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double c() const { return m_.c; }
  double kappa() const { return kappa_; }
  int N() const { return N_; }
  double gamma_const() const { return gamma_; }
  double eta(double x) const { return eta_(x); }

  Complex R(Complex z) const;
  Complex lambda(Complex z) const;
  Complex u(Complex z) const;
  Complex v(Complex z) const;
  Complex h(Complex z) const;
  // h from its defining contour integral, independent of the closed form.
  Complex h_quadrature(Complex z) const;
  Complex W(Complex z) const;
  Complex Z(Complex z) const;
  // Boundary values on the real axis from above and below.
  Complex W_plus(double x) const { return W(Complex(x, kTiny)); }
  Complex W_minus(double x) const { return W(Complex(x, -kTiny)); }
  Complex Z_plus(double x) const { return Z(Complex(x, kTiny)); }

  Complex L(Complex z) const;
  Complex L_plus(double x) const;
  Complex L_minus(double x) const;
  double mass_right(double x) const { return m_.mass(x, m_.b); }
  double variation(double x) const;
  double theta_gap(Edge side) const;
  double theta0(double x) const;

  // Conformal edge coordinate on the real axis near an endpoint of the band.
  double tau(Edge side, double x) const;
  // H^{+/-} at a real point near the given edge, from the boundary values above.
  EdgeFactors H(Edge side, double x) const;
  EdgeFactors H_from_parts(Edge side, double x) const;

  BandPhase band_phase(double x) const;

  static constexpr double kTiny = 1e-300;

 private:
  Complex hprime(Complex s) const;
  Complex hprime_with_root(Complex s, Complex r) const;

  EquilibriumMeasure m_;
  RealFn eta_, eta_prime_;
  double kappa_ = 0.0;
  int N_ = 1;
  double alpha_ = 0.0, beta_ = 1.0, mid_ = 0.5;
  double gamma_ = 0.0;
};

OuterModel build_outer_model(const EquilibriumMeasure& m, RealFn eta, double kappa, int N);
OuterModel build_outer_model(const EquilibriumMeasure& m, double eta, double kappa, int N);

Potentials eval_potentials(const OuterModel& model, Complex z);
double edge_map(const OuterModel& model, Edge side, GapType expected, double x);
BandPhase band_phase(const OuterModel& model, double x);

// Columns x, A, Phi on n interior band points.
void write_band_phase_csv(const OuterModel& model, std::ostream& os, int n);

}  // namespace dopasym
