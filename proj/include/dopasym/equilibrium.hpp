#pragma once

#include "dopasym/lattice.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace dopasym {

enum class GapType { Void, Saturated };
enum class MeasureSource { HahnClosedForm, KrawtchoukEndpoint, NumericalQP };

std::string gap_name(GapType g);
std::string source_name(MeasureSource s);

struct Band {
  double alpha = 0.0;
  double beta = 1.0;
};

// Density constant + scale * sum_i sign_i * atan(k_i T), T = sqrt((beta - x)/(x - alpha)),
// written in coordinates where mirrored forms use 1 - x.
struct ArctanForm {
  double constant = 0.0;
  double scale = 0.0;
  std::vector<std::pair<double, double>> terms;  // (sign, k)
  bool mirrored = false;
  double alpha = 0.0, beta = 1.0;  // unmirrored band

  double eval(double x) const;
  // Coefficient B in |density - gap value| ~ B sqrt(dist) at the unmirrored left/right edge.
  double edge_coefficient_unmirrored(bool left) const;
};

struct EquilibriumMeasure {
  double c = 0.5;
  double a = 0.0, b = 1.0;
  RealFn rho0;
  std::vector<Band> bands;
  std::vector<GapType> gap_types;  // one per gap: [a, alpha_0], between bands, [beta_last, b]
  RealFn band_density;             // d mu / dx inside the bands
  std::optional<ArctanForm> closed_form;
  RealFn field;                    // external field phi when known
  double ell = 0.0;
  std::vector<double> grid_x;
  std::vector<double> grid_density;
  MeasureSource source = MeasureSource::HahnClosedForm;
  bool uniform_rho = true;         // rho0 constant on [a, b]
  // Critical values c_A < c_B where the configuration changes (Hahn and Krawtchouk).
  double c_low = std::numeric_limits<double>::quiet_NaN();
  double c_high = std::numeric_limits<double>::quiet_NaN();

  bool one_band() const { return bands.size() == 1; }
  double alpha() const { return bands.front().alpha; }
  double beta() const { return bands.back().beta; }
  GapType left_gap() const { return gap_types.front(); }
  GapType right_gap() const { return gap_types.back(); }
  std::string configuration() const;  // e.g. "SBV"

  double density(double x) const;
  double upper_constraint(double x) const { return rho0(x) / c; }
  // Index of the gap containing x, or -1 when x lies in a band.
  int gap_index(double x) const;
  // c * int log|x - y| d mu(y) for real x.
  double log_potential(double x) const;
  // mu([lo, hi]).
  double mass(double lo, double hi) const;
  double total_mass() const { return mass(a, b); }
  // Square-root coefficient of the density at a band edge of a one-band measure.
  double edge_coefficient(bool left) const;

  void fill_grid(int M);
  nlohmann::json summary() const;
};

struct VariationalReport {
  double band_residual = 0.0;
  double void_margin = std::numeric_limits<double>::infinity();
  double sat_margin = std::numeric_limits<double>::infinity();
  bool valid(double tol) const { return band_residual <= tol && void_margin > 0 && sat_margin > 0; }
};

// Fields phi(x) = V(x) + int log|x - y| rho0(y) dy.
RealFn external_field(const WeightFamily& w);
RealFn hahn_field(double A, double B);
RealFn assoc_hahn_field(double A, double B);
RealFn krawtchouk_field(double p, double q);
// int_a^b log|x - y| rho0(y) dy for any density, by split quadrature.
double log_integral(const RealFn& rho0, double a, double b, double x);

struct HahnCriticalValues {
  double c_A, c_B;
};
HahnCriticalValues hahn_critical_values(double A, double B);
std::pair<double, double> hahn_endpoints(double A, double B, double c);

EquilibriumMeasure hahn_equilibrium(double A, double B, double c);
EquilibriumMeasure assoc_hahn_equilibrium(double A, double B, double c);

struct KrawtchoukEndpoints {
  double alpha, beta;
  GapType left, right;
  int newton_iterations;
};
KrawtchoukEndpoints krawtchouk_endpoints(double p, double q, double c);
EquilibriumMeasure krawtchouk_equilibrium(double p, double q, double c);

// Residuals of the two one-band moment conditions for the Krawtchouk field at trial endpoints.
std::pair<double, double> krawtchouk_moment_residuals(double p, double q, double c, double alpha, double beta,
                                                      GapType left, GapType right);

struct QPOptions {
  int max_iterations = 200000;
  double tolerance = 1e-11;    // projected-gradient infinity norm
  double band_margin = 1e-6;   // relative to the box width
  int min_run = 3;
  double trim = 0.1;
};

struct QPResult {
  EquilibriumMeasure measure;
  std::vector<double> mass;          // cell masses
  std::vector<double> gradient;      // discrete variational derivative
  std::vector<double> energy_trace;  // energy after each accepted step
  int iterations = 0;
  bool monotone = true;
};

QPResult solve_equilibrium_qp(const RealFn& phi, const RealFn& rho0, double c, int M, double a = 0.0,
                              double b = 1.0, QPOptions opt = {});

VariationalReport verify_variational(const EquilibriumMeasure& m, const RealFn& phi, double c,
                                     int grid_points = 200);

EquilibriumMeasure dual_measure(const EquilibriumMeasure& m);

double l1_distance(const EquilibriumMeasure& m1, const EquilibriumMeasure& m2, int M);

void write_measure_csv(const EquilibriumMeasure& m, std::ostream& os, int M);

}  // namespace dopasym
