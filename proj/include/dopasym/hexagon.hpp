#pragma once

#include "dopasym/equilibrium.hpp"
#include "dopasym/lattice.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dopasym {

using BigInt = boost::multiprecision::cpp_int;

// Side lengths of the hexagon and one interior vertical line m (1 <= m <= a+b-1).
struct HexagonSpec {
  int a = 1, b = 1, c = 1;
  int m = 1;

  int a_m() const { return m > a ? m - a : a - m; }
  int b_m() const { return m > b ? m - b : b - m; }
  int N() const { return c + ((a - a_m()) + (b - b_m())) / 2; }
  int holes() const { return N() - c; }
  // Throws BadSpec.
  void validate() const;
};

HexagonSpec make_hexagon_spec(int a, int b, int c, int m);

struct ColumnEnsemble {
  WeightFamily weights;
  int k = 0;
  const NodeSet& nodes() const { return weights.nodes(); }
};

struct HexagonEnsembles {
  ColumnEnsemble holes;      // Hahn(b_m + 1, a_m + 1) from the bottom, k = N - c
  ColumnEnsemble particles;  // associated Hahn, k = c
};

// Positions are distances from the lowest lattice point of the line.
HexagonEnsembles hexagon_ensemble(const HexagonSpec& spec, int bits = default_precision_bits());

BigInt count_tilings(int a, int b, int c);

// A tiling stored as c non-crossing paths through the vertical tile edges.
// Y(m, i) is twice the height of the lower end of the i-th vertical edge on line m, m = 0..a+b.
struct Tiling {
  int a = 0, b = 0, c = 0;
  std::vector<int> Y;

  int lines() const { return a + b + 1; }
  int Yat(int m, int i) const { return Y[static_cast<std::size_t>(m * c + i)]; }
  // Twice the height of the lowest lattice point on line m.
  int bottom2(int m) const;
  int column_size(int m) const;
  std::vector<int> particles(int m) const;
  std::vector<int> holes(int m) const;
};

// Throws TooLarge when the MacMahon count exceeds the cap.
std::vector<Tiling> enumerate_tilings(int a, int b, int c, std::size_t cap = 1000000);

// Hole occupation frequency at each position of line m over a list of tilings (uniform measure).
std::vector<double> hole_density(const std::vector<Tiling>& tilings, int m);

// Rhombi with tile types: 1 and 2 have vertical edges (up/down steps), 3 is the wide rhombus.
struct Rhombus {
  int type = 0;
  double x[4], y[4];
};
std::vector<Rhombus> rhombi(const Tiling& t);
void write_tiling_svg(const Tiling& t, std::ostream& os);

struct ArcticPoint {
  double tau = 0.0;
  double A = 0.0, B = 0.0, c = 0.0;  // Hahn parameters of the hole ensemble on the line
  double alpha = 0.0, beta = 0.0;
  double x = 0.0;                     // horizontal coordinate in the rescaled hexagon
  double y_alpha = 0.0, y_beta = 0.0; // heights of the band edges
  GapType lower = GapType::Void, upper = GapType::Void;
  bool exceptional = false;           // endpoints not reported
};

// Sides scaled by 1/n: A, B, C > 0; tau in (0, A + B).
ArcticPoint arctic_point(double A, double B, double C, double tau);
std::vector<ArcticPoint> arctic_boundary(double A, double B, double C, const std::vector<double>& taus);
void write_arctic_csv(const std::vector<ArcticPoint>& pts, std::ostream& os);

// Rescaled vertices P1..P6.
std::vector<std::pair<double, double>> hexagon_vertices(double A, double B, double C);

std::uint64_t splitmix64(std::uint64_t& state);
// Independent seed for replica r of a run with the given master seed.
std::uint64_t replica_seed(std::uint64_t master, std::uint64_t r);

// Hole positions on line m for independent draws of the column ensemble.
std::vector<std::vector<int>> sample_column_holes(const HexagonSpec& spec, int samples, std::uint64_t seed);

struct CdfPoint {
  double s = 0.0;
  double empirical = 0.0;
  double tracy_widom = 0.0;
};

struct EdgeStats {
  int n = 0;
  HexagonSpec spec;
  double beta = 0.0;
  double scale = 0.0;  // (pi N c B)^{2/3}
  int samples = 0;
  double ks = 0.0;
  std::vector<CdfPoint> cdf;  // one row per distinct rescaled top-hole position
};

// Top hole of line tau*n in the hexagon with sides (A n, B n, C n). Throws WrongGapType when the
// upper gap of the hole ensemble is not a void.
EdgeStats edge_fluctuation_stats(double A, double B, double C, double tau, int n, int samples,
                                 std::uint64_t seed);
std::vector<EdgeStats> edge_fluctuation_sweep(double A, double B, double C, double tau,
                                              const std::vector<int>& ns, int samples, std::uint64_t seed);
void write_edge_stats_csv(const std::vector<EdgeStats>& rows, std::ostream& os);

}  // namespace dopasym
