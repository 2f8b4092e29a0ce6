#pragma once

#include "dopasym/orthopoly.hpp"
#include "dopasym/outer_model.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dopasym {

enum class Region { Outer, Void, Band, Saturated, HardEdge, AiryEdge };

struct RegionTag {
  Region region = Region::Outer;
  Edge edge = Edge::Left;          // HardEdge: a (Left) or b (Right); AiryEdge: alpha or beta
  GapType gap = GapType::Void;     // gap adjacent to an Airy edge, or the gap type of a gap region
  std::string name() const;
};

RegionTag classify_point(const EquilibriumMeasure& m, Complex z, int N);
double edge_radius(const EquilibriumMeasure& m, int N);

// pi_{N,k}(z) ~ mantissa * exp(N * log_scale).
struct ScaledValue {
  Complex mantissa;
  double log_scale = 0.0;
};

ScaledValue approx_pi(const OuterModel& model, const RegionTag& tag, Complex z);
// Exact monic value scaled by exp(-N * log_scale), evaluated at the system's precision.
Complex exact_scaled(const OrthoSystem& sys, int k, Complex z, double log_scale);

// Band cosine model C(x) = cos(arg W_+(x) + N pi c mu([x, b])).
double band_cosine(const OuterModel& model, double x);
std::vector<double> predicted_band_zeros(const OuterModel& model);

struct ZeroPair {
  double node;
  double zero;
  double distance;  // zero - node
};

struct PairingReport {
  std::vector<ZeroPair> pairs;
  bool ordering_ok = true;
  double max_distance = 0.0;
  int defect_intervals = 0;
  int precision_bits = 0;
};

// Nodes of exterior saturated regions at least edge_margin away from the band.
PairingReport saturated_zero_pairing(const OrthoSystem& sys, const EquilibriumMeasure& m, int k,
                                     double edge_margin = 0.1);

struct RecurrencePrediction {
  double log_gamma2_k;
  double log_gamma2_km1;
  double a_k;
  double b_km1;
};
RecurrencePrediction predicted_recurrence(const OuterModel& model);

struct TestPoint {
  std::string label;
  Complex z;
  RegionTag tag;
};
// Band points at relative positions 0.2, 0.5, 0.8, gap points at 0.3, 0.7, Airy points at
// tau = -2, 0, 2, hard-edge points at 0.0375 (beta - alpha) from a saturated end, and outer points.
std::vector<TestPoint> standard_test_points(const OuterModel& model);

struct SweepRow {
  std::string theorem;
  int N;
  std::string test_point;
  Complex exact;
  Complex approx;
  double scaled_error;
};
std::vector<SweepRow> regional_errors(const OrthoSystem& sys, int k, const OuterModel& model,
                                      const std::vector<TestPoint>& points);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);

}  // namespace dopasym
