#pragma once

#include "dopasym/precision.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace dopasym {

using RealFn = std::function<double(double)>;

struct NodeSet {
  int N = 0;
  double a = 0.0;
  double b = 1.0;
  RealFn rho0;
  std::vector<double> nodes;
  bool uniform = false;  // nodes are exactly a + (b-a)(2n+1)/(2N)

  // Node value at the current working precision.
  Real node_hp(int n) const;
  // Sum over m != n of log|x_n - x_m| at the current working precision.
  Real log_node_product(int n) const;
};

NodeSet build_node_set(RealFn rho0, double a, double b, int N);
NodeSet uniform_nodes(int N, double a = 0.0, double b = 1.0);

enum class Family { Krawtchouk, Hahn, AssocHahn, Custom };

std::string family_name(Family f);
Family family_from_name(const std::string& s);

struct FamilySpec {
  Family kind = Family::Krawtchouk;
  double p = 0.5, q = 0.5;  // Krawtchouk
  double P = 1.0, Q = 1.0;  // Hahn / associated Hahn
  RealFn V_N;               // Custom: full exponent V + eta/N
  RealFn V;                 // Custom: leading exponent (defaults to V_N)
  double eta_limit = 0.0;   // Custom: constant correction used by the outer model

  static FamilySpec krawtchouk(double p, double q);
  static FamilySpec hahn(double P, double Q);
  static FamilySpec assoc_hahn(double P, double Q);
  // Hahn-type family scaled with N: P = N*A + 1, Q = N*B + 1.
  static FamilySpec hahn_scaled(double A, double B, int N);
  static FamilySpec assoc_hahn_scaled(double A, double B, int N);
  static FamilySpec custom(RealFn V_N, RealFn V = {}, double eta_limit = 0.0);
};

class WeightFamily {
 public:
  WeightFamily() = default;
  WeightFamily(NodeSet nodes, FamilySpec spec, int bits);

  const NodeSet& nodes() const { return nodes_; }
  const FamilySpec& spec() const { return spec_; }
  Family kind() const { return spec_.kind; }
  int N() const { return nodes_.N; }
  int precision_bits() const { return bits_; }
  const std::vector<Real>& log_weights() const { return log_w_; }

  // Exponents in w_n = exp(-N V_N(x_n)) / prod_{m != n}|x_n - x_m|.
  double V(double x) const;
  double V_N(double x) const;
  double eta(double x) const { return N() * (V_N(x) - V(x)); }
  // Constant limit of eta, used where eta must be continued off the real axis.
  double eta_limit() const;
  // Scaled Hahn parameters (P-1)/N, (Q-1)/N.
  double A() const { return (spec_.P - 1.0) / N(); }
  double B() const { return (spec_.Q - 1.0) / N(); }

  // -N V_N(x_n) at the current working precision.
  Real minus_NV_at_node(int n) const;
  // Same family rebuilt with a different mantissa.
  WeightFamily at_precision(int bits) const;

  nlohmann::json to_json() const;

 private:
  friend WeightFamily dual_weights(const WeightFamily& w);
  Real log_weight_formula(int n) const;

  NodeSet nodes_;
  FamilySpec spec_;
  int bits_ = kDefaultPrecisionBits;
  std::vector<Real> log_w_;
};

WeightFamily make_weights(const FamilySpec& spec, const NodeSet& nodes,
                          int bits = default_precision_bits());
WeightFamily dual_weights(const WeightFamily& w);

FamilySpec family_from_json(const nlohmann::json& j, int N);

}  // namespace dopasym
