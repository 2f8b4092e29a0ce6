#include "dopasym/orthopoly.hpp"

#include "dopasym/errors.hpp"
#include "dopasym/io.hpp"

#include <algorithm>
#include <ostream>

namespace dopasym {

namespace {

Real pairwise_range(const std::vector<Real>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    Real s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_range(v, lo, mid) + pairwise_range(v, mid, hi);
}

Real dot(const std::vector<Real>& u, const std::vector<Real>& v, std::vector<Real>& scratch) {
  scratch.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) scratch[i] = u[i] * v[i];
  return pairwise_sum(scratch);
}

struct Attempt {
  bool ok = false;
  std::string why;
};

Attempt run_lanczos(const WeightFamily& w, int kmax, OrthoSystem& sys) {
  const int N = w.N();
  const std::size_t n = static_cast<std::size_t>(N);
  std::vector<Real> x(n), wt(n), scratch;
  for (int i = 0; i < N; ++i) x[static_cast<std::size_t>(i)] = w.nodes().node_hp(i);
  // Shift log weights by their maximum before exponentiating.
  Real lmax = *std::max_element(w.log_weights().begin(), w.log_weights().end());
  for (std::size_t i = 0; i < n; ++i) wt[i] = exp(w.log_weights()[i] - lmax);
  const Real S = pairwise_sum(wt);
  const Real log_gamma0 = -(log(S) + lmax) / 2;

  sys.a.assign(static_cast<std::size_t>(kmax + 1), Real(0));
  sys.b.assign(static_cast<std::size_t>(kmax), Real(0));
  sys.gamma.assign(static_cast<std::size_t>(kmax + 1), Real(0));
  sys.basis.assign(static_cast<std::size_t>(kmax + 1), std::vector<Real>(n));

  auto& q0 = sys.basis[0];
  for (std::size_t i = 0; i < n; ++i) q0[i] = sqrt(wt[i] / S);
  sys.gamma[0] = exp(log_gamma0);

  const Real tiny = pow(Real(2), -w.precision_bits() / 2);
  Real log_gamma = log_gamma0;
  std::vector<Real> r(n);
  for (int k = 0; k <= kmax; ++k) {
    const auto& qk = sys.basis[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < n; ++i) scratch.resize(n), scratch[i] = x[i] * qk[i] * qk[i];
    sys.a[static_cast<std::size_t>(k)] = pairwise_sum(scratch);
    if (k == kmax) break;
    const Real& ak = sys.a[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = (x[i] - ak) * qk[i];
      if (k > 0) r[i] -= sys.b[static_cast<std::size_t>(k - 1)] * sys.basis[static_cast<std::size_t>(k - 1)][i];
    }
    Real bk = sqrt(dot(r, r, scratch));
    if (!(bk > tiny)) return {false, "b_" + std::to_string(k) + " collapsed"};
    sys.b[static_cast<std::size_t>(k)] = bk;
    auto& qn = sys.basis[static_cast<std::size_t>(k + 1)];
    for (std::size_t i = 0; i < n; ++i) qn[i] = r[i] / bk;
    log_gamma -= log(bk);
    sys.gamma[static_cast<std::size_t>(k + 1)] = exp(log_gamma);
  }

  Real worst = 0;
  for (int j = 0; j <= kmax; ++j) {
    for (int k = j; k <= kmax; ++k) {
      Real g = dot(sys.basis[static_cast<std::size_t>(j)], sys.basis[static_cast<std::size_t>(k)], scratch);
      if (j == k) g -= 1;
      Real ag = abs(g);
      if (ag > worst) worst = ag;
    }
  }
  sys.residual = worst;
  const Real tol = pow(Real(10), -Real(w.precision_bits()) / 8);
  if (!(worst < tol)) return {false, "orthonormality residual " + to_string_digits(worst, 6)};
  return {true, {}};
}

}  // namespace

Real pairwise_sum(const std::vector<Real>& v) { return pairwise_range(v, 0, v.size()); }

OrthoSystem stieltjes_recurrence(const WeightFamily& w, int kmax, StieltjesOptions opt) {
  if (kmax < 0 || kmax > w.N() - 1)
    throw ValidationError("DegreeOutOfRange", "kmax must lie in [0, N-1]");
  WeightFamily current = w;
  for (;;) {
    PrecisionScope scope(current.precision_bits());
    OrthoSystem sys;
    sys.weights = current;
    sys.kmax = kmax;
    sys.precision_bits = current.precision_bits();
    Attempt at = run_lanczos(current, kmax, sys);
    if (at.ok) {
      if (!opt.keep_basis) sys.basis.clear();
      return sys;
    }
    const int next = current.precision_bits() * 2;
    if (!opt.escalate || next > opt.max_bits)
      throw NumericalError("PrecisionExhausted", at.why + " at " + std::to_string(current.precision_bits()) + " bits");
    current = current.at_precision(next);
  }
}

PolyValue evaluate(const OrthoSystem& sys, int k, const ComplexHP& z) {
  if (k < 0 || k > sys.kmax) throw ValidationError("DegreeOutOfRange", "k exceeds kmax");
  PrecisionScope scope(sys.precision_bits);
  ComplexHP p0(Real(1)), p1;
  if (k == 0) return {p0, p0 * sys.gamma[0]};
  p1 = z - ComplexHP(sys.a[0]);
  for (int j = 1; j < k; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    ComplexHP p2 = (z - ComplexHP(sys.a[ju])) * p1 - p0 * (sys.b[ju - 1] * sys.b[ju - 1]);
    p0 = std::move(p1);
    p1 = std::move(p2);
  }
  return {p1, p1 * sys.gamma[static_cast<std::size_t>(k)]};
}

PolyValue evaluate(const OrthoSystem& sys, int k, std::complex<double> z) {
  PrecisionScope scope(sys.precision_bits);
  return evaluate(sys, k, ComplexHP(Real(z.real()), Real(z.imag())));
}

Real monic_value(const OrthoSystem& sys, int k, const Real& x) {
  PrecisionScope scope(sys.precision_bits);
  Real p0 = 1;
  if (k == 0) return p0;
  Real p1 = x - sys.a[0];
  for (int j = 1; j < k; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    Real p2 = (x - sys.a[ju]) * p1 - sys.b[ju - 1] * sys.b[ju - 1] * p0;
    p0 = std::move(p1);
    p1 = std::move(p2);
  }
  return p1;
}

std::vector<MonicPair> monic_with_derivative(const OrthoSystem& sys, int k, const Real& x) {
  // Entries 0..k. Degree N uses a_{N-1} and b_{N-2}, so k may reach kmax + 1 when kmax = N-1.
  if (k < 0 || k > sys.kmax + 1) throw ValidationError("DegreeOutOfRange", "k exceeds kmax + 1");
  PrecisionScope scope(sys.precision_bits);
  std::vector<MonicPair> out;
  out.reserve(static_cast<std::size_t>(k + 1));
  out.push_back({Real(1), Real(0)});
  if (k == 0) return out;
  out.push_back({x - sys.a[0], Real(1)});
  for (int j = 1; j < k; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const Real b2 = sys.b[ju - 1] * sys.b[ju - 1];
    const Real xa = x - sys.a[ju];
    Real v = xa * out[ju].value - b2 * out[ju - 1].value;
    Real d = out[ju].value + xa * out[ju].derivative - b2 * out[ju - 1].derivative;
    out.push_back({std::move(v), std::move(d)});
  }
  return out;
}

int sturm_count(const OrthoSystem& sys, int k, const Real& x) {
  int count = 0;
  Real d = sys.a[0] - x;
  const Real eps = pow(Real(2), -sys.precision_bits + 4);
  for (int i = 0; i < k; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    if (i > 0) d = (sys.a[iu] - x) - sys.b[iu - 1] * sys.b[iu - 1] / d;
    if (d == 0) d = eps;
    if (d < 0) ++count;
  }
  return count;
}

std::vector<Real> zeros(const OrthoSystem& sys, int k) {
  if (k < 1 || k > sys.kmax) throw ValidationError("DegreeOutOfRange", "zeros need 1 <= k <= kmax");
  PrecisionScope scope(sys.precision_bits);
  const NodeSet& ns = sys.weights.nodes();
  const Real lo0 = ns.node_hp(0), hi0 = ns.node_hp(ns.N - 1);
  const Real tol = pow(Real(2), -sys.precision_bits + 6);
  std::vector<Real> out;
  out.reserve(static_cast<std::size_t>(k));
  Real lower = lo0;
  for (int j = 0; j < k; ++j) {
    // j-th eigenvalue: smallest x with count(x) > j.
    Real lo = lower, hi = hi0;
    int iter = 0;
    while (hi - lo > tol * (1 + abs(hi)) && iter < 4 * sys.precision_bits) {
      Real mid = (lo + hi) / 2;
      if (sturm_count(sys, k, mid) > j)
        hi = mid;
      else
        lo = mid;
      ++iter;
    }
    if (iter >= 4 * sys.precision_bits)
      throw NumericalError("ConvergenceFailure", "bisection failed for zero " + std::to_string(j));
    out.push_back((lo + hi) / 2);
    lower = lo;
  }
  return out;
}

std::vector<double> zeros_double(const OrthoSystem& sys, int k) {
  auto z = zeros(sys, k);
  std::vector<double> out;
  out.reserve(z.size());
  for (const auto& v : z) out.push_back(static_cast<double>(v));
  return out;
}

bool zeros_confined(const std::vector<Real>& z, const NodeSet& nodes) {
  if (z.empty()) return true;
  const int N = nodes.N;
  std::vector<int> per(static_cast<std::size_t>(std::max(N - 1, 1)), 0);
  for (const auto& v : z) {
    if (!(v > nodes.node_hp(0) && v < nodes.node_hp(N - 1))) return false;
    // Count membership in every closed interval [x_n, x_{n+1}] containing v.
    for (int n = 0; n + 1 < N; ++n) {
      if (v >= nodes.node_hp(n) && v <= nodes.node_hp(n + 1)) ++per[static_cast<std::size_t>(n)];
    }
  }
  for (int c : per)
    if (c > 1) return false;
  return true;
}

DualityReport check_duality(const OrthoSystem& sys, const OrthoSystem& dual_sys, int k) {
  const int N = sys.N();
  if (k < 1 || k > N || k - 1 > sys.kmax || N - k > dual_sys.kmax)
    throw ValidationError("DegreeOutOfRange", "degree pair outside both systems");
  PrecisionScope scope(std::max(sys.precision_bits, dual_sys.precision_bits));
  const NodeSet& ns = sys.weights.nodes();
  DualityReport rep;
  rep.degrees_checked = 1;
  Real worst_diff = 0, scale = 0;
  const Real g2 = sys.gamma[static_cast<std::size_t>(k - 1)] * sys.gamma[static_cast<std::size_t>(k - 1)];
  for (int l = 0; l < N; ++l) {
    const Real xl = ns.node_hp(l);
    Real lhs = monic_value(dual_sys, N - k, xl);
    Real mag = exp(sys.weights.log_weights()[static_cast<std::size_t>(l)] + ns.log_node_product(l));
    if ((N - 1 - l) % 2 == 1) mag = -mag;
    Real rhs = g2 * mag * monic_value(sys, k - 1, xl);
    Real d = abs(lhs - rhs);
    if (d > worst_diff) worst_diff = d;
    if (abs(rhs) > scale) scale = abs(rhs);
  }
  rep.node_residual = static_cast<double>(scale > 0 ? Real(worst_diff / scale) : worst_diff);
  if (k <= sys.kmax && N - k - 1 >= 0 && N - k - 1 <= dual_sys.kmax) {
    Real prod = dual_sys.gamma[static_cast<std::size_t>(N - k - 1)] * sys.gamma[static_cast<std::size_t>(k)];
    rep.normalization_residual = static_cast<double>(abs(prod - 1));
  }
  return rep;
}

DualityReport check_duality(const OrthoSystem& sys, const OrthoSystem& dual_sys) {
  DualityReport all;
  const int N = sys.N();
  for (int k = 1; k <= N; ++k) {
    if (k - 1 > sys.kmax || N - k > dual_sys.kmax) continue;
    DualityReport r = check_duality(sys, dual_sys, k);
    all.node_residual = std::max(all.node_residual, r.node_residual);
    all.normalization_residual = std::max(all.normalization_residual, r.normalization_residual);
    ++all.degrees_checked;
  }
  // k = 0 normalization: gamma_bar_{N-1} gamma_0 = 1.
  if (N - 1 <= dual_sys.kmax) {
    PrecisionScope scope(std::max(sys.precision_bits, dual_sys.precision_bits));
    Real prod = dual_sys.gamma[static_cast<std::size_t>(N - 1)] * sys.gamma[0];
    all.normalization_residual = std::max(all.normalization_residual, static_cast<double>(abs(prod - 1)));
  }
  return all;
}

void write_ortho_csv(const OrthoSystem& sys, std::ostream& os) {
  PrecisionScope scope(sys.precision_bits);
  os << "k,a_k,b_k,gamma_k\n";
  for (int k = 0; k <= sys.kmax; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    os << k << ',' << to_string_digits(sys.a[ku], 30) << ','
       << (k < sys.kmax ? to_string_digits(sys.b[ku], 30) : std::string()) << ','
       << to_string_digits(sys.gamma[ku], 30) << '\n';
  }
}

}  // namespace dopasym
