#include "dopasym/asymptotics.hpp"

#include "dopasym/errors.hpp"
#include "dopasym/io.hpp"
#include "dopasym/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace dopasym {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

[[noreturn]] void mismatch(const std::string& what) { throw ValidationError("RegionMismatch", what); }

double dist_to_interval(Complex z, double lo, double hi) {
  const double x = std::clamp(z.real(), lo, hi);
  return std::abs(z - x);
}

ScaledValue airy_value(const OuterModel& model, Edge side, double x) {
  const auto& m = model.measure();
  const bool left = side == Edge::Left;
  const GapType gap = left ? m.left_gap() : m.right_gap();
  const double e = left ? model.alpha() : model.beta();
  // The uniform formula has a removable 0/0 at the edge itself; step a hair into the band.
  const double w = model.beta() - model.alpha();
  double xe = x;
  if (std::abs(x - e) < 1e-11 * w) xe = e + (left ? 1e-10 : -1e-10) * w;
  const double N = model.N();
  const double t = model.tau(side, xe);
  const Complex mt4 = t > 0 ? std::polar(std::pow(t, 0.25), left ? -kPi / 4 : kPi / 4)
                            : Complex(std::pow(-t, 0.25), 0.0);
  const EdgeFactors H = model.H(side, xe);
  const Complex pre = std::sqrt(2 * kPi) * std::exp((model.eta(xe) - model.gamma_const()) / 2.0);
  const double s = std::pow(0.75, 2.0 / 3.0) * t;
  const AiryValues A = airy(-s);
  const double n16 = std::pow(N, 1.0 / 6.0), q16 = std::pow(0.75, 1.0 / 6.0);
  // The right edge swaps the roles of H+ and H-.
  const Complex hA = left ? H.minus : H.plus, hB = left ? H.plus : H.minus;
  const Complex Av = q16 * pre * hA / n16 * mt4;
  Complex out;
  if (gap == GapType::Void) {
    const Complex Bv = -pre * hB * n16 / (q16 * mt4);
    out = n16 * Av * A.ai + Bv * A.aip / n16;
  } else {
    const double th = N * model.theta0(xe) / 2.0;
    const double cs = std::cos(th), sn = std::sin(th);
    const double sg = left ? -1.0 : 1.0;
    const double FA = cs * A.bi + sg * sn * A.ai;
    const double FB = cs * A.bip + sg * sn * A.aip;
    const Complex Bv = pre * hB * n16 / (q16 * mt4);
    out = n16 * Av * FA + Bv * FB / n16;
  }
  return {out, (m.field(x) - m.ell) / 2.0};
}

}  // namespace

std::string RegionTag::name() const {
  const std::string side = edge == Edge::Left ? "left" : "right";
  switch (region) {
    case Region::Outer:
      return "outer";
    case Region::Void:
      return "void";
    case Region::Band:
      return "band";
    case Region::Saturated:
      return "saturated";
    case Region::HardEdge:
      return "hard_edge_" + side;
    case Region::AiryEdge:
      return "airy_" + side + (gap == GapType::Void ? "_void" : "_saturated");
  }
  return "?";
}

double edge_radius(const EquilibriumMeasure& m, int N) {
  return std::min(0.05 * (m.beta() - m.alpha()), 2.0 * std::pow(double(N), -2.0 / 3.0 + 0.1));
}

RegionTag classify_point(const EquilibriumMeasure& m, Complex z, int N) {
  const double r = edge_radius(m, N);
  RegionTag t;
  if (std::abs(z - m.alpha()) <= r) return {Region::AiryEdge, Edge::Left, m.left_gap()};
  if (std::abs(z - m.beta()) <= r) return {Region::AiryEdge, Edge::Right, m.right_gap()};
  if (m.left_gap() == GapType::Saturated && std::abs(z - m.a) <= r)
    return {Region::HardEdge, Edge::Left, GapType::Saturated};
  if (m.right_gap() == GapType::Saturated && std::abs(z - m.b) <= r)
    return {Region::HardEdge, Edge::Right, GapType::Saturated};
  if (dist_to_interval(z, m.a, m.b) > 0.02 || z.real() < m.a || z.real() > m.b) return t;
  const double x = z.real();
  if (x > m.alpha() && x < m.beta()) return {Region::Band, Edge::Left, GapType::Void};
  const GapType g = x <= m.alpha() ? m.left_gap() : m.right_gap();
  return {g == GapType::Void ? Region::Void : Region::Saturated, x <= m.alpha() ? Edge::Left : Edge::Right, g};
}

ScaledValue approx_pi(const OuterModel& model, const RegionTag& tag, Complex z) {
  const auto& m = model.measure();
  const double N = model.N(), c = model.c();
  const double al = model.alpha(), be = model.beta();
  if (tag.region == Region::Outer) {
    if (z.imag() == 0.0 && z.real() >= al && z.real() <= be) mismatch("outer formula needs z off the band");
    const Complex L = model.L(z);
    return {std::exp(kI * (N * L.imag())) * model.W(z), L.real()};
  }
  if (z.imag() != 0.0) mismatch("real-axis formulas need real z");
  const double x = z.real();
  if (x < m.a || x > m.b) mismatch("point outside the node interval");
  const double Lbar = m.log_potential(x);
  const Complex phase_mu = std::exp(kI * (N * kPi * c * model.mass_right(x)));
  switch (tag.region) {
    case Region::Void: {
      const int g = m.gap_index(x);
      if (g < 0 || m.gap_types[static_cast<std::size_t>(g)] != GapType::Void) mismatch("not in a void");
      return {phase_mu * model.W_plus(x), Lbar};
    }
    case Region::Saturated: {
      const int g = m.gap_index(x);
      if (g < 0 || m.gap_types[static_cast<std::size_t>(g)] != GapType::Saturated)
        mismatch("not in a saturated region");
      const double th = N * model.theta0(x) / 2.0;
      return {2.0 * phase_mu * std::exp(-kI * th) * model.W_plus(x) * std::cos(th), Lbar};
    }
    case Region::HardEdge: {
      const bool left = tag.edge == Edge::Left;
      const GapType g = left ? m.left_gap() : m.right_gap();
      if (g != GapType::Saturated || (left ? x >= al : x <= be)) mismatch("no hard edge here");
      // zeta = N times the rho0-mass between the hard edge and x.
      const double tail = N * model.theta0(x) / (2 * kPi);
      const double zl = left ? N - tail : tail;
      const Complex At = 2.0 * phase_mu * std::exp((left ? kI : -kI) * (kPi * zl)) * model.W_plus(x);
      const double ratio = zl > 0 ? stirling_ratio(zl) : 1.0 / std::sqrt(2.0);
      return {At * std::cos(kPi * zl) * ratio, Lbar};
    }
    case Region::Band: {
      if (!(x > al && x < be)) mismatch("not in the band");
      const Complex w = model.W_plus(x);
      return {2.0 * std::abs(w) * std::cos(std::arg(w) + N * kPi * c * model.mass_right(x)), Lbar};
    }
    case Region::AiryEdge: {
      const double e = tag.edge == Edge::Left ? al : be;
      if (std::abs(x - e) > 0.1 * (be - al)) mismatch("too far from the band edge");
      return airy_value(model, tag.edge, x);
    }
    case Region::Outer:
      break;
  }
  mismatch("unknown region");
}

Complex exact_scaled(const OrthoSystem& sys, int k, Complex z, double log_scale) {
  PrecisionScope scope(sys.precision_bits);
  const PolyValue p = evaluate(sys, k, ComplexHP(Real(z.real()), Real(z.imag())));
  const Real s = exp(-Real(sys.N()) * Real(log_scale));
  return {static_cast<double>(p.monic.re * s), static_cast<double>(p.monic.im * s)};
}

double band_cosine(const OuterModel& model, double x) {
  const Complex w = model.W_plus(x);
  return std::cos(std::arg(w) + model.N() * kPi * model.c() * model.mass_right(x));
}

std::vector<double> predicted_band_zeros(const OuterModel& model) {
  const double w = model.beta() - model.alpha();
  const double lo = model.alpha() + 0.02 * w, hi = model.beta() - 0.02 * w;
  const int samples = std::max(2000, 40 * model.N());
  std::vector<double> roots;
  double x0 = lo, f0 = band_cosine(model, lo);
  for (int i = 1; i <= samples; ++i) {
    const double x1 = lo + (hi - lo) * i / samples;
    const double f1 = band_cosine(model, x1);
    if (f0 == 0.0) roots.push_back(x0);
    else if (f0 * f1 < 0) {
      double p = x0, q = x1, fp = f0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (p + q);
        const double fm = band_cosine(model, mid);
        if (fp * fm <= 0) q = mid;
        else {
          p = mid;
          fp = fm;
        }
      }
      roots.push_back(0.5 * (p + q));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

PairingReport saturated_zero_pairing(const OrthoSystem& sys, const EquilibriumMeasure& m, int k,
                                     double edge_margin) {
  PairingReport rep;
  const bool left = m.left_gap() == GapType::Saturated, right = m.right_gap() == GapType::Saturated;
  if (!left && !right) return rep;
  const int N = sys.N();
  const int bits = std::max(sys.precision_bits, 8 * N);
  OrthoSystem hp = sys.precision_bits >= bits && sys.kmax >= k
                       ? sys
                       : stieltjes_recurrence(sys.weights.at_precision(bits), k, {true, 4096, false});
  rep.precision_bits = hp.precision_bits;
  const std::vector<double> z = zeros_double(hp, k);
  const auto& nodes = sys.weights.nodes().nodes;
  for (double xn : nodes) {
    const bool in_left = left && xn <= m.alpha() - edge_margin;
    const bool in_right = right && xn >= m.beta() + edge_margin;
    if (!in_left && !in_right) continue;
    auto it = std::lower_bound(z.begin(), z.end(), xn);
    double best = std::numeric_limits<double>::infinity();
    double zb = xn;
    for (auto j : {it - 1, it}) {
      if (j < z.begin() || j >= z.end()) continue;
      if (std::abs(*j - xn) < std::abs(best)) {
        best = *j - xn;
        zb = *j;
      }
    }
    rep.pairs.push_back({xn, zb, best});
    rep.max_distance = std::max(rep.max_distance, std::abs(best));
    if (in_left && !(best > 0)) rep.ordering_ok = false;
    if (in_right && !(best < 0)) rep.ordering_ok = false;
  }
  return rep;
}

RecurrencePrediction predicted_recurrence(const OuterModel& model) {
  const double w = model.beta() - model.alpha();
  const double base = model.N() * model.measure().ell + model.gamma_const();
  return {base + std::log(4.0 / w), base + std::log(w / 4.0), 0.5 * (model.alpha() + model.beta()), w / 4.0};
}

std::vector<TestPoint> standard_test_points(const OuterModel& model) {
  const auto& m = model.measure();
  const int N = model.N();
  const double al = model.alpha(), be = model.beta(), w = be - al;
  std::vector<TestPoint> pts;
  auto add = [&](std::string label, Complex z, RegionTag tag) { pts.push_back({std::move(label), z, tag}); };
  add("outer_real", Complex(m.b + (m.b - m.a), 0.0), {});
  add("outer_complex", Complex(0.5 * (al + be), 0.5 * (m.b - m.a)), {});
  for (double r : {0.2, 0.5, 0.8}) add("band_" + short_num(r), Complex(al + r * w, 0.0), {Region::Band});
  const double r_fixed = 0.75 * 0.05 * w;
  const double r_edge = edge_radius(m, N);
  auto gap_points = [&](Edge side, double lo, double hi, GapType g) {
    for (double r : {0.3, 0.7}) {
      const double x = lo + r * (hi - lo);
      const RegionTag tag = classify_point(m, Complex(x, 0.0), N);
      if (tag.region != Region::Void && tag.region != Region::Saturated) continue;
      add(std::string(g == GapType::Void ? "void_" : "saturated_") + (side == Edge::Left ? "left_" : "right_") +
              short_num(r),
          Complex(x, 0.0), {g == GapType::Void ? Region::Void : Region::Saturated, side, g});
    }
    if (g == GapType::Saturated && hi - lo > 2 * r_fixed && r_fixed <= r_edge) {
      const double x = side == Edge::Left ? lo + r_fixed : hi - r_fixed;
      add(std::string("hard_edge_") + (side == Edge::Left ? "left" : "right"), Complex(x, 0.0),
          {Region::HardEdge, side, GapType::Saturated});
    }
  };
  gap_points(Edge::Left, m.a, al, m.left_gap());
  gap_points(Edge::Right, be, m.b, m.right_gap());
  for (Edge side : {Edge::Left, Edge::Right}) {
    const bool left = side == Edge::Left;
    const double e = left ? al : be;
    const GapType g = left ? m.left_gap() : m.right_gap();
    for (double t : {-2.0, 0.0, 2.0}) {
      double x = e;
      if (t != 0.0) {
        // tau increases into the band; bisect on the side where it has the sign of t.
        const bool into_band = t > 0;
        const double dir = (left == into_band) ? 1.0 : -1.0;
        double p = e, q = e + dir * 0.1 * w;
        q = std::clamp(q, m.a + 1e-12, m.b - 1e-12);
        if (std::abs(model.tau(side, q)) < std::abs(t)) continue;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (p + q);
          if (std::abs(model.tau(side, mid)) < std::abs(t)) p = mid;
          else q = mid;
        }
        x = 0.5 * (p + q);
      }
      add(std::string("airy_") + (left ? "left_" : "right_") + short_num(t), Complex(x, 0.0),
          {Region::AiryEdge, side, g});
    }
  }
  return pts;
}

std::vector<SweepRow> regional_errors(const OrthoSystem& sys, int k, const OuterModel& model,
                                      const std::vector<TestPoint>& points) {
  std::vector<SweepRow> rows;
  for (const auto& p : points) {
    const ScaledValue ap = approx_pi(model, p.tag, p.z);
    const Complex ex = exact_scaled(sys, k, p.z, ap.log_scale);
    rows.push_back({p.tag.name(), model.N(), p.label, ex, ap.mantissa, std::abs(ex - ap.mantissa)});
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "theorem,N,test_point,exact,approx,scaled_error\n";
  for (const auto& r : rows) {
    os << r.theorem << ',' << r.N << ',' << r.test_point << ',' << fmt_double(r.exact.real()) << ','
       << fmt_double(r.approx.real()) << ',' << fmt_double(r.scaled_error) << '\n';
  }
}

}  // namespace dopasym
