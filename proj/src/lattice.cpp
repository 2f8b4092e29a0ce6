#include "dopasym/lattice.hpp"

#include "dopasym/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dopasym {

namespace {

// Composite 30-point Gauss-Legendre with panels no wider than max_panel.
double integrate(const RealFn& f, double lo, double hi, double max_panel) {
  if (hi <= lo) return 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_panel)));
  const double h = (hi - lo) / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i)
    s += boost::math::quadrature::gauss<double, 30>::integrate(f, lo + i * h, lo + (i + 1) * h);
  return s;
}

}  // namespace

std::string to_string_digits(const Real& x, int digits) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

Real NodeSet::node_hp(int n) const {
  if (uniform) {
    Real t = Real(2 * n + 1) / Real(2 * N);
    return Real(a) + (Real(b) - Real(a)) * t;
  }
  return Real(nodes[static_cast<std::size_t>(n)]);
}

Real NodeSet::log_node_product(int n) const {
  // Products of up to 32 factors before each log; mpfr has no practical exponent limit.
  const Real xn = node_hp(n);
  Real acc = 0;
  Real prod = 1;
  int count = 0;
  for (int m = 0; m < N; ++m) {
    if (m == n) continue;
    prod *= abs(xn - node_hp(m));
    if (++count == 32) {
      acc += log(prod);
      prod = 1;
      count = 0;
    }
  }
  if (count > 0) acc += log(prod);
  return acc;
}

NodeSet build_node_set(RealFn rho0, double a, double b, int N) {
  if (N < 1) throw ValidationError("BadParams", "N must be positive");
  if (!(b > a)) throw ValidationError("BadParams", "interval must satisfy a < b");
  constexpr int kSamples = 2001;
  for (int i = 0; i < kSamples; ++i) {
    double x = a + (b - a) * i / (kSamples - 1);
    if (!(rho0(x) > 0.0)) throw ValidationError("NonPositiveDensity", "rho0 <= 0 at x = " + std::to_string(x));
  }
  const double panel = (b - a) / 64.0;
  const double total = integrate(rho0, a, b, panel);
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("Unnormalized", "integral of rho0 is " + std::to_string(total));

  NodeSet ns;
  ns.N = N;
  ns.a = a;
  ns.b = b;
  ns.rho0 = rho0;
  ns.nodes.resize(static_cast<std::size_t>(N));
  double lo_prev = a;
  double cum_prev = 0.0;
  for (int n = 0; n < N; ++n) {
    // Newton on the cumulative integral, safeguarded by the bracket [lo, hi].
    const double target = (2.0 * n + 1.0) / (2.0 * N);
    double lo = lo_prev, hi = b;
    double x = std::min(b, lo_prev + (target - cum_prev) / rho0(lo_prev));
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double F = cum_prev + integrate(rho0, lo_prev, x, panel) - target;
      if (F < 0) lo = x; else hi = x;
      double next = x - F / rho0(x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const bool done = std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-14 * std::max(1.0, std::abs(hi));
      x = next;
      if (done) break;
    }
    ns.nodes[static_cast<std::size_t>(n)] = x;
    cum_prev += integrate(rho0, lo_prev, x, panel);
    lo_prev = x;
  }
  bool uni = true;
  for (int n = 0; n < N && uni; ++n) {
    double u = a + (b - a) * (2.0 * n + 1.0) / (2.0 * N);
    if (std::abs(ns.nodes[static_cast<std::size_t>(n)] - u) > 1e-12 * (b - a)) uni = false;
  }
  if (uni) {
    for (int n = 0; n < N; ++n) ns.nodes[static_cast<std::size_t>(n)] = a + (b - a) * (2.0 * n + 1.0) / (2.0 * N);
  }
  ns.uniform = uni;
  return ns;
}

NodeSet uniform_nodes(int N, double a, double b) {
  if (N < 1) throw ValidationError("BadParams", "N must be positive");
  NodeSet ns;
  ns.N = N;
  ns.a = a;
  ns.b = b;
  const double h = 1.0 / (b - a);
  ns.rho0 = [h](double) { return h; };
  ns.nodes.resize(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) ns.nodes[static_cast<std::size_t>(n)] = a + (b - a) * (2.0 * n + 1.0) / (2.0 * N);
  ns.uniform = true;
  return ns;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Krawtchouk: return "krawtchouk";
    case Family::Hahn: return "hahn";
    case Family::AssocHahn: return "assoc_hahn";
    case Family::Custom: return "custom";
  }
  return "unknown";
}

Family family_from_name(const std::string& s) {
  if (s == "krawtchouk") return Family::Krawtchouk;
  if (s == "hahn") return Family::Hahn;
  if (s == "assoc_hahn" || s == "associated_hahn") return Family::AssocHahn;
  if (s == "custom") return Family::Custom;
  throw ValidationError("BadParams", "unknown family '" + s + "'");
}

FamilySpec FamilySpec::krawtchouk(double p, double q) {
  FamilySpec s;
  s.kind = Family::Krawtchouk;
  s.p = p;
  s.q = q;
  return s;
}

FamilySpec FamilySpec::hahn(double P, double Q) {
  FamilySpec s;
  s.kind = Family::Hahn;
  s.P = P;
  s.Q = Q;
  return s;
}

FamilySpec FamilySpec::assoc_hahn(double P, double Q) {
  FamilySpec s = hahn(P, Q);
  s.kind = Family::AssocHahn;
  return s;
}

FamilySpec FamilySpec::hahn_scaled(double A, double B, int N) { return hahn(N * A + 1.0, N * B + 1.0); }

FamilySpec FamilySpec::assoc_hahn_scaled(double A, double B, int N) {
  return assoc_hahn(N * A + 1.0, N * B + 1.0);
}

FamilySpec FamilySpec::custom(RealFn V_N, RealFn V, double eta_limit) {
  FamilySpec s;
  s.kind = Family::Custom;
  s.V_N = std::move(V_N);
  s.V = V ? std::move(V) : s.V_N;
  s.eta_limit = eta_limit;
  return s;
}

namespace {

void validate(const FamilySpec& spec, const NodeSet& nodes) {
  switch (spec.kind) {
    case Family::Krawtchouk:
      if (!(spec.p > 0 && spec.q > 0)) throw ValidationError("BadParams", "Krawtchouk requires p, q > 0");
      break;
    case Family::Hahn:
    case Family::AssocHahn:
      if (!(spec.P > 0 && spec.Q > 0)) throw ValidationError("BadParams", "Hahn requires P, Q > 0");
      break;
    case Family::Custom:
      if (!spec.V_N) throw ValidationError("BadParams", "custom family requires a V_N callable");
      return;
  }
  if (!nodes.uniform || nodes.a != 0.0 || nodes.b != 1.0)
    throw ValidationError("NodeMismatch", family_name(spec.kind) + " requires uniform nodes on (0,1)");
}

double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

}  // namespace

WeightFamily::WeightFamily(NodeSet nodes, FamilySpec spec, int bits)
    : nodes_(std::move(nodes)), spec_(std::move(spec)), bits_(bits) {
  validate(spec_, nodes_);
  PrecisionScope scope(bits_);
  log_w_.reserve(static_cast<std::size_t>(nodes_.N));
  for (int n = 0; n < nodes_.N; ++n) {
    Real lw = log_weight_formula(n);
    if (!isfinite(lw)) throw NumericalError("NonFiniteWeight", "log weight not finite at n=" + std::to_string(n));
    log_w_.push_back(std::move(lw));
  }
}

Real WeightFamily::minus_NV_at_node(int n) const {
  const int N = nodes_.N;
  switch (spec_.kind) {
    case Family::Krawtchouk:
      return (Real(n) + Real(0.5)) * log(Real(spec_.p) / Real(spec_.q));
    case Family::Hahn:
    case Family::AssocHahn: {
      Real P = spec_.P, Q = spec_.Q;
      Real v = lgamma(Real(n) + P) + lgamma(Real(N - n - 1) + Q) - lgamma(P) - lgamma(Real(N - 1) + Q);
      return spec_.kind == Family::Hahn ? v : Real(-v);
    }
    case Family::Custom:
      return Real(-N * spec_.V_N(nodes_.nodes[static_cast<std::size_t>(n)]));
  }
  return Real(0);
}

Real WeightFamily::log_weight_formula(int n) const {
  const int N = nodes_.N;
  if (spec_.kind == Family::Custom) return minus_NV_at_node(n) - nodes_.log_node_product(n);
  switch (spec_.kind) {
    case Family::Krawtchouk: {
      // N^{N-1} sqrt(pq) / (q^N Gamma(N)) * C(N-1,n) p^n q^{N-1-n}
      Real p = spec_.p, q = spec_.q;
      return Real(N - 1) * log(Real(N)) + log(sqrt(p * q)) - Real(N) * log(q) - lgamma(Real(N)) +
             lgamma(Real(N)) - lgamma(Real(n + 1)) - lgamma(Real(N - n)) + Real(n) * log(p) +
             Real(N - 1 - n) * log(q);
    }
    case Family::Hahn: {
      // N^{N-1}/Gamma(N) * C(n+P-1,n) C(N+Q-2-n,N-1-n) / C(N+Q-2,Q-1)
      Real P = spec_.P, Q = spec_.Q;
      Real c1 = lgamma(Real(n) + P) - lgamma(P) - lgamma(Real(n + 1));
      Real c2 = lgamma(Real(N - 1 - n) + Q) - lgamma(Q) - lgamma(Real(N - n));
      Real c3 = lgamma(Real(N - 1) + Q) - lgamma(Q) - lgamma(Real(N));
      return Real(N - 1) * log(Real(N)) - lgamma(Real(N)) + c1 + c2 - c3;
    }
    case Family::AssocHahn: {
      // N^{N-1}/Gamma(N) * Gamma(N)Gamma(N+Q-1)Gamma(P) / (Gamma(n+1)Gamma(P+n)Gamma(N-n)Gamma(N+Q-1-n))
      Real P = spec_.P, Q = spec_.Q;
      return Real(N - 1) * log(Real(N)) + lgamma(Real(N - 1) + Q) + lgamma(P) - lgamma(Real(n + 1)) -
             lgamma(P + Real(n)) - lgamma(Real(N - n)) - lgamma(Real(N - 1 - n) + Q);
    }
    default:
      break;
  }
  return Real(0);
}

double WeightFamily::V(double x) const {
  switch (spec_.kind) {
    case Family::Krawtchouk:
      return x * std::log(spec_.q / spec_.p);
    case Family::Hahn:
    case Family::AssocHahn: {
      const double A = this->A(), B = this->B();
      double v = xlogx(A) + xlogx(B + 1) - xlogx(A + x) - xlogx(B + 1 - x);
      return spec_.kind == Family::Hahn ? v : -v;
    }
    case Family::Custom:
      return spec_.V ? spec_.V(x) : spec_.V_N(x);
  }
  return 0.0;
}

double WeightFamily::V_N(double x) const {
  const int N = nodes_.N;
  switch (spec_.kind) {
    case Family::Krawtchouk:
      return V(x);
    case Family::Hahn:
    case Family::AssocHahn: {
      const double P = spec_.P, Q = spec_.Q;
      double v = (std::lgamma(P) + std::lgamma(N + Q - 1) - std::lgamma(N * x + P - 0.5) -
                  std::lgamma(N * (1 - x) + Q - 0.5)) /
                 N;
      return spec_.kind == Family::Hahn ? v : -v;
    }
    case Family::Custom:
      return spec_.V_N(x);
  }
  return 0.0;
}

double WeightFamily::eta_limit() const {
  switch (spec_.kind) {
    case Family::Krawtchouk:
      return 0.0;
    case Family::Hahn:
    case Family::AssocHahn: {
      // Stirling limit of N (V_N - V) for P = NA+1, Q = NB+1.
      double e = 0.5 * std::log(A() / (1.0 + B()));
      return spec_.kind == Family::Hahn ? e : -e;
    }
    case Family::Custom:
      return spec_.eta_limit;
  }
  return 0.0;
}

WeightFamily WeightFamily::at_precision(int bits) const { return WeightFamily(nodes_, spec_, bits); }

nlohmann::json WeightFamily::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(spec_.kind);
  nlohmann::json params = nlohmann::json::object();
  switch (spec_.kind) {
    case Family::Krawtchouk:
      params["p"] = spec_.p;
      params["q"] = spec_.q;
      break;
    case Family::Hahn:
    case Family::AssocHahn:
      params["P"] = spec_.P;
      params["Q"] = spec_.Q;
      break;
    case Family::Custom:
      params["eta_limit"] = spec_.eta_limit;
      break;
  }
  j["params"] = params;
  j["N"] = nodes_.N;
  j["a"] = nodes_.a;
  j["b"] = nodes_.b;
  std::vector<std::string> lw;
  lw.reserve(log_w_.size());
  for (const auto& v : log_w_) lw.push_back(to_string_digits(v, 30));
  j["log_weights"] = lw;
  return j;
}

WeightFamily make_weights(const FamilySpec& spec, const NodeSet& nodes, int bits) {
  return WeightFamily(nodes, spec, bits);
}

WeightFamily dual_weights(const WeightFamily& w) {
  WeightFamily d;
  d.nodes_ = w.nodes_;
  d.bits_ = w.bits_;
  d.spec_ = w.spec_;
  switch (w.spec_.kind) {
    case Family::Krawtchouk:
      std::swap(d.spec_.p, d.spec_.q);
      break;
    case Family::Hahn:
      d.spec_.kind = Family::AssocHahn;
      break;
    case Family::AssocHahn:
      d.spec_.kind = Family::Hahn;
      break;
    case Family::Custom: {
      RealFn vn = w.spec_.V_N, v = w.spec_.V ? w.spec_.V : w.spec_.V_N;
      d.spec_.V_N = [vn](double x) { return -vn(x); };
      d.spec_.V = [v](double x) { return -v(x); };
      d.spec_.eta_limit = -w.spec_.eta_limit;
      break;
    }
  }
  PrecisionScope scope(w.bits_);
  d.log_w_.reserve(w.log_w_.size());
  for (int n = 0; n < w.N(); ++n)
    d.log_w_.push_back(-w.log_w_[static_cast<std::size_t>(n)] - 2 * w.nodes_.log_node_product(n));
  return d;
}

FamilySpec family_from_json(const nlohmann::json& j, int N) {
  const std::string name = j.at("family").get<std::string>();
  const Family f = family_from_name(name);
  const nlohmann::json params = j.contains("params") ? j.at("params") : j;
  auto get = [&](const char* key, double dflt) {
    return params.contains(key) ? params.at(key).get<double>() : dflt;
  };
  switch (f) {
    case Family::Krawtchouk:
      return FamilySpec::krawtchouk(get("p", 0.5), get("q", 0.5));
    case Family::Hahn:
    case Family::AssocHahn: {
      double P, Q;
      if (params.contains("A") || params.contains("B")) {
        P = N * get("A", 1.0) + 1.0;
        Q = N * get("B", 1.0) + 1.0;
      } else {
        P = get("P", 1.0);
        Q = get("Q", 1.0);
      }
      return f == Family::Hahn ? FamilySpec::hahn(P, Q) : FamilySpec::assoc_hahn(P, Q);
    }
    case Family::Custom:
      throw ValidationError("BadParams", "custom families cannot be read from JSON");
  }
  throw ValidationError("BadParams", "unknown family");
}

}  // namespace dopasym
