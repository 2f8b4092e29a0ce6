#include "dopasym/equilibrium.hpp"

#include "dopasym/errors.hpp"
#include "dopasym/io.hpp"
#include "dopasym/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace dopasym {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExceptionalRadius = 1e-9;

double xlogx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x); }

// Antiderivative in y of -log|x - y| evaluated via t = x - y: F(t) = t log|t| - t.
double F_log(double t) { return t == 0.0 ? 0.0 : t * std::log(std::abs(t)) - t; }

// int_p^q log|x - y| dy
double log_segment(double x, double p, double q) { return F_log(x - p) - F_log(x - q); }

double hahn_V(double A, double B, double x) {
  return xlogx(A) + xlogx(B + 1) - xlogx(A + x) - xlogx(B + 1 - x);
}

double uniform_log_integral(double x) { return xlogx(x) + xlogx(1 - x) - 1.0; }

EquilibriumMeasure mirror01(const EquilibriumMeasure& m) {
  EquilibriumMeasure r = m;
  r.bands.clear();
  for (auto it = m.bands.rbegin(); it != m.bands.rend(); ++it) r.bands.push_back({1.0 - it->beta, 1.0 - it->alpha});
  r.gap_types.assign(m.gap_types.rbegin(), m.gap_types.rend());
  auto inner = m.band_density;
  r.band_density = [inner](double x) { return inner(1.0 - x); };
  auto rho = m.rho0;
  r.rho0 = [rho](double x) { return rho(1.0 - x); };
  if (r.closed_form) r.closed_form->mirrored = !r.closed_form->mirrored;
  r.field = {};
  r.grid_x.clear();
  r.grid_density.clear();
  return r;
}

EquilibriumMeasure from_closed_form(double c, ArctanForm form, GapType left, GapType right, MeasureSource src) {
  EquilibriumMeasure m;
  m.c = c;
  m.rho0 = [](double) { return 1.0; };
  m.bands = {{form.alpha, form.beta}};
  m.gap_types = {left, right};
  m.closed_form = form;
  m.band_density = [form](double x) { return form.eval(x); };
  m.source = src;
  m.uniform_rho = true;
  return m;
}

}  // namespace

std::string gap_name(GapType g) { return g == GapType::Void ? "void" : "saturated"; }

std::string source_name(MeasureSource s) {
  switch (s) {
    case MeasureSource::HahnClosedForm: return "HahnClosedForm";
    case MeasureSource::KrawtchoukEndpoint: return "KrawtchoukEndpoint";
    case MeasureSource::NumericalQP: return "NumericalQP";
  }
  return "?";
}

double ArctanForm::eval(double x) const {
  const double y = mirrored ? 1.0 - x : x;
  if (y <= alpha || y >= beta) {
    // Edge limits: T -> infinity at alpha, T -> 0 at beta.
    double s = 0.0;
    if (y <= alpha)
      for (const auto& [sg, k] : terms) s += sg * kPi / 2;
    return constant + scale * s;
  }
  const double T = std::sqrt((beta - y) / (y - alpha));
  double s = 0.0;
  for (const auto& [sg, k] : terms) s += sg * std::atan(k * T);
  return constant + scale * s;
}

double ArctanForm::edge_coefficient_unmirrored(bool left) const {
  double s = 0.0;
  for (const auto& [sg, k] : terms) s += left ? sg / k : sg * k;
  return std::abs(scale * s) / std::sqrt(beta - alpha);
}

std::string EquilibriumMeasure::configuration() const {
  std::string s;
  for (std::size_t i = 0; i < gap_types.size(); ++i) {
    s += gap_types[i] == GapType::Void ? 'V' : 'S';
    if (i + 1 < gap_types.size()) s += 'B';
  }
  return s;
}

int EquilibriumMeasure::gap_index(double x) const {
  for (std::size_t j = 0; j < bands.size(); ++j) {
    if (x < bands[j].alpha) return static_cast<int>(j);
    if (x <= bands[j].beta) return -1;
  }
  return static_cast<int>(bands.size());
}

double EquilibriumMeasure::density(double x) const {
  const int g = gap_index(x);
  if (g < 0) return band_density(x);
  return gap_types[static_cast<std::size_t>(g)] == GapType::Void ? 0.0 : rho0(x) / c;
}

double EquilibriumMeasure::log_potential(double x) const {
  double s = 0.0;
  for (const auto& bd : bands) {
    auto f = [&](double y) { return band_density(y) * std::log(std::abs(x - y)); };
    s += c * integrate_split(f, bd.alpha, bd.beta, x);
  }
  for (std::size_t g = 0; g < gap_types.size(); ++g) {
    if (gap_types[g] != GapType::Saturated) continue;
    const double lo = g == 0 ? a : bands[g - 1].beta;
    const double hi = g == bands.size() ? b : bands[g].alpha;
    if (uniform_rho)
      s += rho0(0.5 * (lo + hi)) * log_segment(x, lo, hi);
    else
      s += log_integral(rho0, lo, hi, x);
  }
  return s;
}

double EquilibriumMeasure::mass(double lo, double hi) const {
  lo = std::max(lo, a);
  hi = std::min(hi, b);
  if (hi <= lo) return 0.0;
  double s = 0.0;
  for (const auto& bd : bands) {
    const double p = std::max(lo, bd.alpha), q = std::min(hi, bd.beta);
    if (q > p) s += integrate_smooth(band_density, p, q);
  }
  for (std::size_t g = 0; g < gap_types.size(); ++g) {
    if (gap_types[g] != GapType::Saturated) continue;
    const double p = std::max(lo, g == 0 ? a : bands[g - 1].beta);
    const double q = std::min(hi, g == bands.size() ? b : bands[g].alpha);
    if (q <= p) continue;
    s += (uniform_rho ? rho0(0.5 * (p + q)) * (q - p) : integrate_smooth(rho0, p, q)) / c;
  }
  return s;
}

double EquilibriumMeasure::edge_coefficient(bool left) const {
  if (closed_form) {
    const bool unmirrored_left = closed_form->mirrored ? !left : left;
    return closed_form->edge_coefficient_unmirrored(unmirrored_left);
  }
  // Two-offset extrapolation of |psi - gap value| / sqrt(dist).
  const double e = left ? alpha() : beta();
  const double w = beta() - alpha();
  const GapType g = left ? left_gap() : right_gap();
  auto ratio = [&](double d) {
    const double x = left ? e + d : e - d;
    const double gapv = g == GapType::Void ? 0.0 : rho0(x) / c;
    return std::abs(band_density(x) - gapv) / std::sqrt(d);
  };
  const double r1 = ratio(0.02 * w), r2 = ratio(0.01 * w);
  return 2 * r2 - r1;
}

void EquilibriumMeasure::fill_grid(int M) {
  grid_x.resize(static_cast<std::size_t>(M));
  grid_density.resize(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    const double x = a + (b - a) * (i + 0.5) / M;
    grid_x[static_cast<std::size_t>(i)] = x;
    grid_density[static_cast<std::size_t>(i)] = density(x);
  }
}

nlohmann::json EquilibriumMeasure::summary() const {
  nlohmann::json j;
  j["c"] = c;
  j["interval"] = {a, b};
  j["configuration"] = configuration();
  j["source"] = source_name(source);
  nlohmann::json bs = nlohmann::json::array();
  for (const auto& bd : bands) bs.push_back({bd.alpha, bd.beta});
  j["bands"] = bs;
  nlohmann::json gs = nlohmann::json::array();
  for (auto g : gap_types) gs.push_back(gap_name(g));
  j["gap_types"] = gs;
  j["ell_c"] = ell;
  j["c_A"] = std::isnan(c_low) ? nlohmann::json() : nlohmann::json(c_low);
  j["c_B"] = std::isnan(c_high) ? nlohmann::json() : nlohmann::json(c_high);
  return j;
}

double log_integral(const RealFn& rho0, double a, double b, double x) {
  auto f = [&](double y) { return rho0(y) * std::log(std::abs(x - y)); };
  return integrate_split(f, a, b, x);
}

RealFn external_field(const WeightFamily& w) {
  const NodeSet& ns = w.nodes();
  WeightFamily copy = w;
  if (ns.uniform) {
    const double a = ns.a, b = ns.b;
    return [copy, a, b](double x) {
      return copy.V(x) + (F_log(x - a) - F_log(x - b)) / (b - a);
    };
  }
  return [copy](double x) {
    const NodeSet& n = copy.nodes();
    return copy.V(x) + log_integral(n.rho0, n.a, n.b, x);
  };
}

RealFn hahn_field(double A, double B) {
  return [A, B](double x) { return hahn_V(A, B, x) + uniform_log_integral(x); };
}

RealFn assoc_hahn_field(double A, double B) {
  return [A, B](double x) { return -hahn_V(A, B, x) + uniform_log_integral(x); };
}

RealFn krawtchouk_field(double p, double q) {
  const double l = std::log(q / p);
  return [l](double x) { return l * x + uniform_log_integral(x); };
}

HahnCriticalValues hahn_critical_values(double A, double B) {
  const double s = A + B;
  return {(-s + std::sqrt(s * s + 4 * A)) / 2, (-s + std::sqrt(s * s + 4 * B)) / 2};
}

std::pair<double, double> hahn_endpoints(double A, double B, double c) {
  const double D = c * (1 - c) * (A + c) * (B + c) * (A + B + c) * (A + B + c + 1);
  const double num = (B - A + 2) * c * c + (A + B) * (B - A + 2) * c + A * (A + B);
  const double den = (A + B + 2 * c) * (A + B + 2 * c);
  return {(num - 2 * std::sqrt(D)) / den, (num + 2 * std::sqrt(D)) / den};
}

EquilibriumMeasure hahn_equilibrium(double A, double B, double c) {
  if (!(A > 0) || !(B > 0) || !(c > 0 && c < 1))
    throw ValidationError("BadParams", "Hahn equilibrium needs A, B > 0 and 0 < c < 1");
  if (A > B) {
    // x -> 1 - x exchanges A and B; the field shifts by a constant.
    EquilibriumMeasure m = mirror01(hahn_equilibrium(B, A, c));
    m.ell += xlogx(A) + xlogx(B + 1) - xlogx(B) - xlogx(A + 1);
    m.field = hahn_field(A, B);
    return m;
  }
  const auto [cA, cB] = hahn_critical_values(A, B);
  if (std::abs(c - cA) < kExceptionalRadius || std::abs(c - cB) < kExceptionalRadius)
    throw ValidationError("ExceptionalC", "c coincides with a critical value");
  const auto [al, be] = hahn_endpoints(A, B, c);
  const double k1 = std::sqrt((1 + B - al) / (1 + B - be));
  const double k2 = std::sqrt((1 - al) / (1 - be));
  const double k3 = std::sqrt((A + al) / (A + be));
  const double k4 = std::sqrt(al / be);
  const double ks[4] = {k1, k2, k3, k4};

  ArctanForm form;
  form.alpha = al;
  form.beta = be;
  form.scale = 1.0 / (kPi * c);
  GapType left, right;
  double sg[4];
  if (c < cA) {
    left = GapType::Void, right = GapType::Void;
    form.terms = {{-1, k1}, {1, k2}, {1, k3}, {-1, k4}};
    const double t[4] = {1, -1, -1, 1};
    std::copy(t, t + 4, sg);
  } else if (c < cB) {
    left = GapType::Saturated, right = GapType::Void;
    form.terms = {{-1, k1}, {1, k2}, {1, k3}, {1, k4}};
    const double t[4] = {1, -1, -1, -1};
    std::copy(t, t + 4, sg);
  } else {
    left = GapType::Saturated, right = GapType::Saturated;
    form.constant = 1.0 / c;
    form.terms = {{-1, k1}, {-1, k2}, {1, k3}, {1, k4}};
    const double t[4] = {1, 1, -1, -1};
    std::copy(t, t + 4, sg);
  }
  EquilibriumMeasure m = from_closed_form(c, form, left, right, MeasureSource::HahnClosedForm);
  m.c_low = cA;
  m.c_high = cB;
  m.field = hahn_field(A, B);

  const double d = be - al;
  double K1 = 0, K2 = 0, K3 = 0;
  for (int i = 0; i < 4; ++i) {
    K1 += sg[i] * ks[i] / (1 + ks[i]);
    K2 += sg[i] * ks[i] / (1 - ks[i] * ks[i]);
    K3 += sg[i] * std::log(1 + ks[i]) / (1 - ks[i] * ks[i]);
  }
  double ell = d * ((std::log(d) - 1) * K1 - 2 * std::log(2.0) * K2 + 2 * K3) + m.field(be);
  if (left == GapType::Saturated && right == GapType::Void) ell += 2 * d * std::log(d) + 2 * al - 2 * be * std::log(be);
  if (right == GapType::Saturated) ell += 2 - 2 * be * std::log(be) - 2 * (1 - be) * std::log(1 - be);
  m.ell = ell;
  return m;
}

EquilibriumMeasure assoc_hahn_equilibrium(double A, double B, double c) {
  EquilibriumMeasure m = dual_measure(hahn_equilibrium(A, B, 1.0 - c));
  m.field = assoc_hahn_field(A, B);
  return m;
}

std::pair<double, double> krawtchouk_moment_residuals(double p, double q, double c, double alpha, double beta,
                                                      GapType left, GapType right) {
  const double l = std::log(q / p);
  const double s0 = 0.5 * (alpha + beta), r = 0.5 * (beta - alpha);
  // y = s0 + r cos(theta); y - alpha = 2r cos^2(theta/2), beta - y = 2r sin^2(theta/2).
  auto f = [&](double th) {
    const double y = s0 + r * std::cos(th);
    const double ya = 2 * r * std::pow(std::cos(th / 2), 2);
    const double by = 2 * r * std::pow(std::sin(th / 2), 2);
    double v = l + std::log(y) - std::log(1 - y);
    if (left == GapType::Saturated) v -= 2 * (std::log(y) - std::log(ya));
    if (right == GapType::Saturated) v -= 2 * (std::log(by) - std::log(1 - y));
    return v;
  };
  const double m0 = integrate_endpoint_singular(f, 0.0, kPi);
  const double m1 = integrate_endpoint_singular([&](double th) { return (s0 + r * std::cos(th)) * f(th); }, 0.0, kPi);
  double msat = 0.0;
  if (left == GapType::Saturated) msat += alpha;
  if (right == GapType::Saturated) msat += 1 - beta;
  return {m0, m1 / (2 * kPi * c) - (1 - msat / c)};
}

KrawtchoukEndpoints krawtchouk_endpoints(double p, double q, double c) {
  if (!(p > 0) || !(q > 0) || !(c > 0 && c < 1))
    throw ValidationError("BadParams", "Krawtchouk needs p, q > 0 and 0 < c < 1");
  const double ph = p / (p + q), qh = q / (p + q);
  if (std::abs(c - ph) < kExceptionalRadius || std::abs(c - qh) < kExceptionalRadius)
    throw ValidationError("ExceptionalC", "c coincides with p/(p+q) or q/(p+q)");
  GapType left, right;
  if (c < std::min(ph, qh)) {
    left = right = GapType::Void;
  } else if (c > std::max(ph, qh)) {
    left = right = GapType::Saturated;
  } else if (ph < qh) {
    left = GapType::Saturated, right = GapType::Void;
  } else {
    left = GapType::Void, right = GapType::Saturated;
  }

  // Start from a coarse discrete solve, then polish with damped Newton.
  QPOptions qo;
  qo.tolerance = 1e-7;
  auto coarse = solve_equilibrium_qp(krawtchouk_field(p, q), [](double) { return 1.0; }, c, 128, 0.0, 1.0, qo);
  double al = coarse.measure.alpha(), be = coarse.measure.beta();
  al = std::clamp(al, 1e-4, 1 - 2e-4);
  be = std::clamp(be, al + 1e-4, 1 - 1e-4);

  auto resid = [&](double x, double y) { return krawtchouk_moment_residuals(p, q, c, x, y, left, right); };
  auto [f0, f1] = resid(al, be);
  double norm = std::hypot(f0, f1);
  int it = 0;
  for (; it < 100 && norm > 1e-13; ++it) {
    const double h = 1e-7;
    auto [a0, a1] = resid(al + h, be);
    auto [b0, b1] = resid(al, be + h);
    const double J00 = (a0 - f0) / h, J10 = (a1 - f1) / h, J01 = (b0 - f0) / h, J11 = (b1 - f1) / h;
    const double det = J00 * J11 - J01 * J10;
    if (det == 0.0) break;
    const double dal = -(J11 * f0 - J01 * f1) / det;
    const double dbe = -(-J10 * f0 + J00 * f1) / det;
    // Halve the step until it stays admissible and reduces the residual.
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      const double na = al + t * dal, nb = be + t * dbe;
      if (!(na > 0 && nb < 1 && nb > na)) continue;
      auto [g0, g1] = resid(na, nb);
      const double nn = std::hypot(g0, g1);
      if (nn < norm) {
        al = na, be = nb, f0 = g0, f1 = g1, norm = nn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (norm > 1e-9) throw NumericalError("NoConvergence", "Krawtchouk endpoint equations did not converge");
  return {al, be, left, right, it};
}

EquilibriumMeasure krawtchouk_equilibrium(double p, double q, double c) {
  const double ph = p / (p + q), qh = q / (p + q);
  if (ph > qh) {
    EquilibriumMeasure m = mirror01(krawtchouk_equilibrium(q, p, c));
    m.field = krawtchouk_field(p, q);
    m.ell = -2 * m.log_potential(0.5 * (m.alpha() + m.beta())) + m.field(0.5 * (m.alpha() + m.beta()));
    return m;
  }
  const auto ep = krawtchouk_endpoints(p, q, c);
  ArctanForm form;
  form.alpha = ep.alpha;
  form.beta = ep.beta;
  form.scale = 1.0 / (kPi * c);
  const double k2 = std::sqrt((1 - ep.alpha) / (1 - ep.beta));
  const double k4 = std::sqrt(ep.alpha / ep.beta);
  if (ep.left == GapType::Void) {
    form.terms = {{1, k2}, {-1, k4}};
  } else if (ep.right == GapType::Void) {
    form.terms = {{1, k2}, {1, k4}};
  } else {
    form.constant = 1.0 / c;
    form.terms = {{-1, k2}, {1, k4}};
  }
  EquilibriumMeasure m = from_closed_form(c, form, ep.left, ep.right, MeasureSource::KrawtchoukEndpoint);
  m.c_low = std::min(ph, qh);
  m.c_high = std::max(ph, qh);
  m.field = krawtchouk_field(p, q);
  const double mid = 0.5 * (ep.alpha + ep.beta);
  m.ell = -2 * m.log_potential(mid) + m.field(mid);
  return m;
}

QPResult solve_equilibrium_qp(const RealFn& phi, const RealFn& rho0, double c, int M, double a, double b,
                              QPOptions opt) {
  if (M < 64) throw ValidationError("BadParams", "QP grid needs M >= 64");
  if (!(c > 0 && c < 1)) throw ValidationError("BadParams", "c must lie in (0, 1)");
  const double dx = (b - a) / M;
  Eigen::VectorXd x(M), u(M), f(M);
  for (int i = 0; i < M; ++i) {
    x(i) = a + (i + 0.5) * dx;
    u(i) = rho0(x(i)) * dx / c;
    f(i) = phi(x(i));
    if (!std::isfinite(f(i))) throw ValidationError("BadParams", "field is not finite on the grid");
  }
  if (u.sum() < 1.0) throw ValidationError("BadParams", "upper constraint leaves no feasible measure");
  Eigen::MatrixXd Q(M, M);
  const double diag = -2 * c * (std::log(dx / 2) - 1);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) Q(i, j) = i == j ? diag : -2 * c * std::log(std::abs(x(i) - x(j)));

  // Projection onto {0 <= m <= u, sum m = 1}: bisection on the shift.
  auto project = [&](const Eigen::VectorXd& y) {
    double lo = (y - u).minCoeff() - 1.0, hi = y.maxCoeff() + 1.0;
    Eigen::VectorXd out(M);
    for (int it = 0; it < 200; ++it) {
      const double lam = 0.5 * (lo + hi);
      out = (y.array() - lam).max(0.0).min(u.array()).matrix();
      (out.sum() > 1.0 ? lo : hi) = lam;
      if (hi - lo < 1e-16 * std::max(1.0, std::abs(lam))) break;
    }
    // Solve for the shift exactly on the free set identified by the bracket.
    double lam = 0.5 * (lo + hi);
    double fixed = 0.0, free_sum = 0.0;
    int nfree = 0;
    for (int i = 0; i < M; ++i) {
      const double v = y(i) - lam;
      if (v >= u(i))
        fixed += u(i);
      else if (v > 0)
        free_sum += y(i), ++nfree;
    }
    if (nfree > 0) lam = (free_sum - (1.0 - fixed)) / nfree;
    out = (y.array() - lam).max(0.0).min(u.array()).matrix();
    return out;
  };
  auto energy = [&](const Eigen::VectorXd& mm, const Eigen::VectorXd& gg) { return 0.5 * mm.dot(gg - f) + f.dot(mm); };

  QPResult res;
  Eigen::VectorXd m = u / u.sum();
  Eigen::VectorXd g = Q * m + f;
  double E = energy(m, g);
  res.energy_trace.push_back(E);
  double step = 1.0 / Q.cwiseAbs().rowwise().sum().maxCoeff();

  auto kkt = [&](const Eigen::VectorXd& mm, const Eigen::VectorXd& gg) {
    // Multiplier from the interior cells; violations of the complementarity signs.
    std::vector<double> inner;
    for (int i = 0; i < M; ++i)
      if (mm(i) > 1e-12 * u(i) && mm(i) < (1 - 1e-12) * u(i)) inner.push_back(gg(i));
    if (inner.empty()) return std::numeric_limits<double>::infinity();
    std::nth_element(inner.begin(), inner.begin() + static_cast<long>(inner.size() / 2), inner.end());
    const double lam = inner[inner.size() / 2];
    double v = 0.0;
    for (int i = 0; i < M; ++i) {
      if (mm(i) <= 1e-12 * u(i))
        v = std::max(v, lam - gg(i));
      else if (mm(i) >= (1 - 1e-12) * u(i))
        v = std::max(v, gg(i) - lam);
      else
        v = std::max(v, std::abs(gg(i) - lam));
    }
    return v;
  };

  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (it % 10 == 0 && kkt(m, g) < opt.tolerance) break;
    Eigen::VectorXd mn, gn;
    double En = E;
    bool accepted = false;
    // Feasible directions keep the total mass, so the gradient may be centred;
    // this keeps the directional derivative free of O(1) cancellation.
    const Eigen::VectorXd gc = g.array() - g.mean();
    for (int bt = 0; bt < 60; ++bt) {
      mn = project(m - step * gc);
      Eigen::VectorXd d = mn - m;
      if (d.lpNorm<Eigen::Infinity>() == 0.0) break;
      gn = Q * mn + f;
      // Exact quadratic increment, free of the cancellation in E(mn) - E(m).
      const double slope = gc.dot(d);
      const double dE = slope + 0.5 * d.dot(gn - g);
      En = E + dE;
      if (dE <= 1e-4 * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    Eigen::VectorXd s = mn - m, yv = gn - g;
    const double sy = s.dot(yv);
    if (En > E) res.monotone = false;
    m = std::move(mn);
    g = std::move(gn);
    E = En;
    res.energy_trace.push_back(E);
    step = sy > 0 ? s.squaredNorm() / sy : step * 2;
  }
  res.iterations = it;
  if (kkt(m, g) > std::max(opt.tolerance * 1e3, 1e-6))
    throw NumericalError("NoConvergence", "projected gradient stalled with KKT residual " + std::to_string(kkt(m, g)) + " after " + std::to_string(it) + " iterations");

  // Band detection on strictly interior cells.
  std::vector<int> state(static_cast<std::size_t>(M));  // -1 lower, 0 interior, 1 upper
  for (int i = 0; i < M; ++i) {
    if (m(i) <= opt.band_margin * u(i))
      state[static_cast<std::size_t>(i)] = -1;
    else if (m(i) >= (1 - opt.band_margin) * u(i))
      state[static_cast<std::size_t>(i)] = 1;
    else
      state[static_cast<std::size_t>(i)] = 0;
  }
  struct Run {
    int lo, hi;
  };
  std::vector<Run> band_runs;
  for (int i = 0; i < M;) {
    int j = i;
    while (j < M && (state[static_cast<std::size_t>(j)] == 0) == (state[static_cast<std::size_t>(i)] == 0)) ++j;
    if (state[static_cast<std::size_t>(i)] == 0 && j - i >= opt.min_run) band_runs.push_back({i, j - 1});
    i = j;
  }
  if (band_runs.empty()) throw NumericalError("DegenerateBandDetection", "no interior run found");

  EquilibriumMeasure meas;
  meas.c = c;
  meas.a = a;
  meas.b = b;
  meas.rho0 = rho0;
  meas.field = phi;
  meas.source = MeasureSource::NumericalQP;
  meas.uniform_rho = false;
  for (const auto& r : band_runs) meas.bands.push_back({a + r.lo * dx, a + (r.hi + 1) * dx});
  auto gap_type_of = [&](int lo, int hi) {
    int up = 0, down = 0;
    for (int i = lo; i <= hi; ++i) (state[static_cast<std::size_t>(i)] == 1 ? up : down) += 1;
    return up > down ? GapType::Saturated : GapType::Void;
  };
  meas.gap_types.push_back(band_runs.front().lo > 0 ? gap_type_of(0, band_runs.front().lo - 1) : GapType::Void);
  for (std::size_t r = 1; r < band_runs.size(); ++r)
    meas.gap_types.push_back(gap_type_of(band_runs[r - 1].hi + 1, band_runs[r].lo - 1));
  meas.gap_types.push_back(band_runs.back().hi < M - 1 ? gap_type_of(band_runs.back().hi + 1, M - 1) : GapType::Void);

  std::vector<double> dens(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) dens[static_cast<std::size_t>(i)] = m(i) / dx;
  meas.band_density = [dens, a, dx, M](double xx) {
    int i = std::clamp(static_cast<int>((xx - a) / dx), 0, M - 1);
    return dens[static_cast<std::size_t>(i)];
  };
  meas.grid_x.assign(x.data(), x.data() + M);
  meas.grid_density = dens;

  std::vector<double> inner;
  for (const auto& r : band_runs) {
    const int len = r.hi - r.lo + 1;
    const int cut = static_cast<int>(opt.trim * len);
    for (int i = r.lo + cut; i <= r.hi - cut; ++i) inner.push_back(g(i));
  }
  double sum = 0.0;
  for (double v : inner) sum += v;
  meas.ell = sum / static_cast<double>(inner.size());

  res.measure = std::move(meas);
  res.mass.assign(m.data(), m.data() + M);
  res.gradient.assign(g.data(), g.data() + M);
  return res;
}

VariationalReport verify_variational(const EquilibriumMeasure& m, const RealFn& phi, double c, int n) {
  VariationalReport rep;
  auto var = [&](double x) {
    if (std::abs(c - m.c) > 1e-15) throw ValidationError("BadParams", "c differs from the measure's parameter");
    return -2 * m.log_potential(x) + phi(x);
  };
  for (const auto& bd : m.bands) {
    for (int j = 0; j < n; ++j) {
      const double x = bd.alpha + (bd.beta - bd.alpha) * (j + 0.5) / n;
      rep.band_residual = std::max(rep.band_residual, std::abs(var(x) - m.ell));
    }
  }
  for (std::size_t g = 0; g < m.gap_types.size(); ++g) {
    const double lo = g == 0 ? m.a : m.bands[g - 1].beta;
    const double hi = g == m.bands.size() ? m.b : m.bands[g].alpha;
    if (hi - lo <= 0) continue;
    // Stay 1% of the gap length away from adjacent band edges; the field may blow up at a, b.
    const double plo = lo + (g == 0 ? 1e-6 : 0.01) * (hi - lo);
    const double phi_ = hi - (g == m.bands.size() ? 1e-6 : 0.01) * (hi - lo);
    for (int j = 0; j < n; ++j) {
      const double x = plo + (phi_ - plo) * j / (n - 1);
      const double d = var(x) - m.ell;
      if (m.gap_types[g] == GapType::Void)
        rep.void_margin = std::min(rep.void_margin, d);
      else
        rep.sat_margin = std::min(rep.sat_margin, -d);
    }
  }
  return rep;
}

EquilibriumMeasure dual_measure(const EquilibriumMeasure& m) {
  EquilibriumMeasure d = m;
  const double c = m.c, cd = 1.0 - m.c;
  d.c = cd;
  for (auto& g : d.gap_types) g = g == GapType::Void ? GapType::Saturated : GapType::Void;
  auto inner = m.band_density;
  auto rho = m.rho0;
  d.band_density = [inner, rho, c, cd](double x) { return (rho(x) - c * inner(x)) / cd; };
  if (m.closed_form) {
    ArctanForm f = *m.closed_form;
    f.constant = (1.0 - c * f.constant) / cd;
    f.scale = -c * f.scale / cd;
    d.closed_form = f;
    d.band_density = [f](double x) { return f.eval(x); };
  }
  d.ell = -m.ell;
  if (m.field) {
    auto phi = m.field;
    const double a = m.a, b = m.b;
    const bool uni = m.uniform_rho;
    d.field = [phi, rho, a, b, uni](double x) {
      const double L = uni ? rho(0.5 * (a + b)) * log_segment(x, a, b) : log_integral(rho, a, b, x);
      return -phi(x) + 2 * L;
    };
  }
  std::swap(d.c_low, d.c_high);
  if (!std::isnan(d.c_low)) d.c_low = 1.0 - d.c_low;
  if (!std::isnan(d.c_high)) d.c_high = 1.0 - d.c_high;
  if (!m.grid_x.empty()) d.fill_grid(static_cast<int>(m.grid_x.size()));
  return d;
}

double l1_distance(const EquilibriumMeasure& m1, const EquilibriumMeasure& m2, int M) {
  const double dx = (m1.b - m1.a) / M;
  double s = 0.0;
  for (int i = 0; i < M; ++i) {
    const double x = m1.a + (i + 0.5) * dx;
    s += std::abs(m1.density(x) - m2.density(x)) * dx;
  }
  return s;
}

void write_measure_csv(const EquilibriumMeasure& m, std::ostream& os, int M) {
  os << "x,density,constraint_lo,constraint_hi,region_tag\n";
  for (int i = 0; i < M; ++i) {
    const double x = m.a + (m.b - m.a) * (i + 0.5) / M;
    const int g = m.gap_index(x);
    const std::string tag = g < 0 ? "band" : gap_name(m.gap_types[static_cast<std::size_t>(g)]);
    os << fmt_double(x) << ',' << fmt_double(m.density(x)) << ",0," << fmt_double(m.upper_constraint(x)) << ','
       << tag << '\n';
  }
}

}  // namespace dopasym
