#include "dopasym/outer_model.hpp"

#include "dopasym/errors.hpp"
#include "dopasym/io.hpp"
#include "dopasym/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace dopasym {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

// Complex line integral of f over s = start + t * dir, t in [0, 1].
template <class F>
Complex segment_integral(F f, Complex start, Complex dir) {
  auto re = [&](double t) { return (f(start + t * dir) * dir).real(); };
  auto im = [&](double t) { return (f(start + t * dir) * dir).imag(); };
  return {integrate_endpoint_singular(re, 0.0, 1.0, 1e-13), integrate_endpoint_singular(im, 0.0, 1.0, 1e-13)};
}

// Integral of f from start to start + infinity along the real direction.
template <class F>
Complex tail_integral(F f, Complex start) {
  auto g = [&](double t) {
    const double w = 1.0 - t;
    return f(start + t / w) / (w * w);
  };
  auto re = [&](double t) { return g(t).real(); };
  auto im = [&](double t) { return g(t).imag(); };
  return {integrate_endpoint_singular(re, 0.0, 1.0, 1e-13), integrate_endpoint_singular(im, 0.0, 1.0, 1e-13)};
}

Complex split_complex(const std::function<Complex(double)>& f, double lo, double hi, double x) {
  auto re = [&](double y) { return f(y).real(); };
  auto im = [&](double y) { return f(y).imag(); };
  return {integrate_split(re, lo, hi, x), integrate_split(im, lo, hi, x)};
}

// (z - t) log(z - t), zero at t = z.
Complex xlogx(Complex w) { return w == Complex(0.0, 0.0) ? Complex(0.0, 0.0) : w * std::log(w); }

}  // namespace

OuterModel::OuterModel(EquilibriumMeasure m, RealFn eta, double kappa, int N, RealFn eta_prime)
    : m_(std::move(m)), eta_(std::move(eta)), eta_prime_(std::move(eta_prime)), kappa_(kappa), N_(N) {
  if (!m_.one_band()) throw ValidationError("MultiBand", "outer model needs exactly one band");
  if (N < 1) throw ValidationError("BadParams", "N must be positive");
  if (!eta_) eta_ = [](double) { return 0.0; };
  alpha_ = m_.alpha();
  beta_ = m_.beta();
  mid_ = 0.5 * (alpha_ + beta_);
  gamma_ = eta_(beta_) - 2.0 * h(Complex(beta_, 0.0)).real();
}

Complex OuterModel::R(Complex z) const { return std::sqrt(z - alpha_) * std::sqrt(z - beta_); }

Complex OuterModel::lambda(Complex z) const {
  double ph = (std::arg(z - alpha_) - std::arg(z - beta_)) / 4.0;
  if (z.imag() < 0) ph -= kPi / 2;
  const double mod = std::pow(std::abs(z - alpha_) / std::abs(z - beta_), 0.25);
  return std::polar(mod, ph);
}

Complex OuterModel::u(Complex z) const {
  const Complex l = lambda(z);
  return (l + 1.0 / l) / 2.0;
}

Complex OuterModel::v(Complex z) const {
  const Complex l = lambda(z);
  return (l - 1.0 / l) / (2.0 * kI);
}

Complex OuterModel::hprime(Complex s) const { return hprime_with_root(s, R(s)); }

Complex OuterModel::hprime_with_root(Complex s, Complex r) const {
  Complex out = kappa_ / r;
  if (eta_prime_) {
    auto f = [&](double x) {
      return eta_prime_(x) * std::sqrt((x - alpha_) * (beta_ - x)) / (Complex(x, 0.0) - s);
    };
    auto re = [&](double x) { return f(x).real(); };
    auto im = [&](double x) { return f(x).imag(); };
    const Complex cauchy(integrate_endpoint_singular(re, alpha_, beta_, 1e-13),
                         integrate_endpoint_singular(im, alpha_, beta_, 1e-13));
    out += cauchy / (2.0 * kPi * r);
  }
  return out;
}

Complex OuterModel::h(Complex z) const {
  if (eta_prime_) return h_quadrature(z);
  if (kappa_ == 0.0) return {0.0, 0.0};
  return kappa_ * (std::log(z - mid_ + R(z)) - std::log(2.0));
}

Complex OuterModel::h_quadrature(Complex z) const {
  if (z.imag() == 0.0 && z.real() < beta_)
    throw ValidationError("BadParams", "h is not defined on the cut (-inf, beta)");
  auto integrand = [&](Complex s) { return kappa_ / s - hprime(s); };
  const Complex anchor(beta_ + 10.0 * (beta_ - alpha_), z.imag());
  Complex total = kappa_ == 0.0 ? Complex(0.0, 0.0) : kappa_ * std::log(z);
  if (z.imag() == 0.0) {
    // s = z + w^2 keeps the square-root singularity at beta integrable to full accuracy.
    const double len = std::sqrt(anchor.real() - z.real());
    const double d0 = z.real() - beta_;
    auto g = [&](Complex w) {
      const Complex sp = z + w * w;
      // s - beta taken from the offset, not by cancellation.
      const Complex r = std::sqrt(sp - alpha_) * std::sqrt(d0 + w * w);
      return (kappa_ / sp - hprime_with_root(sp, r)) * 2.0 * w;
    };
    total += segment_integral(g, Complex(0.0, 0.0), Complex(len, 0.0));
  } else if (anchor != z) {
    total += segment_integral(integrand, z, anchor - z);
  }
  total += tail_integral(integrand, anchor);
  return total;
}

Complex OuterModel::W(Complex z) const {
  const Complex e = std::exp(h(z));
  return z.imag() >= 0 ? u(z) * e : -v(z) * e;
}

Complex OuterModel::Z(Complex z) const {
  const Complex e = std::exp(-h(z));
  return z.imag() >= 0 ? kI * v(z) * e : kI * u(z) * e;
}

Complex OuterModel::L(Complex z) const {
  const double c = m_.c;
  const double xr = z.real();
  auto band = [&](double y) { return std::log(z - y) * m_.band_density(y); };
  Complex s = c * split_complex(band, alpha_, beta_, xr);
  auto saturated = [&](double lo, double hi) {
    if (m_.uniform_rho) {
      const double r0 = m_.rho0(0.5 * (lo + hi));
      return r0 * (xlogx(z - lo) - xlogx(z - hi) - (hi - lo));
    }
    auto f = [&](double y) { return std::log(z - y) * m_.rho0(y); };
    return split_complex(f, lo, hi, xr);
  };
  if (m_.left_gap() == GapType::Saturated) s += saturated(m_.a, alpha_);
  if (m_.right_gap() == GapType::Saturated) s += saturated(beta_, m_.b);
  return s;
}

Complex OuterModel::L_plus(double x) const {
  return {m_.log_potential(x), kPi * m_.c * mass_right(x)};
}

Complex OuterModel::L_minus(double x) const { return std::conj(L_plus(x)); }

double OuterModel::variation(double x) const {
  if (!m_.field) throw ValidationError("BadParams", "measure carries no external field");
  return -2.0 * m_.log_potential(x) + m_.field(x);
}

double OuterModel::theta_gap(Edge side) const { return side == Edge::Left ? -2.0 * kPi * m_.c : 0.0; }

double OuterModel::theta0(double x) const {
  if (x >= m_.b) return 0.0;
  if (m_.uniform_rho) return 2.0 * kPi * (m_.b - x) * m_.rho0(0.5 * (m_.a + m_.b));
  return 2.0 * kPi * integrate_smooth(m_.rho0, x, m_.b);
}

double OuterModel::tau(Edge side, double x) const {
  const bool left = side == Edge::Left;
  const GapType gap = left ? m_.left_gap() : m_.right_gap();
  const double e = left ? alpha_ : beta_;
  const bool in_band = left ? x > e : x < e;
  if (x == e) return 0.0;
  if (in_band) {
    const double lo = left ? alpha_ : x, hi = left ? x : beta_;
    double I = integrate_smooth(m_.band_density, lo, hi);
    if (gap == GapType::Saturated) I = integrate_smooth(m_.rho0, lo, hi) / m_.c - I;
    return std::pow(2.0 * kPi * N_ * m_.c * std::max(I, 0.0), 2.0 / 3.0);
  }
  double xi = variation(x) - m_.ell;
  if (gap == GapType::Saturated) xi = -xi;
  return -std::pow(N_ * std::max(xi, 0.0), 2.0 / 3.0);
}

EdgeFactors OuterModel::H(Edge side, double x) const {
  const Complex E = (gamma_ - eta_(x) - kI * double(N_) * theta_gap(side)) / 2.0;
  const Complex w = W_plus(x) * std::exp(E), zz = Z_plus(x) * std::exp(-E);
  return {(w + zz) / std::sqrt(2.0), (w - zz) / std::sqrt(2.0)};
}

EdgeFactors OuterModel::H_from_parts(Edge side, double x) const {
  const Complex z(x, kTiny);
  const Complex E = (gamma_ - eta_(x) - kI * double(N_) * theta_gap(side)) / 2.0;
  const Complex hz = h(z);
  const Complex up = u(z) * std::exp(hz + E), vp = kI * v(z) * std::exp(-hz - E);
  return {(up + vp) / std::sqrt(2.0), (up - vp) / std::sqrt(2.0)};
}

BandPhase OuterModel::band_phase(double x) const {
  const double margin = 0.02 * (beta_ - alpha_);
  if (!(x > alpha_ + margin && x < beta_ - margin))
    throw ValidationError("TooCloseToEdge", "band phase needs a point well inside the band");
  const Complex w = W_plus(x);
  return {2.0 * std::abs(w), std::arg(w)};
}

OuterModel build_outer_model(const EquilibriumMeasure& m, RealFn eta, double kappa, int N) {
  return OuterModel(m, std::move(eta), kappa, N);
}

OuterModel build_outer_model(const EquilibriumMeasure& m, double eta, double kappa, int N) {
  return OuterModel(m, [eta](double) { return eta; }, kappa, N);
}

Potentials eval_potentials(const OuterModel& model, Complex z) {
  const auto& m = model.measure();
  Potentials p{};
  p.L = model.L(z);
  const double x = z.real();
  p.Lbar_gap = m.log_potential(x);
  p.variation = m.field ? model.variation(x) : std::nan("");
  p.Lbar_band = m.field ? (m.field(x) - m.ell) / 2.0 : std::nan("");
  if (x <= model.alpha())
    p.theta = model.theta_gap(Edge::Left);
  else if (x >= model.beta())
    p.theta = model.theta_gap(Edge::Right);
  else
    p.theta = -2.0 * kPi * m.c * model.mass_right(x);
  p.theta0 = model.theta0(x);
  return p;
}

double edge_map(const OuterModel& model, Edge side, GapType expected, double x) {
  const auto& m = model.measure();
  const GapType actual = side == Edge::Left ? m.left_gap() : m.right_gap();
  if (actual != expected) throw ValidationError("EdgeMismatch", "edge map type contradicts the gap type");
  return model.tau(side, x);
}

BandPhase band_phase(const OuterModel& model, double x) { return model.band_phase(x); }

void write_band_phase_csv(const OuterModel& model, std::ostream& os, int n) {
  os << "x,A,Phi\n";
  const double lo = model.alpha() + 0.021 * (model.beta() - model.alpha());
  const double hi = model.beta() - 0.021 * (model.beta() - model.alpha());
  for (int i = 0; i < n; ++i) {
    const double x = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1);
    const BandPhase bp = model.band_phase(x);
    os << fmt_double(x) << ',' << fmt_double(bp.amplitude) << ',' << fmt_double(bp.phase) << '\n';
  }
}

}  // namespace dopasym
