#include "dopasym/hexagon.hpp"

#include "dopasym/errors.hpp"
#include "dopasym/io.hpp"
#include "dopasym/kernels.hpp"
#include "dopasym/orthopoly.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

namespace dopasym {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3Half = std::sqrt(3.0) / 2;

// Exact integer check for n * x.
int scaled_side(double x, int n, const char* what) {
  const double v = x * n;
  const long r = std::lround(v);
  if (r < 0 || std::abs(v - static_cast<double>(r)) > 1e-9)
    throw ValidationError("BadSpec", std::string(what) + " * n is not an integer");
  return static_cast<int>(r);
}

struct Enumerator {
  int a, b, c, lines;
  std::vector<int> cur;  // Y for the current prefix of lines
  std::vector<Tiling>* out;

  int end_of(int i) const { return 2 * i + (a - b); }

  void line(int m) {
    if (m == lines - 1) {
      Tiling t;
      t.a = a, t.b = b, t.c = c;
      t.Y = cur;
      out->push_back(std::move(t));
      return;
    }
    step(m, 0);
  }

  // Chooses the step of path i between line m and m + 1.
  void step(int m, int i) {
    if (i == c) {
      line(m + 1);
      return;
    }
    const int y = cur[static_cast<std::size_t>(m * c + i)];
    const int left = lines - 2 - m;  // steps remaining after this one
    for (int d : {-1, 1}) {
      const int ny = y + d;
      if (std::abs(end_of(i) - ny) > left) continue;
      if (i > 0 && ny - cur[static_cast<std::size_t>((m + 1) * c + i - 1)] < 2) continue;
      cur[static_cast<std::size_t>((m + 1) * c + i)] = ny;
      step(m, i + 1);
    }
  }
};

}  // namespace

void HexagonSpec::validate() const {
  if (a < 1 || b < 1 || c < 1) throw ValidationError("BadSpec", "side lengths must be positive");
  if (m < 1 || m > a + b - 1) throw ValidationError("BadSpec", "line index must lie in [1, a+b-1]");
}

HexagonSpec make_hexagon_spec(int a, int b, int c, int m) {
  HexagonSpec s{a, b, c, m};
  s.validate();
  return s;
}

HexagonEnsembles hexagon_ensemble(const HexagonSpec& spec, int bits) {
  spec.validate();
  const int N = spec.N();
  const NodeSet nodes = uniform_nodes(N);
  HexagonEnsembles e;
  e.holes.weights = make_weights(FamilySpec::hahn(spec.b_m() + 1, spec.a_m() + 1), nodes, bits);
  e.holes.k = spec.holes();
  e.particles.weights = dual_weights(e.holes.weights);
  e.particles.k = spec.c;
  return e;
}

BigInt count_tilings(int a, int b, int c) {
  if (a < 0 || b < 0 || c < 0) throw ValidationError("BadSpec", "side lengths must be non-negative");
  using boost::multiprecision::cpp_rational;
  cpp_rational r = 1;
  for (int i = 1; i <= a; ++i)
    for (int j = 1; j <= b; ++j)
      for (int k = 1; k <= c; ++k) r *= cpp_rational(i + j + k - 1, i + j + k - 2);
  if (denominator(r) != 1) throw NumericalError("NonIntegral", "MacMahon product is not an integer");
  return numerator(r);
}

int Tiling::bottom2(int m) const { return -std::min(m, b) + std::max(0, m - b); }

int Tiling::column_size(int m) const {
  return c + ((a - std::abs(m - a)) + (b - std::abs(m - b))) / 2;
}

std::vector<int> Tiling::particles(int m) const {
  std::vector<int> p(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) p[static_cast<std::size_t>(i)] = (Yat(m, i) - bottom2(m)) / 2;
  return p;
}

std::vector<int> Tiling::holes(int m) const {
  const auto p = particles(m);
  std::vector<int> h;
  std::size_t j = 0;
  for (int x = 0; x < column_size(m); ++x) {
    if (j < p.size() && p[j] == x)
      ++j;
    else
      h.push_back(x);
  }
  return h;
}

std::vector<Tiling> enumerate_tilings(int a, int b, int c, std::size_t cap) {
  if (a < 1 || b < 1 || c < 1) throw ValidationError("BadSpec", "side lengths must be positive");
  if (count_tilings(a, b, c) > cap) throw ValidationError("TooLarge", "tiling count exceeds the enumeration cap");
  Enumerator e{a, b, c, a + b + 1, {}, nullptr};
  std::vector<Tiling> out;
  e.out = &out;
  e.cur.assign(static_cast<std::size_t>(e.lines * c), 0);
  for (int i = 0; i < c; ++i) e.cur[static_cast<std::size_t>(i)] = 2 * i;
  e.line(0);
  return out;
}

std::vector<double> hole_density(const std::vector<Tiling>& tilings, int m) {
  if (tilings.empty()) return {};
  const Tiling& t0 = tilings.front();
  if (m < 0 || m >= t0.lines()) throw ValidationError("BadSpec", "line index out of range");
  std::vector<double> d(static_cast<std::size_t>(t0.column_size(m)), 0.0);
  for (const auto& t : tilings)
    for (int h : t.holes(m)) d[static_cast<std::size_t>(h)] += 1.0;
  for (auto& v : d) v /= static_cast<double>(tilings.size());
  return d;
}

std::vector<Rhombus> rhombi(const Tiling& t) {
  std::vector<Rhombus> out;
  for (int m = 0; m + 1 < t.lines(); ++m) {
    const double x0 = m * kSqrt3Half, x1 = (m + 1) * kSqrt3Half;
    for (int i = 0; i < t.c; ++i) {
      const double y0 = t.Yat(m, i) / 2.0, y1 = t.Yat(m + 1, i) / 2.0;
      Rhombus r;
      r.type = y1 > y0 ? 1 : 2;
      const double xs[4] = {x0, x1, x1, x0}, ys[4] = {y0, y1, y1 + 1, y0 + 1};
      std::copy(xs, xs + 4, r.x);
      std::copy(ys, ys + 4, r.y);
      out.push_back(r);
    }
  }
  for (int m = 1; m + 1 < t.lines(); ++m) {
    const double x = m * kSqrt3Half;
    for (int h : t.holes(m)) {
      const double y = t.bottom2(m) / 2.0 + h;
      Rhombus r;
      r.type = 3;
      const double xs[4] = {x, x + kSqrt3Half, x, x - kSqrt3Half}, ys[4] = {y, y + 0.5, y + 1, y + 0.5};
      std::copy(xs, xs + 4, r.x);
      std::copy(ys, ys + 4, r.y);
      out.push_back(r);
    }
  }
  return out;
}

void write_tiling_svg(const Tiling& t, std::ostream& os) {
  const double scale = 40.0, pad = 10.0;
  const double w = (t.a + t.b) * kSqrt3Half * scale + 2 * pad;
  const double ymin = -t.b / 2.0, ymax = t.c + t.a / 2.0;
  const double h = (ymax - ymin) * scale + 2 * pad;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_double(w) << "\" height=\"" << fmt_double(h)
     << "\">\n";
  static const char* fill[4] = {"", "yellow", "red", "blue"};
  for (const auto& r : rhombi(t)) {
    os << "<polygon fill=\"" << fill[r.type] << "\" stroke=\"black\" stroke-width=\"1\" points=\"";
    for (int j = 0; j < 4; ++j)
      os << (j ? " " : "") << fmt_double(pad + r.x[j] * scale) << ',' << fmt_double(pad + (ymax - r.y[j]) * scale);
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

std::vector<std::pair<double, double>> hexagon_vertices(double A, double B, double C) {
  const double h = kSqrt3Half;
  return {{0.0, 0.0},
          {B * h, -B / 2},
          {(A + B) * h, (A - B) / 2},
          {(A + B) * h, (A - B) / 2 + C},
          {A * h, A / 2 + C},
          {0.0, C}};
}

ArcticPoint arctic_point(double A, double B, double C, double tau) {
  if (!(A > 0 && B > 0 && C > 0)) throw ValidationError("BadSpec", "side lengths must be positive");
  if (!(tau > 0 && tau < A + B)) throw ValidationError("BadSpec", "tau must lie in (0, A+B)");
  ArcticPoint p;
  p.tau = tau;
  const double am = std::abs(tau - A), bm = std::abs(tau - B);
  const double len = C + (A - am) / 2 + (B - bm) / 2;
  // Seen from the bottom of the line, b_m enters the first Hahn parameter.
  p.A = bm / len;
  p.B = am / len;
  p.c = (len - C) / len;
  p.x = tau * kSqrt3Half;
  const auto [cA, cB] = hahn_critical_values(p.A, p.B);
  if (std::abs(p.c - cA) < 1e-9 || std::abs(p.c - cB) < 1e-9) {
    p.exceptional = true;
    return p;
  }
  std::tie(p.alpha, p.beta) = hahn_endpoints(p.A, p.B, p.c);
  p.lower = p.c > cA ? GapType::Saturated : GapType::Void;
  p.upper = p.c > cB ? GapType::Saturated : GapType::Void;
  const double bottom = -std::min(tau, B) / 2 + std::max(0.0, tau - B) / 2;
  p.y_alpha = bottom + len * p.alpha;
  p.y_beta = bottom + len * p.beta;
  return p;
}

std::vector<ArcticPoint> arctic_boundary(double A, double B, double C, const std::vector<double>& taus) {
  std::vector<ArcticPoint> out;
  out.reserve(taus.size());
  for (double t : taus) out.push_back(arctic_point(A, B, C, t));
  return out;
}

void write_arctic_csv(const std::vector<ArcticPoint>& pts, std::ostream& os) {
  os << "tau,A,B,c,alpha,beta,x,y_alpha,y_beta,lower,upper,exceptional\n";
  for (const auto& p : pts) {
    os << fmt_double(p.tau) << ',' << fmt_double(p.A) << ',' << fmt_double(p.B) << ',' << fmt_double(p.c) << ',';
    if (p.exceptional) {
      os << ",,,,,,,1\n";
      continue;
    }
    os << fmt_double(p.alpha) << ',' << fmt_double(p.beta) << ',' << fmt_double(p.x) << ',' << fmt_double(p.y_alpha)
       << ',' << fmt_double(p.y_beta) << ',' << gap_name(p.lower) << ',' << gap_name(p.upper) << ",0\n";
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t r) {
  std::uint64_t s = master ^ splitmix64(r);
  return splitmix64(s);
}

namespace {

KernelMatrix hole_kernel_for(const HexagonSpec& spec) {
  const auto e = hexagon_ensemble(spec);
  const int k = e.holes.k;
  const OrthoSystem sys = stieltjes_recurrence(e.holes.weights, std::min(k, spec.N() - 1));
  return cd_kernel(sys, k);
}

std::vector<std::vector<int>> draw_all(const KernelMatrix& K, int samples, std::uint64_t seed) {
  const ProjectionSampler sampler(K);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(samples));
  for (int r = 0; r < samples; ++r) {
    Rng rng(replica_seed(seed, static_cast<std::uint64_t>(r)));
    out[static_cast<std::size_t>(r)] = sampler.draw(rng);
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> sample_column_holes(const HexagonSpec& spec, int samples, std::uint64_t seed) {
  if (samples < 0) throw ValidationError("BadParams", "sample count must be non-negative");
  return draw_all(hole_kernel_for(spec), samples, seed);
}

EdgeStats edge_fluctuation_stats(double A, double B, double C, double tau, int n, int samples,
                                 std::uint64_t seed) {
  if (n < 1 || samples < 1) throw ValidationError("BadParams", "n and samples must be positive");
  const HexagonSpec spec = make_hexagon_spec(scaled_side(A, n, "A"), scaled_side(B, n, "B"),
                                             scaled_side(C, n, "C"), scaled_side(tau, n, "tau"));
  const int N = spec.N(), k = spec.holes();
  if (k < 1) throw ValidationError("BadSpec", "line carries no holes");
  const EquilibriumMeasure m =
      hahn_equilibrium(static_cast<double>(spec.b_m()) / N, static_cast<double>(spec.a_m()) / N,
                       static_cast<double>(k) / N);
  if (!m.one_band() || m.right_gap() != GapType::Void)
    throw ValidationError("WrongGapType", "upper gap of the hole ensemble is " + gap_name(m.right_gap()));

  EdgeStats st;
  st.n = n;
  st.spec = spec;
  st.beta = m.beta();
  st.scale = std::pow(kPi * N * m.c * m.edge_coefficient(false), 2.0 / 3.0);
  st.samples = samples;

  const auto draws = draw_all(hole_kernel_for(spec), samples, seed);
  std::map<int, int> top;
  for (const auto& d : draws) ++top[*std::max_element(d.begin(), d.end())];
  int acc = 0;
  double ks = 0.0;
  for (const auto& [pos, cnt] : top) {
    const double x = (pos + 0.5) / N;
    CdfPoint p;
    p.s = (x - st.beta) * st.scale;
    p.tracy_widom = tracy_widom_cdf(p.s);
    const double before = static_cast<double>(acc) / samples;
    acc += cnt;
    p.empirical = static_cast<double>(acc) / samples;
    ks = std::max({ks, std::abs(p.empirical - p.tracy_widom), std::abs(before - p.tracy_widom)});
    st.cdf.push_back(p);
  }
  st.ks = ks;
  return st;
}

std::vector<EdgeStats> edge_fluctuation_sweep(double A, double B, double C, double tau,
                                              const std::vector<int>& ns, int samples, std::uint64_t seed) {
  std::vector<EdgeStats> out;
  for (std::size_t i = 0; i < ns.size(); ++i)
    out.push_back(edge_fluctuation_stats(A, B, C, tau, ns[i], samples, replica_seed(seed, 1000003ULL * (i + 1))));
  return out;
}

void write_edge_stats_csv(const std::vector<EdgeStats>& rows, std::ostream& os) {
  os << "n,N,holes,beta,scale,samples,ks,s,empirical,tracy_widom\n";
  for (const auto& r : rows)
    for (const auto& p : r.cdf)
      os << r.n << ',' << r.spec.N() << ',' << r.spec.holes() << ',' << fmt_double(r.beta) << ','
         << fmt_double(r.scale) << ',' << r.samples << ',' << fmt_double(r.ks) << ',' << fmt_double(p.s) << ','
         << fmt_double(p.empirical) << ',' << fmt_double(p.tracy_widom) << '\n';
}

}  // namespace dopasym
