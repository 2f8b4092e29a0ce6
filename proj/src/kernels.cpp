#include "dopasym/kernels.hpp"

#include "dopasym/errors.hpp"
#include "dopasym/io.hpp"
#include "dopasym/special.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace dopasym {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd principal_minor(const KernelMatrix& K, const std::vector<int>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      M(i, j) = K.K(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return M;
}

void check_index(const KernelMatrix& K, int i) {
  if (i < 0 || i >= K.N) throw ValidationError("BadParams", "node index out of range");
}

}  // namespace

KernelMatrix cd_kernel(const OrthoSystem& sys, int k) {
  const int N = sys.N();
  if (k < 0 || k > sys.kmax + 1 || k > N) throw ValidationError("DegreeOutOfRange", "kernel rank exceeds kmax + 1");
  KernelMatrix out;
  out.N = N;
  out.k = k;
  out.nodes = sys.weights.nodes().nodes;
  out.K = Eigen::MatrixXd::Zero(N, N);
  if (k == 0) return out;
  PrecisionScope scope(sys.precision_bits);
  const auto& nodes = sys.weights.nodes();
  const auto& logw = sys.weights.log_weights();
  std::vector<Real> x(static_cast<std::size_t>(N)), pk(x.size()), pk1(x.size()), dk(x.size()), dk1(x.size()),
      sw(x.size());
  for (int i = 0; i < N; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    x[iu] = nodes.node_hp(i);
    const auto v = monic_with_derivative(sys, k, x[iu]);
    pk[iu] = v[static_cast<std::size_t>(k)].value;
    dk[iu] = v[static_cast<std::size_t>(k)].derivative;
    pk1[iu] = v[static_cast<std::size_t>(k - 1)].value;
    dk1[iu] = v[static_cast<std::size_t>(k - 1)].derivative;
    sw[iu] = exp(logw[iu] / 2);
  }
  const Real g = sys.gamma[static_cast<std::size_t>(k - 1)];
  const Real g2 = g * g;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real di = g2 * (dk[i] * pk1[i] - dk1[i] * pk[i]) * sw[i] * sw[i];
    out.K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = static_cast<double>(di);
    for (std::size_t j = 0; j < i; ++j) {
      const Real v = g2 * (pk[i] * pk1[j] - pk1[i] * pk[j]) / (x[i] - x[j]) * sw[i] * sw[j];
      const double vd = static_cast<double>(v);
      out.K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vd;
      out.K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = vd;
    }
  }
  return out;
}

KernelMatrix basis_kernel(const OrthoSystem& sys, int k) {
  if (sys.basis.size() < static_cast<std::size_t>(k))
    throw ValidationError("BadParams", "system was built without enough basis vectors");
  const int N = sys.N();
  KernelMatrix out;
  out.N = N;
  out.k = k;
  out.nodes = sys.weights.nodes().nodes;
  out.K = Eigen::MatrixXd::Zero(N, N);
  PrecisionScope scope(sys.precision_bits);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j) {
      Real s = 0;
      for (int l = 0; l < k; ++l) {
        const auto& row = sys.basis[static_cast<std::size_t>(l)];
        s += row[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(j)];
      }
      out.K(i, j) = out.K(j, i) = static_cast<double>(s);
    }
  return out;
}

KernelReport check_kernel(const KernelMatrix& K) {
  KernelReport r;
  r.symmetry = (K.K - K.K.transpose()).cwiseAbs().maxCoeff();
  r.projection = (K.K * K.K - K.K).cwiseAbs().maxCoeff();
  r.trace_error = std::abs(K.K.trace() - K.k);
  r.diagonal_min = K.K.diagonal().minCoeff();
  r.diagonal_max = K.K.diagonal().maxCoeff();
  return r;
}

double correlation(const KernelMatrix& K, const std::vector<int>& subset) {
  if (subset.empty()) return 1.0;
  for (int i : subset) check_index(K, i);
  std::vector<int> s = subset;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) return 0.0;
  return principal_minor(K, subset).determinant();
}

std::vector<double> occupation_distribution(const KernelMatrix& K, const std::vector<int>& B) {
  for (int i : B) check_index(K, i);
  std::vector<double> coef{1.0};
  if (B.empty()) return coef;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(principal_minor(K, B), Eigen::EigenvaluesOnly);
  // Coefficients of prod_j ((1 - lambda_j) + lambda_j z).
  for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
    const double l = std::clamp(es.eigenvalues()(j), 0.0, 1.0);
    std::vector<double> next(coef.size() + 1, 0.0);
    for (std::size_t m = 0; m < coef.size(); ++m) {
      next[m] += (1.0 - l) * coef[m];
      next[m + 1] += l * coef[m];
    }
    coef.swap(next);
  }
  return coef;
}

double occupation_prob(const KernelMatrix& K, const std::vector<int>& B, int m) {
  if (m < 0 || m > static_cast<int>(B.size())) throw ValidationError("BadParams", "m must lie in [0, |B|]");
  return occupation_distribution(K, B)[static_cast<std::size_t>(m)];
}

KernelMatrix hole_kernel(const KernelMatrix& K) {
  KernelMatrix out = K;
  out.k = K.N - K.k;
  for (int i = 0; i < K.N; ++i)
    for (int j = 0; j < K.N; ++j)
      out.K(i, j) = i == j ? 1.0 - K.K(i, i) : ((i + j + 1) % 2 == 0 ? 1.0 : -1.0) * K.K(i, j);
  return out;
}

double local_density(const EquilibriumMeasure& m, double x) { return m.c * m.density(x) / m.rho0(x); }

double sine_kernel(double q, int d) { return d == 0 ? q : std::sin(kPi * q * d) / (kPi * d); }

double sine_compare(const KernelMatrix& K, const EquilibriumMeasure& m, double x, int window) {
  if (m.gap_index(x) >= 0) throw ValidationError("BadParams", "sine comparison needs a band point");
  const auto it = std::lower_bound(K.nodes.begin(), K.nodes.end(), x);
  int i0 = static_cast<int>(it - K.nodes.begin());
  if (i0 > 0 && (i0 == K.N || x - K.nodes[static_cast<std::size_t>(i0 - 1)] < K.nodes[static_cast<std::size_t>(i0)] - x))
    --i0;
  const int lo = i0 - window, hi = i0 + window;
  if (lo < 0 || hi >= K.N || m.gap_index(K.nodes[static_cast<std::size_t>(lo)]) >= 0 ||
      m.gap_index(K.nodes[static_cast<std::size_t>(hi)]) >= 0)
    throw ValidationError("BadParams", "sine comparison window leaves the band");
  const double q = local_density(m, x);
  double dev = 0.0;
  for (int i = lo; i <= hi; ++i)
    for (int j = lo; j <= hi; ++j) dev = std::max(dev, std::abs(K.K(i, j) - sine_kernel(q, i - j)));
  return dev;
}

AiryComparison airy_compare(const KernelMatrix& K, const EquilibriumMeasure& m, Edge edge, double window) {
  const bool left = edge == Edge::Left;
  if ((left ? m.left_gap() : m.right_gap()) != GapType::Void)
    throw ValidationError("EdgeTypeMismatch", "Airy comparison needs a void-adjacent edge; use the hole kernel");
  const double e = left ? m.alpha() : m.beta();
  const double B = m.edge_coefficient(left);
  AiryComparison r;
  r.scale = std::pow(K.N * kPi * m.c * B, 2.0 / 3.0);
  const double factor = K.N * m.rho0(e) / r.scale;
  std::vector<int> idx;
  std::vector<double> xi;
  for (int i = 0; i < K.N; ++i) {
    const double t = (left ? -1.0 : 1.0) * r.scale * (K.nodes[static_cast<std::size_t>(i)] - e);
    if (std::abs(t) <= window) {
      idx.push_back(i);
      xi.push_back(t);
    }
  }
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const double d = std::abs(factor * K.K(idx[a], idx[b]) - airy_kernel(xi[a], xi[b]));
      r.deviation = std::max(r.deviation, d);
      ++r.pairs;
    }
  return r;
}

double tracy_widom_cdf(double s, int quad_points) {
  if (quad_points < 20) throw ValidationError("BadParams", "quad_points must be at least 20");
  const GaussRule g = gauss_legendre(quad_points);
  const int n = quad_points;
  std::vector<double> x(static_cast<std::size_t>(n)), sw(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = g.nodes[i];
    x[i] = s + 10.0 * (1.0 + t) / (1.0 - t);
    sw[i] = std::sqrt(g.weights[i] * 20.0 / ((1.0 - t) * (1.0 - t)));
  }
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const auto iu = static_cast<std::size_t>(i), ju = static_cast<std::size_t>(j);
      const double v = (i == j ? 1.0 : 0.0) - sw[iu] * airy_kernel(x[iu], x[ju]) * sw[ju];
      M(i, j) = M(j, i) = v;
    }
  return std::clamp(M.determinant(), 0.0, 1.0);
}

void write_tw_table_csv(std::ostream& os, int quad_points) {
  os << "s,F\n";
  for (int i = 0; i <= 200; ++i) {
    const double s = -6.0 + 0.05 * i;
    os << fmt_double(s) << ',' << fmt_double(tracy_widom_cdf(s, quad_points)) << '\n';
  }
}

ProjectionSampler::ProjectionSampler(const KernelMatrix& K) : K_(K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K.K, Eigen::EigenvaluesOnly);
  int rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (std::min(std::abs(l), std::abs(l - 1.0)) > 1e-6)
      throw NumericalError("RankDeficiency", "kernel is not a projection");
    rank += l > 0.5;
  }
  if (rank != K.k) throw NumericalError("RankDeficiency", "numerical rank differs from k");
}

std::vector<int> ProjectionSampler::draw(Rng& rng) const {
  const KernelMatrix& K = K_;
  // Sequential conditioning: pick i with probability proportional to the residual diagonal,
  // then remove the direction of column i.
  const int N = K.N;
  Eigen::VectorXd d = K.K.diagonal();
  Eigen::MatrixXd E(N, K.k);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(K.k));
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < K.k; ++t) {
    d = d.cwiseMax(0.0);
    for (int i : out) d(i) = 0.0;
    const double total = d.sum();
    double r = U(rng) * total;
    int pick = N - 1;
    for (int i = 0; i < N; ++i) {
      r -= d(i);
      if (r < 0 && d(i) > 0) {
        pick = i;
        break;
      }
    }
    while (d(pick) <= 0 && pick > 0) --pick;
    Eigen::VectorXd e = K.K.col(pick);
    for (int s = 0; s < t; ++s) e -= E.col(s) * E(pick, s);
    e /= std::sqrt(d(pick));
    E.col(t) = e;
    d -= e.cwiseProduct(e);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> sample_dpp(const KernelMatrix& K, Rng& rng) { return ProjectionSampler(K).draw(rng); }

std::vector<int> sample_dpp(const KernelMatrix& K, std::uint64_t seed) {
  Rng rng(seed);
  return sample_dpp(K, rng);
}

void write_kernel_csv(const KernelMatrix& K, std::ostream& os) {
  os << "i,j,K\n";
  for (int i = 0; i < K.N; ++i)
    for (int j = 0; j < K.N; ++j) os << i << ',' << j << ',' << fmt_double(K.K(i, j)) << '\n';
}

}  // namespace dopasym
