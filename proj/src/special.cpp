#include "dopasym/special.hpp"

#include "dopasym/errors.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <utility>
#include <numbers>

namespace dopasym {

AiryValues airy(double x) {
  using namespace boost::math;
  return {airy_ai(x), airy_ai_prime(x), airy_bi(x), airy_bi_prime(x)};
}

namespace {

// Ai and Ai' only; Bi overflows long before Ai underflows.
std::pair<double, double> ai_pair(double x) {
  if (x > 100.0) return {0.0, 0.0};
  return {boost::math::airy_ai(x), boost::math::airy_ai_prime(x)};
}

}  // namespace

double airy_kernel(double x, double y) {
  if (std::abs(x - y) < 1e-7 * std::max(1.0, std::abs(x))) {
    // Confluent limit at the midpoint; the neglected term is O((x - y)^2).
    const double m = 0.5 * (x + y);
    const auto [ai, aip] = ai_pair(m);
    return aip * aip - m * ai * ai;
  }
  const auto [ax, apx] = ai_pair(x);
  const auto [ay, apy] = ai_pair(y);
  return (ax * apy - apx * ay) / (x - y);
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("BadParams", "Gauss rule needs n >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    r.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    r.weights[static_cast<std::size_t>(i)] = 2.0 * v * v;
  }
  return r;
}

double stirling_ratio(double z) {
  if (!(z > 0)) throw ValidationError("BadParams", "stirling_ratio needs z > 0");
  return std::exp(boost::math::lgamma(0.5 + z) - 0.5 * std::log(2 * std::numbers::pi) - z * std::log(z) + z);
}

}  // namespace dopasym
