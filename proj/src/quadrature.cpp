#include "dopasym/quadrature.hpp"

#include "dopasym/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

namespace dopasym {

namespace {

boost::math::quadrature::tanh_sinh<double>& rule() {
  static boost::math::quadrature::tanh_sinh<double> ts(15);
  return ts;
}

}  // namespace

double integrate_endpoint_singular(const Integrand& f, double lo, double hi, double tol) {
  if (!(hi > lo)) return 0.0;
  // Abscissae may round onto the endpoint itself; a log singularity there carries zero weight.
  auto g = [&f](double t) {
    const double v = f(t);
    return std::isfinite(v) ? v : 0.0;
  };
  double err = 0.0;
  const double v = rule().integrate(g, lo, hi, tol, &err);
  if (!std::isfinite(v)) throw NumericalError("QuadratureFailure", "non-finite integral");
  return v;
}

double integrate_smooth(const Integrand& f, double lo, double hi, double tol) {
  return integrate_endpoint_singular(f, lo, hi, tol);
}

double integrate_split(const Integrand& f, double lo, double hi, double x, double tol) {
  if (x > lo && x < hi) return integrate_endpoint_singular(f, lo, x, tol) + integrate_endpoint_singular(f, x, hi, tol);
  return integrate_endpoint_singular(f, lo, hi, tol);
}

}  // namespace dopasym
