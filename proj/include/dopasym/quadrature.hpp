#pragma once

#include <functional>

namespace dopasym {

using Integrand = std::function<double(double)>;

// Double-exponential quadrature; tolerates integrable endpoint singularities.
double integrate_endpoint_singular(const Integrand& f, double lo, double hi, double tol = 1e-14);
// Same rule, for integrands with square-root behaviour at the ends.
double integrate_smooth(const Integrand& f, double lo, double hi, double tol = 1e-14);
// Splits at x when x lies inside (lo, hi), so a log singularity sits at an endpoint.
double integrate_split(const Integrand& f, double lo, double hi, double x, double tol = 1e-14);

}  // namespace dopasym
