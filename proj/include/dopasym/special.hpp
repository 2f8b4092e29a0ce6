#pragma once

#include <vector>

namespace dopasym {

struct AiryValues {
  double ai, aip, bi, bip;
};

AiryValues airy(double x);

// Airy kernel (Ai(x)Ai'(y) - Ai'(x)Ai(y))/(x - y), with the confluent limit Ai'(x)^2 - x Ai(x)^2.
double airy_kernel(double x, double y);

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1] from the eigenproblem of the Jacobi matrix.
GaussRule gauss_legendre(int n);

// Gamma(1/2 + z) / (sqrt(2 pi) z^z e^{-z}); tends to 1 as z grows.
double stirling_ratio(double z);

}  // namespace dopasym
