#pragma once

#include <functional>

namespace bubbling {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

using Integrand = std::function<double(double)>;

// Adaptive 31-point Gauss-Kronrod on [a, b]; tol is relative to the L1 norm.
QuadResult integrate(const Integrand& f, double a, double b, double tol = 1e-13);

// Integral over [0, inf) for integrands decaying like log^k(t)/t^3.  The
// range is split at decades up to t_max; the neglected tail is estimated
// from the decay law and folded into the error.
QuadResult integrate_half_line(const Integrand& f, double tol = 1e-13, double t_max = 1e14);

// Fixed n-point Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, double* nodes, double* weights);

}  // namespace bubbling
