#include "bubbling/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace bubbling {

QuadResult integrate(const Integrand& f, double a, double b, double tol) {
  QuadResult r;
  if (a == b) return r;
  double l1 = 0.0;
  r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol, &r.error, &l1);
  return r;
}

QuadResult integrate_half_line(const Integrand& f, double tol, double t_max) {
  QuadResult total = integrate(f, 0.0, 1.0, tol);
  double a = 1.0;
  while (a < t_max) {
    double b = a * 10.0;
    QuadResult piece = integrate(f, a, b, tol);
    total.value += piece.value;
    total.error += piece.error;
    a = b;
  }
  // |f| ~ C log^k t / t^3 beyond t_max, so the tail is about |f(T)| T / 2.
  total.error += 0.5 * std::fabs(f(a)) * a;
  return total;
}

void gauss_legendre(int n, double* x, double* w) {
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace bubbling
