#include "bubbling/special_integrals.hpp"

#include <gsl/gsl_sf_dilog.h>

#include <cmath>

namespace bubbling {

namespace {
const double kLog8 = std::log(8.0);

double theta_integrand_u(double u) {
  // s = e^u, ds/s = du
  double s = std::exp(u);
  return std::log1p(s) / (1.0 + s);
}

double theta_integrand_s(double s) {
  if (s == 0.0) return 1.0;
  return std::log1p(s) / (s * (1.0 + s));
}

// int_{e^u0}^inf log(1+s)/(s(s+1)) ds, tail beyond s = 1e32 added in closed form.
double theta_upper(double u0) {
  const double u_end = 32.0 * std::log(10.0);
  double v = 0.0;
  double a = u0;
  while (a < u_end) {
    double b = std::min(a + 8.0, u_end);
    v += integrate(theta_integrand_u, a, b, 1e-14).value;
    a = b;
  }
  double S = std::exp(u_end);
  return v + (std::log(S) + 1.0) / S;
}

double theta_one() {
  static const double v = theta_upper(0.0);
  return v;
}
}  // namespace

double psi0(double t) {
  double t2 = t * t;
  double d = t2 + 1.0;
  return 8.0 * t * (t2 - 1.0) / (d * d * d);
}

double eta0(double t) { return std::log1p(t * t); }

double zeta0(double t) { return 1.0 / (1.0 + t * t); }

double upsilon_inf(double r) { return kLog8 - 2.0 * std::log1p(r * r); }

double theta0(double t) {
  double x = t * t;
  if (x < 1.0) return theta_one() + integrate(theta_integrand_s, x, 1.0, 1e-14).value;
  return theta_upper(std::log(x));
}

double theta0_dilog(double t) {
  double x = t * t;
  if (x <= 1.0) {
    double l = std::log1p(x);
    return M_PI * M_PI / 6.0 + gsl_sf_dilog(-x) + 0.5 * l * l;
  }
  // inversion Li2(-x) = -pi^2/6 - log^2(x)/2 - Li2(-1/x) avoids cancellation
  double lx = std::log(x);
  return 0.5 * std::log1p(1.0 / x) * (std::log1p(x) + lx) - gsl_sf_dilog(-1.0 / x);
}

QuadResult psi0_moment(const Integrand& g, double tol) {
  return integrate_half_line([&](double t) { return psi0(t) * g(t); }, tol);
}

QuadResult bubble_moment(const Integrand& g, double tol) {
  QuadResult r = integrate_half_line(
      [&](double t) {
        double d = 1.0 + t * t;
        return t * 8.0 / (d * d) * g(t);
      },
      tol);
  r.value *= 2.0 * M_PI;
  r.error *= 2.0 * M_PI;
  return r;
}

double zeta_series(int s, long n_terms) {
  double sum = 0.0;
  for (long n = n_terms; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
  double N = static_cast<double>(n_terms);
  // Euler-Maclaurin for sum_{n > N} n^-s
  double tail = std::pow(N, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(N, -s) + s / 12.0 * std::pow(N, -s - 1.0) -
                s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(N, -s - 3.0);
  return sum + tail;
}

bool glob_match(const std::string& pat, const std::string& txt) {
  size_t p = 0, t = 0, star = std::string::npos, mark = 0;
  while (t < txt.size()) {
    if (p < pat.size() && (pat[p] == '?' || pat[p] == txt[t])) {
      ++p;
      ++t;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

}  // namespace bubbling
