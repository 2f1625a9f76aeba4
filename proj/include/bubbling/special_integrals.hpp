#pragma once

#include <string>
#include <vector>

#include "bubbling/quadrature.hpp"

namespace bubbling {

// Kernel functions on the half line t >= 0.
double psi0(double t);   // 8t(t^2-1)/(t^2+1)^3
double eta0(double t);   // log(1+t^2)
double zeta0(double t);  // 1/(1+t^2)
double upsilon_inf(double r);  // log(8/(1+r^2)^2)

// theta0(t) = int_{t^2}^inf log(1+s)/(s(s+1)) ds by adaptive quadrature.
double theta0(double t);
// Same function through the dilogarithm: pi^2/6 + Li2(-t^2) + log^2(1+t^2)/2.
double theta0_dilog(double t);

// int_0^inf psi0(t) g(t) dt.
QuadResult psi0_moment(const Integrand& g, double tol = 1e-13);

// int_{R^2} 8/(1+|y|^2)^2 g(|y|) dy for radial g.
QuadResult bubble_moment(const Integrand& g, double tol = 1e-13);

// Riemann zeta by direct summation of n terms plus an Euler-Maclaurin tail.
double zeta_series(int s, long n_terms = 10'000'000);

struct IdentityRecord {
  std::string name;
  std::string group;
  std::string closed_form;
  double closed = 0.0;
  double quadrature = 0.0;
  double quad_error = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  bool pass = false;
  std::string note;
};

struct CatalogOptions {
  std::string filter = "*";
  double tol = 1e-8;
  double quad_tol = 1e-13;
};

std::vector<IdentityRecord> verify_catalog(const CatalogOptions& opt = {});

struct AperyBackout {
  double moment_eta2_theta = 0.0;
  double moment_eta2_zeta_theta = 0.0;
  double zeta3 = 0.0;
  double zeta4 = 0.0;
};

// Solve the two theta0 moment identities that carry zeta(3), zeta(4).
AperyBackout apery_backout(double quad_tol = 1e-13);

bool glob_match(const std::string& pattern, const std::string& text);

}  // namespace bubbling
