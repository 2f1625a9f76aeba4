#pragma once

#include <functional>
#include <vector>

#include "bubbling/ansatz.hpp"

namespace bubbling {

struct DomainQuadrature {
  int angular = 64;    // rays per bubble
  double panel = 0.5;  // panel width in s = asinh(rho / mu)
  int gl = 16;         // Gauss-Legendre points per panel
};

// Integrals over Omega_eps (y = x / eps) of k functions evaluated together.
// Each bubble owns a polar patch weighted by the partition of unity
// b_i / sum_k b_k, b_i = mu_i^2 / (mu_i^2 + |y - xi'_i|^2)^2.  The domain must
// be star-shaped about every xi_i.
std::vector<double> integrate_rescaled(const Ansatz& an, int k,
                                       const std::function<void(const Site& y, double* out)>& g,
                                       const DomainQuadrature& q = {});

struct EnergyReport {
  double J = 0.0;            // J_lambda(U_xi)
  double scaled = 0.0;       // p^2 gamma^{2(p-1)} J
  double dirichlet = 0.0;    // (1/2) int |grad V|^2 dy, through int (-Delta V)(V + p gamma^p)
  double exponential = 0.0;  // int exp(gamma^p(|1 + V/(p gamma^p)|^p - 1)) dy
  double closed_scaled = 0.0;  // 4pi[m(4|log eps| - 4 + 2 log 8) - 8pi phi_m]
  double closed = 0.0;         // the same divided by p^2 gamma^{2(p-1)}
  double discrepancy = 0.0;    // scaled - closed_scaled
  double phi = 0.0;
  double log_eps = 0.0;        // |log eps|
};

EnergyReport j_lambda(const Ansatz& an, const DomainQuadrature& q = {});

struct MomentPair {
  double quadrature = 0.0;
  double closed = 0.0;
};

// Bubble-weighted radial moments int e^{omega_mu} (...) over R^2 with
// A1 = omega_mu, B1 = w1 + omega^2/2, A2 = w1 + (p-2)/(2(p-1)) omega^2,
// B2 = w2 + omega w1 + (p-2)/(6(p-1)) omega^3.  A2, B2 terms are NaN at p = 1.
struct EnergyMoments {
  double p = 0.0, mu = 0.0;
  MomentPair B1;
  MomentPair pA1_B1;   // p A1 + (p-1) B1
  MomentPair A1B1_B1;  // A1 B1 + B1
  MomentPair A2_A1B1;  // A2 + A1 B1
  MomentPair B2_B1sq;  // B2 + B1^2 / 2
  double vanishing_combo = 0.0;  // (2-p)/p int B1 + (2/p) int [p A1 + (p-1) B1], identically 0
  double four_combo = 0.0;       // (p-1)/(8pi)[int(B2 + B1^2/2) + 2 int(A1B1 + B1)] + (p-2)/(16pi)^2 (int B1)^2 = 4
};

EnergyMoments energy_moments(double p, double mu, const RadialGridOptions& opt = {});

struct BetaReport {
  double p = 0.0;
  int m = 0;
  double gamma = 0.0;
  double direct = 0.0;    // (lambda p/2)(int e^{|u|^p} - 1)^{(2-p)/p}(int |u|^p e^{|u|^p})^{2(p-1)/p}
  double formula = 0.0;   // moment expansion
  double deviation = 0.0;          // direct - 4 pi m
  double formula_deviation = 0.0;  // formula - 4 pi m
  double scaled_deviation = 0.0;   // (direct - 4 pi m) gamma^{2p} / (4 pi m)
  double predicted = 0.0;          // 4(p-1)/p^2
  double first_integral = 0.0;     // int (e^{...} - e^{-gamma^p}) dy
  double second_integral = 0.0;    // int |q|^p e^{...} dy
};

BetaReport beta_lambda(const Ansatz& an, const DomainQuadrature& q = {});

}  // namespace bubbling
