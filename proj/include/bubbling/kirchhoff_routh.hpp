#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bubbling/greens.hpp"

namespace bubbling {

using Config = std::vector<Point>;
using Signs = std::vector<int>;

// "+,-,+" or "1,-1,1"
Signs parse_signs(const std::string& text);
void check_signs(const Signs& a);

// phi_m = sum_i H(xi_i, xi_i) + sum_{i != k} a_i a_k G(xi_i, xi_k)
double phi_m(const GreenBackend& g, const Config& xi, const Signs& a);
// gradient ordered (x_1, y_1, x_2, y_2, ...)
Eigen::VectorXd grad_phi_m(const GreenBackend& g, const Config& xi, const Signs& a);
Eigen::MatrixXd hessian_phi_m(const GreenBackend& g, const Config& xi, const Signs& a, double step = 1e-4);

struct CriticalReport {
  Config points;
  Signs signs;
  double phi = 0.0;
  double grad_norm = 0.0;
  double fd_grad_norm = 0.0;  // central differences of phi at a second step size
  std::vector<double> eigenvalues;
  std::string classification;  // max, min, saddle, degenerate
  int degree = 0;              // 0 when the sampled test is inconclusive
  bool stable = false;
  bool gauge_fixed = false;    // disk rotation quotiented out
};

struct SearchOptions {
  int starts = 16;
  std::uint64_t seed = 7;
  int max_iters = 200;
  double grad_tol = 1e-8;
  double degeneracy = 1e-6;
};

// Classify a converged configuration (Hessian, degree test, FD check).
CriticalReport analyse_critical(const GreenBackend& g, const Config& xi, const Signs& a,
                                const SearchOptions& opt = {});

std::vector<CriticalReport> find_critical(const GreenBackend& g, const Signs& a, const SearchOptions& opt = {});

// Points restricted to the x_1-axis with alternating signs, ordered t_1 < ... < t_m.
CriticalReport find_critical_on_axis(const GreenBackend& g, int m, const SearchOptions& opt = {});

}  // namespace bubbling
