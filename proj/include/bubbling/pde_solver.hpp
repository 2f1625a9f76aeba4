#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bubbling/greens.hpp"
#include "bubbling/kirchhoff_routh.hpp"

namespace bubbling {

// Polar grid on a disk of radius R centred at the origin.  Ring i sits at
// s_i = (i + 1/2) h, h = 1 / (n_r - 1/2), so the last ring is the boundary
// s = 1 and no node lands on the origin.  Radii r(s) = R sinh(k s) / sinh(k)
// with k = asinh(R / scale) cluster rings at the scale; scale <= 0 is uniform.
struct Grid2D {
  int nr = 0, nth = 0;
  double radius = 1.0, scale = 0.0, h = 0.0, dth = 0.0;
  std::vector<double> r, rp, face;  // r(s_i), r'(s_i), (r / r') at s_{i+1/2}
  std::vector<double> theta;

  static Grid2D polar(int nr, int nth, double radius = 1.0, double scale = 0.0);
  static Grid2D for_domain(const DomainSpec& d, int nr, int nth, double scale = 0.0);

  int size() const { return nr * nth; }
  int interior() const { return (nr - 1) * nth; }
  int index(int i, int j) const { return i * nth + j; }
  bool on_boundary(int k) const { return k >= interior(); }
  Point node(int k) const;
  double volume(int k) const;  // r r' h dtheta
};

struct Field2D {
  std::shared_ptr<const Grid2D> grid;
  Eigen::VectorXd values;

  static Field2D zeros(std::shared_ptr<const Grid2D> g);
  // samples f at every node; boundary nodes are set to exactly zero
  static Field2D sample(std::shared_ptr<const Grid2D> g, const std::function<double(const Point&)>& f);
  double max_abs() const { return values.cwiseAbs().maxCoeff(); }
};

// discrete Laplacian at interior nodes, zero on the boundary ring
Field2D laplacian(const Field2D& u);

// w(u) = u |u|^{p-2} e^{|u|^p}; w(0) = 0.  Throws std::overflow_error above exp(700).
double pde_nonlinearity(double u, double p);
// w'(u) with |u| floored at u_min where p < 2
double pde_nonlinearity_prime(double u, double p, double u_min);

// Delta_h u + lambda w(u) at interior nodes
Field2D nonlinear_residual(const Field2D& u, double p, double lambda);

// d(residual)/du over interior nodes: L_h + lambda diag(w'(u))
Eigen::SparseMatrix<double> residual_jacobian(const Field2D& u, double p, double lambda, double u_min = 0.0);

// per-node rounding error bound of nonlinear_residual: machine eps times the
// sum of the absolute stencil contributions
Eigen::VectorXd roundoff_floor(const Field2D& u, double p, double lambda);

struct NewtonConfig {
  int max_iter = 30;
  double tol = 1e-8;             // |residual| <= tol * max |lambda w(u)| + roundoff_factor * floor, per node
  double roundoff_factor = 64.0;
  double damping_floor = 1.0 / 1024.0;
  double armijo = 1e-4;
  double u_min_rel = 1e-8;      // nodal-set floor relative to max |u|
  int iterative_above = 500000; // unknowns beyond which BiCGSTAB + ILUT replaces LDLT
};

struct NodalSummary {
  int components = 0;
  int positive = 0, negative = 0;
  bool boundary_touching = false;
};

struct ParameterPoint {
  double p = 1.0, lambda = 0.0;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double residual_max = 0.0, residual_l2 = 0.0;
  double nonlinear_scale = 0.0;
  double roundoff_floor = 0.0;  // largest per-node rounding bound at the final iterate
  std::vector<double> damping;           // accepted step length per iteration
  std::vector<double> residual_history;  // weighted L2 norm, starting with the seed
  std::vector<ParameterPoint> path;
  NodalSummary nodal;
  std::string solver;  // linear solver used last
  std::string message;
};

struct SolveError : std::runtime_error {
  SolveError(const std::string& what, SolveReport r, Field2D u)
      : std::runtime_error(what), report(std::move(r)), snapshot(std::move(u)) {}
  SolveReport report;
  Field2D snapshot;
};

// Damped Newton with a backtracking line search on the volume-weighted L2 residual.
std::pair<Field2D, SolveReport> newton_solve(const Field2D& seed, double p, double lambda, const NewtonConfig& cfg = {});

// Walks the path, seeding each solve with the previous solution.  With drift,
// the seed also moves by drift(next) - drift(previous) (typically the ansatz).
std::pair<Field2D, SolveReport> continuation(const Field2D& seed, const std::vector<ParameterPoint>& path,
                                             const NewtonConfig& cfg = {},
                                             const std::function<Field2D(const ParameterPoint&)>& drift = {});

NodalSummary nodal_analysis(const Field2D& u);

// Sum_i a_i dG(., xi_i)/dnu sampled at the boundary nodes and its integral.
struct BoundaryFlux {
  double integral = 0.0;
  double min = 0.0, max = 0.0;
  bool changes_sign = false;
  std::vector<double> values;
};

BoundaryFlux boundary_flux(const GreenBackend& g, const Config& xi, const Signs& a);

// Radial solutions of -Delta u = eps^2 e^u on the disk of radius R:
// u = log(8 delta / (eps^2 (1 + delta r^2)^2)) with 8 delta = eps^2 (1 + delta R^2)^2.
struct LiouvilleRadial {
  double eps = 0.0, radius = 1.0, delta = 0.0;
  static LiouvilleRadial concentrated(double eps, double radius = 1.0);
  static LiouvilleRadial flat(double eps, double radius = 1.0);
  double operator()(double r) const;
};

}  // namespace bubbling
