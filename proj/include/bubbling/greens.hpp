#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bubbling {

using Point = Eigen::Vector2d;

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainSpec {
  enum class Kind { unit_disk, parametric };
  Kind kind = Kind::unit_disk;
  double radius = 1.0;
  std::vector<Point> nodes;  // boundary samples at equispaced parameter values
  std::string name = "unit_disk";

  static DomainSpec disk(double radius = 1.0);
  static DomainSpec from_nodes(std::vector<Point> nodes, std::string name = "parametric");
  static DomainSpec ellipse(double a, double b, int n = 256);
  static DomainSpec circle_nodes(double radius, int n = 256);
  static DomainSpec from_json_text(const std::string& text);
  static DomainSpec from_file(const std::string& path);
  std::string to_json_text() const;
};

// Trigonometric interpolant of a closed curve sampled at t_k = 2 pi k / N.
class TrigCurve {
 public:
  TrigCurve() = default;
  explicit TrigCurve(const std::vector<Point>& nodes);
  Point eval(double t) const;
  Point d1(double t) const;
  Point d2(double t) const;
  double interpolate(const Eigen::VectorXd& samples, double t) const;
  Eigen::VectorXd interpolation_weights(double t) const;
  int size() const { return n_; }

 private:
  int n_ = 0;
  Eigen::VectorXd ax_, bx_, ay_, by_;
};

// Boundary discretisation used by the double-layer solver.
struct BoundaryGeometry {
  int n = 0;
  std::vector<Point> x, normal;
  std::vector<double> speed, curvature, weight, param;
  TrigCurve curve;
  double diameter = 0.0;
  double area = 0.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  double h_max = 0.0;  // largest node spacing

  // refined copy of the curve used for evaluation near the boundary
  int fine_factor = 8;
  std::vector<Point> fx, fnormal;
  std::vector<double> fweight;
  Eigen::MatrixXd upsample;  // coarse samples -> fine samples
  double condition_estimate = 0.0;

  // nearest boundary parameter to x, with its distance
  double nearest_param(const Point& p, double* dist = nullptr) const;
};

class HarmonicField {
 public:
  HarmonicField(std::shared_ptr<const BoundaryGeometry> g, Eigen::VectorXd density);
  double operator()(const Point& x) const;
  Point gradient(const Point& x, double h) const;
  const Eigen::VectorXd& density() const { return mu_; }

 private:
  std::shared_ptr<const BoundaryGeometry> g_;
  Eigen::VectorXd mu_;
  struct Fine;
  std::shared_ptr<Fine> fine_;
};

class GreenBackend {
 public:
  explicit GreenBackend(const DomainSpec& spec, int n_b = 256);

  const DomainSpec& spec() const { return spec_; }
  bool analytic() const { return spec_.kind == DomainSpec::Kind::unit_disk; }
  double diameter() const { return geom_->diameter; }
  double gradient_step() const { return 1e-5 * geom_->diameter; }
  const BoundaryGeometry& boundary() const { return *geom_; }

  // negative inside; magnitude is the distance to the boundary curve
  double signed_distance(const Point& x) const;
  bool contains(const Point& x) const;
  double boundary_distance(const Point& x) const;

  double green(const Point& x, const Point& y) const;
  double regular_part(const Point& x, const Point& y) const;
  double robin(const Point& y) const;
  Point grad_green(const Point& x, const Point& y) const;    // gradient in x
  Point grad_regular(const Point& x, const Point& y) const;  // gradient in x
  Point grad_robin(const Point& y) const;

  // H(., y) as a harmonic field (parametric: one back-substitution).
  HarmonicField regular_part_field(const Point& y) const;
  HarmonicField harmonic_extension(const std::function<double(const Point&)>& trace) const;

  // outward normal derivative of G(., y) at boundary node k
  double normal_derivative_green(int k, const Point& y) const;

 private:
  void check_closure(const Point& x, const char* what) const;
  void check_robin_point(const Point& y) const;
  DomainSpec spec_;
  std::shared_ptr<BoundaryGeometry> geom_;
};

}  // namespace bubbling
