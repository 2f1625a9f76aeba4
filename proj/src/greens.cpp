#include "bubbling/greens.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <sstream>

namespace bubbling {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kCondLimit = 1e10;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
  double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

int winding_number(const std::vector<Point>& poly, const Point& p) {
  int wn = 0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross(b - a, p - a) > 0) ++wn;
    } else {
      if (b.y() <= p.y() && cross(b - a, p - a) < 0) --wn;
    }
  }
  return wn;
}

double shoelace(const std::vector<Point>& poly) {
  double a = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

std::shared_ptr<BoundaryGeometry> build_geometry(std::vector<Point> nodes) {
  int n = static_cast<int>(nodes.size());
  if (n < 64 || n % 2 != 0) throw DomainError("boundary needs an even number of nodes, at least 64");
  for (const auto& p : nodes)
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) throw DomainError("non-finite boundary node");
  if (shoelace(nodes) < 0.0) std::reverse(nodes.begin() + 1, nodes.end());
  if (std::abs(shoelace(nodes)) == 0.0) throw DomainError("boundary encloses no area");
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(nodes[i], nodes[i + 1], nodes[j], nodes[(j + 1) % n]))
        throw DomainError("boundary curve is not simple");
    }

  auto g = std::make_shared<BoundaryGeometry>();
  g->n = n;
  g->x = nodes;
  g->curve = TrigCurve(nodes);
  g->normal.resize(n);
  g->speed.resize(n);
  g->curvature.resize(n);
  g->weight.resize(n);
  g->param.resize(n);
  g->area = shoelace(nodes);
  for (int j = 0; j < n; ++j) {
    double t = kTwoPi * j / n;
    Point d1 = g->curve.d1(t), d2 = g->curve.d2(t);
    double s = d1.norm();
    g->param[j] = t;
    g->speed[j] = s;
    g->normal[j] = Point(d1.y(), -d1.x()) / s;
    g->curvature[j] = cross(d1, d2) / (s * s * s);
    g->weight[j] = kTwoPi / n * s;
  }
  g->h_max = *std::max_element(g->weight.begin(), g->weight.end());
  int nf = g->fine_factor * n;
  g->fx.resize(nf);
  g->fnormal.resize(nf);
  g->fweight.resize(nf);
  g->upsample.resize(nf, n);
  for (int i = 0; i < nf; ++i) {
    double t = kTwoPi * i / nf;
    Point d1 = g->curve.d1(t);
    g->fx[i] = g->curve.eval(t);
    g->fnormal[i] = Point(d1.y(), -d1.x()) / d1.norm();
    g->fweight[i] = kTwoPi / nf * d1.norm();
    g->upsample.row(i) = g->curve.interpolation_weights(t).transpose();
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g->diameter = std::max(g->diameter, (nodes[i] - nodes[j]).norm());

  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double k;
      if (i == j) {
        k = g->curvature[j] / (2.0 * kTwoPi);
      } else {
        Point r = nodes[j] - nodes[i];
        k = r.dot(g->normal[j]) / (kTwoPi * r.squaredNorm());
      }
      A(i, j) = k * g->weight[j] + (i == j ? 0.5 : 0.0);
    }
  g->lu.compute(A);
  Eigen::MatrixXd inv = g->lu.inverse();
  g->condition_estimate = A.cwiseAbs().colwise().sum().maxCoeff() * inv.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(g->condition_estimate) || g->condition_estimate > kCondLimit)
    throw DomainError("double-layer system is singular or ill-conditioned");
  return g;
}

double dl_sum(const std::vector<Point>& xs, const std::vector<Point>& nrm, const std::vector<double>& w,
              const Eigen::VectorXd& mu, const Point& x, double mu0, double tiny2) {
  double s = 0.0;
  for (size_t j = 0; j < xs.size(); ++j) {
    Point r = xs[j] - x;
    double r2 = r.squaredNorm();
    if (r2 < tiny2) continue;
    s += r.dot(nrm[j]) / r2 * (mu[j] - mu0) * w[j];
  }
  return s / kTwoPi + mu0;
}

Point disk_conj_term(double R, const Point& x, const Point& y) {
  // gradient in x of log|R^2 - x conj(y)| is -y / conj(R^2 - x conj(y))
  std::complex<double> xc(x.x(), x.y()), yc(y.x(), y.y());
  std::complex<double> w = R * R - xc * std::conj(yc);
  std::complex<double> gr = -yc / std::conj(w);
  return Point(gr.real(), gr.imag());
}

}  // namespace

DomainSpec DomainSpec::disk(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("disk radius must be positive");
  DomainSpec s;
  s.kind = Kind::unit_disk;
  s.radius = radius;
  s.name = "unit_disk";
  return s;
}

DomainSpec DomainSpec::from_nodes(std::vector<Point> nodes, std::string name) {
  DomainSpec s;
  s.kind = Kind::parametric;
  s.nodes = std::move(nodes);
  s.name = std::move(name);
  return s;
}

DomainSpec DomainSpec::ellipse(double a, double b, int n) {
  std::vector<Point> pts(n);
  for (int j = 0; j < n; ++j) {
    double t = kTwoPi * j / n;
    pts[j] = Point(a * std::cos(t), b * std::sin(t));
  }
  return from_nodes(std::move(pts), "ellipse");
}

DomainSpec DomainSpec::circle_nodes(double radius, int n) {
  auto s = ellipse(radius, radius, n);
  s.name = "circle";
  return s;
}

DomainSpec DomainSpec::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw DomainError(std::string("domain file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind")) throw DomainError("domain description needs a \"kind\"");
  for (const auto& [key, value] : j.items())
    if (key != "kind" && key != "radius" && key != "nodes" && key != "name")
      throw DomainError("unknown key in domain description: " + key);
  if (!j["kind"].is_string()) throw DomainError("domain \"kind\" must be a string");
  std::string kind = j.at("kind").get<std::string>();
  DomainSpec s;
  if (kind == "unit_disk") {
    s = disk(j.value("radius", 1.0));
  } else if (kind == "parametric") {
    if (!j.contains("nodes") || !j["nodes"].is_array()) throw DomainError("parametric domain needs \"nodes\"");
    std::vector<Point> pts;
    for (const auto& p : j["nodes"]) {
      if (!p.is_array() || p.size() != 2) throw DomainError("each node must be [x, y]");
      pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    s = from_nodes(std::move(pts));
  } else {
    throw DomainError("unknown domain kind: " + kind);
  }
  if (j.contains("name")) s.name = j["name"].get<std::string>();
  return s;
}

DomainSpec DomainSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open domain file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string DomainSpec::to_json_text() const {
  nlohmann::ordered_json j;
  j["kind"] = kind == Kind::unit_disk ? "unit_disk" : "parametric";
  j["name"] = name;
  if (kind == Kind::unit_disk) {
    j["radius"] = radius;
  } else {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : nodes) arr.push_back({p.x(), p.y()});
    j["nodes"] = arr;
  }
  return j.dump();
}

TrigCurve::TrigCurve(const std::vector<Point>& nodes) : n_(static_cast<int>(nodes.size())) {
  int m = n_ / 2;
  ax_ = Eigen::VectorXd::Zero(m + 1);
  bx_ = Eigen::VectorXd::Zero(m + 1);
  ay_ = Eigen::VectorXd::Zero(m + 1);
  by_ = Eigen::VectorXd::Zero(m + 1);
  for (int k = 0; k <= m; ++k) {
    double sxc = 0, sxs = 0, syc = 0, sys = 0;
    for (int j = 0; j < n_; ++j) {
      double a = kTwoPi * static_cast<double>((static_cast<long>(k) * j) % n_) / n_;
      double c = std::cos(a), s = std::sin(a);
      sxc += nodes[j].x() * c;
      sxs += nodes[j].x() * s;
      syc += nodes[j].y() * c;
      sys += nodes[j].y() * s;
    }
    double scale = (k == 0 || k == m) ? 1.0 / n_ : 2.0 / n_;
    ax_[k] = scale * sxc;
    bx_[k] = scale * sxs;
    ay_[k] = scale * syc;
    by_[k] = scale * sys;
  }
}

namespace {
// sum_k k^d (a_k cos^(d) + b_k sin^(d)) evaluated by rotation; Nyquist term
// contributes to values only.
double trig_sum(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double t, int deriv) {
  int m = static_cast<int>(a.size()) - 1;
  std::complex<double> rot(std::cos(t), std::sin(t)), e(1.0, 0.0);
  double s = deriv == 0 ? a[0] : 0.0;
  for (int k = 1; k <= m; ++k) {
    e *= rot;
    if (k == m) {
      if (deriv == 0) s += a[k] * e.real();
      break;
    }
    double c = e.real(), sn = e.imag(), kk = k;
    switch (deriv) {
      case 0: s += a[k] * c + b[k] * sn; break;
      case 1: s += kk * (-a[k] * sn + b[k] * c); break;
      default: s += -kk * kk * (a[k] * c + b[k] * sn); break;
    }
  }
  return s;
}
}  // namespace

Point TrigCurve::eval(double t) const { return Point(trig_sum(ax_, bx_, t, 0), trig_sum(ay_, by_, t, 0)); }
Point TrigCurve::d1(double t) const { return Point(trig_sum(ax_, bx_, t, 1), trig_sum(ay_, by_, t, 1)); }
Point TrigCurve::d2(double t) const { return Point(trig_sum(ax_, bx_, t, 2), trig_sum(ay_, by_, t, 2)); }

Eigen::VectorXd TrigCurve::interpolation_weights(double t) const {
  // periodic sinc (Dirichlet kernel) for even n
  int n = n_;
  double h = kTwoPi / n;
  Eigen::VectorXd w(n);
  for (int j = 0; j < n; ++j) {
    double d = t - j * h;
    if (std::abs(std::sin(0.5 * d)) < 1e-14) {
      w.setZero();
      w[j] = 1.0;
      return w;
    }
    w[j] = std::sin(0.5 * n * d) / (n * std::tan(0.5 * d));
  }
  return w;
}

double TrigCurve::interpolate(const Eigen::VectorXd& v, double t) const { return interpolation_weights(t).dot(v); }

double BoundaryGeometry::nearest_param(const Point& p, double* dist) const {
  int jbest = 0;
  double best = INFINITY;
  for (int j = 0; j < n; ++j) {
    double d = (x[j] - p).squaredNorm();
    if (d < best) {
      best = d;
      jbest = j;
    }
  }
  double h = kTwoPi / n;
  double t = param[jbest];
  for (int it = 0; it < 30; ++it) {
    Point c = curve.eval(t) - p, c1 = curve.d1(t), c2 = curve.d2(t);
    double F = c.dot(c1), dF = c1.squaredNorm() + c.dot(c2);
    if (dF <= 0) dF = c1.squaredNorm();
    double step = std::clamp(F / dF, -h, h);
    t -= step;
    if (std::abs(step) < 1e-15) break;
  }
  if (dist) *dist = (curve.eval(t) - p).norm();
  return t;
}

struct HarmonicField::Fine {
  std::once_flag once;
  Eigen::VectorXd mu;
};

HarmonicField::HarmonicField(std::shared_ptr<const BoundaryGeometry> g, Eigen::VectorXd density)
    : g_(std::move(g)), mu_(std::move(density)), fine_(std::make_shared<Fine>()) {}

double HarmonicField::operator()(const Point& x) const {
  const BoundaryGeometry& g = *g_;
  double dmin2 = INFINITY;
  for (int j = 0; j < g.n; ++j) dmin2 = std::min(dmin2, (g.x[j] - x).squaredNorm());
  double tiny2 = 1e-18 * g.diameter * g.diameter;
  if (dmin2 > 36.0 * g.h_max * g.h_max) return dl_sum(g.x, g.normal, g.weight, mu_, x, 0.0, tiny2);
  // near the boundary: refined nodes plus subtraction of the density at the
  // closest boundary point (the double layer of a constant is exactly 1)
  std::call_once(fine_->once, [&] { fine_->mu = g.upsample * mu_; });
  double mu0 = g.curve.interpolate(mu_, g.nearest_param(x));
  return dl_sum(g.fx, g.fnormal, g.fweight, fine_->mu, x, mu0, tiny2);
}

Point HarmonicField::gradient(const Point& x, double h) const {
  Point ex(h, 0), ey(0, h);
  return Point(((*this)(x + ex) - (*this)(x - ex)) / (2 * h), ((*this)(x + ey) - (*this)(x - ey)) / (2 * h));
}

GreenBackend::GreenBackend(const DomainSpec& spec, int n_b) : spec_(spec) {
  if (spec_.kind == DomainSpec::Kind::unit_disk) {
    if (!(spec_.radius > 0.0)) throw DomainError("disk radius must be positive");
    geom_ = build_geometry(DomainSpec::circle_nodes(spec_.radius, n_b).nodes);
  } else {
    geom_ = build_geometry(spec_.nodes);
  }
}

double GreenBackend::signed_distance(const Point& x) const {
  if (analytic()) return x.norm() - spec_.radius;
  double d;
  geom_->nearest_param(x, &d);
  bool inside = winding_number(geom_->x, x) != 0;
  if (d < 2.0 * geom_->h_max) {
    double t = geom_->nearest_param(x);
    Point c1 = geom_->curve.d1(t);
    Point nrm = Point(c1.y(), -c1.x()).normalized();
    inside = (x - geom_->curve.eval(t)).dot(nrm) <= 0.0;
  }
  return inside ? -d : d;
}

bool GreenBackend::contains(const Point& x) const { return signed_distance(x) < 0.0; }

double GreenBackend::boundary_distance(const Point& x) const { return std::abs(signed_distance(x)); }

void GreenBackend::check_closure(const Point& x, const char* what) const {
  if (!std::isfinite(x.x()) || !std::isfinite(x.y())) throw DomainError(std::string(what) + " is not finite");
  if (signed_distance(x) > 1e-9 * diameter()) throw DomainError(std::string(what) + " lies outside the domain");
}

void GreenBackend::check_robin_point(const Point& y) const {
  check_closure(y, "point");
  if (signed_distance(y) > -1e-3 * diameter())
    throw DomainError("point is within 1e-3 diameter of the boundary");
}

HarmonicField GreenBackend::regular_part_field(const Point& y) const {
  Eigen::VectorXd g(geom_->n);
  for (int j = 0; j < geom_->n; ++j) g[j] = std::log((geom_->x[j] - y).norm()) / kTwoPi;
  return HarmonicField(geom_, geom_->lu.solve(g));
}

HarmonicField GreenBackend::harmonic_extension(const std::function<double(const Point&)>& trace) const {
  Eigen::VectorXd g(geom_->n);
  for (int j = 0; j < geom_->n; ++j) g[j] = trace(geom_->x[j]);
  return HarmonicField(geom_, geom_->lu.solve(g));
}

double GreenBackend::regular_part(const Point& x, const Point& y) const {
  check_closure(x, "x");
  check_closure(y, "y");
  if (analytic()) {
    double R = spec_.radius;
    std::complex<double> xc(x.x(), x.y()), yc(y.x(), y.y());
    return std::log(std::abs(R * R - xc * std::conj(yc)) / R) / kTwoPi;
  }
  return regular_part_field(y)(x);
}

double GreenBackend::green(const Point& x, const Point& y) const {
  double r = (x - y).norm();
  if (r < 1e-12 * diameter()) throw DomainError("coincident points");
  return -std::log(r) / kTwoPi + regular_part(x, y);
}

double GreenBackend::robin(const Point& y) const {
  check_robin_point(y);
  if (analytic()) {
    double R = spec_.radius;
    return std::log((R * R - y.squaredNorm()) / R) / kTwoPi;
  }
  return regular_part_field(y)(y);
}

Point GreenBackend::grad_regular(const Point& x, const Point& y) const {
  check_closure(x, "x");
  check_closure(y, "y");
  if (analytic()) return disk_conj_term(spec_.radius, x, y) / kTwoPi;
  return regular_part_field(y).gradient(x, gradient_step());
}

Point GreenBackend::grad_green(const Point& x, const Point& y) const {
  Point r = x - y;
  double r2 = r.squaredNorm();
  if (r2 < 1e-24 * diameter() * diameter()) throw DomainError("coincident points");
  return -r / (kTwoPi * r2) + grad_regular(x, y);
}

Point GreenBackend::grad_robin(const Point& y) const {
  check_robin_point(y);
  if (analytic()) {
    double R = spec_.radius;
    return -y / (M_PI * (R * R - y.squaredNorm()));
  }
  // H is symmetric, so grad R(y) = 2 grad_x H(x, y) at x = y
  return 2.0 * regular_part_field(y).gradient(y, gradient_step());
}

double GreenBackend::normal_derivative_green(int k, const Point& y) const {
  const Point& xb = geom_->x[k];
  const Point& nu = geom_->normal[k];
  if (analytic()) {
    double R = spec_.radius;
    return -(R * R - y.squaredNorm()) / (kTwoPi * R * (xb - y).squaredNorm());
  }
  Point r = xb - y;
  double singular = -r.dot(nu) / (kTwoPi * r.squaredNorm());
  HarmonicField H = regular_part_field(y);
  double h = 0.5 * geom_->h_max;
  double f[5] = {std::log(r.norm()) / kTwoPi, 0, 0, 0, 0};
  for (int i = 1; i < 5; ++i) f[i] = H(xb - i * h * nu);
  double inward = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h);
  return singular - inward;
}

}  // namespace bubbling
