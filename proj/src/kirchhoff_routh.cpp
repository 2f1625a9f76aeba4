#include "bubbling/kirchhoff_routh.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace bubbling {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Eigen::VectorXd pack(const Config& xi) {
  Eigen::VectorXd z(2 * xi.size());
  for (size_t i = 0; i < xi.size(); ++i) z.segment<2>(2 * i) = xi[i];
  return z;
}

Config unpack(const Eigen::VectorXd& z) {
  Config xi(z.size() / 2);
  for (size_t i = 0; i < xi.size(); ++i) xi[i] = z.segment<2>(2 * i);
  return xi;
}

double margin(const GreenBackend& g) { return 1e-3 * g.diameter(); }

void check_config(const GreenBackend& g, const Config& xi, const Signs& a) {
  check_signs(a);
  if (xi.size() != a.size()) throw DomainError("number of points and signs differ");
  for (const auto& p : xi) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) throw DomainError("non-finite point");
    if (g.signed_distance(p) > -margin(g)) throw DomainError("point outside the domain or too close to its boundary");
  }
  for (size_t i = 0; i < xi.size(); ++i)
    for (size_t k = i + 1; k < xi.size(); ++k)
      if ((xi[i] - xi[k]).norm() < 1e-12 * g.diameter()) throw DomainError("coincident points");
}

bool feasible(const GreenBackend& g, const Config& xi) {
  for (const auto& p : xi)
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()) || g.signed_distance(p) > -1.0001 * margin(g)) return false;
  for (size_t i = 0; i < xi.size(); ++i)
    for (size_t k = i + 1; k < xi.size(); ++k)
      if ((xi[i] - xi[k]).norm() < 1e-9 * g.diameter()) return false;
  return true;
}

// barrier -sum log dist(xi_i, boundary) - sum log |xi_i - xi_k|
double barrier(const GreenBackend& g, const Config& xi, Eigen::VectorXd* grad) {
  double b = 0.0;
  if (grad) grad->setZero(2 * xi.size());
  const auto& bd = g.boundary();
  for (size_t i = 0; i < xi.size(); ++i) {
    double d = -g.signed_distance(xi[i]);
    b -= std::log(d);
    if (grad) {
      Point gd;
      if (g.analytic()) {
        gd = xi[i].norm() > 0 ? Point(-xi[i] / xi[i].norm()) : Point(0, 0);
      } else {
        Point v = xi[i] - bd.curve.eval(bd.nearest_param(xi[i]));
        gd = v / v.norm();
      }
      grad->segment<2>(2 * i) -= gd / d;
    }
    for (size_t k = i + 1; k < xi.size(); ++k) {
      Point r = xi[i] - xi[k];
      double r2 = r.squaredNorm();
      b -= 0.5 * std::log(r2);
      if (grad) {
        grad->segment<2>(2 * i) -= r / r2;
        grad->segment<2>(2 * k) += r / r2;
      }
    }
  }
  return b;
}

// orthonormal basis of the complement of the rotation generator (disk only)
Eigen::MatrixXd reduced_basis(const GreenBackend& g, const Config& xi) {
  int n = 2 * static_cast<int>(xi.size());
  if (!g.analytic()) return Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd r(n);
  for (size_t i = 0; i < xi.size(); ++i) {
    Point c = xi[i] - Point(0, 0);
    r[2 * i] = -c.y();
    r[2 * i + 1] = c.x();
  }
  if (r.norm() < 1e-6) return Eigen::MatrixXd::Identity(n, n);
  r.normalize();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - r * r.transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(P);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n - 1);
  return Q;
}

struct Objective {
  const GreenBackend& g;
  const Signs& a;
  double sign;   // -1 to maximise phi
  double kappa;
  double value(const Eigen::VectorXd& z) const {
    Config xi = unpack(z);
    return sign * phi_m(g, xi, a) + (kappa > 0 ? kappa * barrier(g, xi, nullptr) : 0.0);
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const {
    Config xi = unpack(z);
    Eigen::VectorXd gr = sign * grad_phi_m(g, xi, a);
    if (kappa > 0) {
      Eigen::VectorXd gb;
      barrier(g, xi, &gb);
      gr += kappa * gb;
    }
    return gr;
  }
};

// BFGS on an objective restricted to z = z0 + B u (B selects free coordinates).
Eigen::VectorXd bfgs(const Objective& f, Eigen::VectorXd z, const Eigen::MatrixXd& B, int max_iters, double gtol) {
  int n = static_cast<int>(B.cols());
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n) * (0.1 * f.g.diameter());
  double fz = f.value(z);
  Eigen::VectorXd gz = B.transpose() * f.gradient(z);
  for (int it = 0; it < max_iters && gz.norm() > gtol; ++it) {
    Eigen::VectorXd d = -Hinv * gz;
    if (d.dot(gz) >= 0) {
      Hinv.setIdentity();
      Hinv *= 0.1 * f.g.diameter() / std::max(1.0, gz.norm());
      d = -Hinv * gz;
    }
    double maxstep = 0.1 * f.g.diameter();
    if (d.norm() > maxstep) d *= maxstep / d.norm();
    double step = 1.0;
    Eigen::VectorXd zn;
    double fn = 0;
    bool ok = false;
    for (int ls = 0; ls < 40; ++ls) {
      zn = z + step * (B * d);
      if (feasible(f.g, unpack(zn))) {
        fn = f.value(zn);
        if (fn <= fz + 1e-4 * step * d.dot(gz)) {
          ok = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!ok) break;
    Eigen::VectorXd gn = B.transpose() * f.gradient(zn);
    Eigen::VectorXd s = step * d, y = gn - gz;
    double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      double rho = 1.0 / sy;
      Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    z = zn;
    fz = fn;
    gz = gn;
  }
  return z;
}

// Levenberg-Marquardt on grad phi = 0 in the coordinates z = z0 + B u.
Eigen::VectorXd lm_stationary(const GreenBackend& g, const Signs& a, Eigen::VectorXd z, const Eigen::MatrixXd& B,
                              int max_iters, double gtol) {
  Eigen::VectorXd r = B.transpose() * grad_phi_m(g, unpack(z), a);
  double nu = 1e-3;
  for (int it = 0; it < max_iters && r.norm() > gtol; ++it) {
    Eigen::MatrixXd J = B.transpose() * hessian_phi_m(g, unpack(z), a) * B;
    bool ok = false;
    for (int tries = 0; tries < 20; ++tries) {
      Eigen::MatrixXd M = J.transpose() * J;
      M.diagonal().array() += nu * (1.0 + M.diagonal().array());
      Eigen::VectorXd d = -M.ldlt().solve(J.transpose() * r);
      double maxstep = 0.1 * g.diameter();
      if (d.norm() > maxstep) d *= maxstep / d.norm();
      Eigen::VectorXd zn = z + B * d;
      Config xn = unpack(zn);
      if (feasible(g, xn)) {
        Eigen::VectorXd rn = B.transpose() * grad_phi_m(g, xn, a);
        if (rn.norm() < r.norm()) {
          z = zn;
          r = rn;
          nu = std::max(nu * 0.3, 1e-12);
          ok = true;
          break;
        }
      }
      nu *= 10.0;
    }
    if (!ok) break;
  }
  return z;
}

Eigen::VectorXd newton_polish(const GreenBackend& g, const Signs& a, Eigen::VectorXd z, int max_iters) {
  for (int it = 0; it < max_iters; ++it) {
    Config xi = unpack(z);
    Eigen::MatrixXd Q = reduced_basis(g, xi);
    Eigen::VectorXd r = Q.transpose() * grad_phi_m(g, xi, a);
    if (r.norm() < 1e-12) break;
    Eigen::MatrixXd H = Q.transpose() * hessian_phi_m(g, xi, a) * Q;
    Eigen::VectorXd d = -H.completeOrthogonalDecomposition().solve(r);
    double step = 1.0;
    bool ok = false;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::VectorXd zn = z + step * (Q * d);
      Config xn = unpack(zn);
      if (feasible(g, xn) && (grad_phi_m(g, xn, a).norm() < r.norm() || step < 1e-6)) {
        z = zn;
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) break;
  }
  return z;
}

Config gauge_fix(const GreenBackend& g, Config xi) {
  if (!g.analytic() || xi.size() < 2) return xi;
  size_t k = 0;
  while (k < xi.size() && xi[k].norm() < 1e-8) ++k;
  if (k == xi.size()) return xi;
  double ang = std::atan2(xi[k].y(), xi[k].x());
  Eigen::Rotation2Dd rot(-ang);
  for (auto& p : xi) p = rot * p;
  xi[k].y() = 0.0;
  return xi;
}

// smallest distance between two configurations over sign-preserving
// permutations (and rotations on the disk)
double config_distance(const GreenBackend& g, const Config& x, const Config& y, const Signs& a) {
  std::vector<int> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    bool ok = true;
    for (size_t i = 0; i < perm.size(); ++i)
      if (a[i] != a[perm[i]]) ok = false;
    if (!ok) continue;
    double ang = 0.0;
    if (g.analytic()) {
      double c = 0, s = 0;
      for (size_t i = 0; i < x.size(); ++i) {
        const Point& u = y[perm[i]];
        c += u.dot(x[i]);
        s += u.x() * x[i].y() - u.y() * x[i].x();
      }
      ang = std::atan2(s, c);
    }
    Eigen::Rotation2Dd rot(ang);
    double d = 0;
    for (size_t i = 0; i < x.size(); ++i) d = std::max(d, (rot * y[perm[i]] - x[i]).norm());
    best = std::min(best, d);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Config random_start(const GreenBackend& g, int m, std::mt19937_64& rng) {
  const auto& bd = g.boundary();
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& p : bd.x) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  std::uniform_real_distribution<double> ux(xmin, xmax), uy(ymin, ymax);
  double diam = g.diameter();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Config xi;
    while (static_cast<int>(xi.size()) < m) {
      Point p(ux(rng), uy(rng));
      if (g.signed_distance(p) < -0.05 * diam) xi.push_back(p);
    }
    bool ok = true;
    for (int i = 0; i < m; ++i)
      for (int k = i + 1; k < m; ++k)
        if ((xi[i] - xi[k]).norm() < 0.05 * diam) ok = false;
    if (ok) return xi;
  }
  throw DomainError("could not place starting points in the domain");
}

std::string classify(const std::vector<double>& ev, double thr) {
  bool all_neg = true, all_pos = true;
  for (double e : ev) {
    if (std::abs(e) < thr) return "degenerate";
    if (e >= 0) all_neg = false;
    if (e <= 0) all_pos = false;
  }
  if (all_neg) return "max";
  if (all_pos) return "min";
  return "saddle";
}

}  // namespace

Signs parse_signs(const std::string& text) {
  Signs a;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (tok == "+" || tok == "1" || tok == "+1") a.push_back(1);
    else if (tok == "-" || tok == "-1") a.push_back(-1);
    else throw std::invalid_argument("sign entries must be + or -: '" + tok + "'");
  }
  check_signs(a);
  return a;
}

void check_signs(const Signs& a) {
  if (a.empty()) throw std::invalid_argument("sign pattern is empty");
  for (int s : a)
    if (s != 1 && s != -1) throw std::invalid_argument("sign entries must be +1 or -1");
}

double phi_m(const GreenBackend& g, const Config& xi, const Signs& a) {
  check_config(g, xi, a);
  size_t m = xi.size();
  double v = 0.0;
  if (g.analytic()) {
    for (size_t i = 0; i < m; ++i) {
      v += g.robin(xi[i]);
      for (size_t k = i + 1; k < m; ++k) v += 2.0 * a[i] * a[k] * g.green(xi[i], xi[k]);
    }
    return v;
  }
  std::vector<HarmonicField> F;
  for (size_t k = 0; k < m; ++k) F.push_back(g.regular_part_field(xi[k]));
  for (size_t i = 0; i < m; ++i) {
    v += F[i](xi[i]);
    for (size_t k = i + 1; k < m; ++k) {
      double gik = -std::log((xi[i] - xi[k]).norm()) / kTwoPi + 0.5 * (F[k](xi[i]) + F[i](xi[k]));
      v += 2.0 * a[i] * a[k] * gik;
    }
  }
  return v;
}

Eigen::VectorXd grad_phi_m(const GreenBackend& g, const Config& xi, const Signs& a) {
  check_config(g, xi, a);
  size_t m = xi.size();
  Eigen::VectorXd gr = Eigen::VectorXd::Zero(2 * m);
  if (g.analytic()) {
    for (size_t k = 0; k < m; ++k) {
      Point s = g.grad_robin(xi[k]);
      for (size_t i = 0; i < m; ++i)
        if (i != k) s += 2.0 * a[i] * a[k] * g.grad_green(xi[k], xi[i]);
      gr.segment<2>(2 * k) = s;
    }
    return gr;
  }
  double h = g.gradient_step();
  std::vector<HarmonicField> F;
  for (size_t k = 0; k < m; ++k) F.push_back(g.regular_part_field(xi[k]));
  for (size_t k = 0; k < m; ++k) {
    Point s = 2.0 * F[k].gradient(xi[k], h);
    for (size_t i = 0; i < m; ++i) {
      if (i == k) continue;
      Point r = xi[k] - xi[i];
      s += 2.0 * a[i] * a[k] * (-r / (kTwoPi * r.squaredNorm()) + F[i].gradient(xi[k], h));
    }
    gr.segment<2>(2 * k) = s;
  }
  return gr;
}

Eigen::MatrixXd hessian_phi_m(const GreenBackend& g, const Config& xi, const Signs& a, double step) {
  Eigen::VectorXd z = pack(xi);
  int n = static_cast<int>(z.size());
  Eigen::MatrixXd H(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd zp = z, zm = z;
    zp[j] += step;
    zm[j] -= step;
    H.col(j) = (grad_phi_m(g, unpack(zp), a) - grad_phi_m(g, unpack(zm), a)) / (2 * step);
  }
  return 0.5 * (H + H.transpose());
}

CriticalReport analyse_critical(const GreenBackend& g, const Config& xi, const Signs& a, const SearchOptions& opt) {
  CriticalReport rep;
  rep.points = xi;
  rep.signs = a;
  rep.phi = phi_m(g, xi, a);
  Eigen::VectorXd gr = grad_phi_m(g, xi, a);
  rep.grad_norm = gr.norm();

  // independent check: central differences of phi at a different step
  Eigen::VectorXd z = pack(xi);
  double hs = 1e-4 * g.diameter();
  Eigen::VectorXd fd(z.size());
  for (int j = 0; j < z.size(); ++j) {
    Eigen::VectorXd zp = z, zm = z;
    zp[j] += hs;
    zm[j] -= hs;
    fd[j] = (phi_m(g, unpack(zp), a) - phi_m(g, unpack(zm), a)) / (2 * hs);
  }
  rep.fd_grad_norm = fd.norm();

  Eigen::MatrixXd Q = reduced_basis(g, xi);
  rep.gauge_fixed = Q.cols() < z.size();
  Eigen::MatrixXd H = Q.transpose() * hessian_phi_m(g, xi, a) * Q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  for (int i = 0; i < es.eigenvalues().size(); ++i) rep.eigenvalues.push_back(es.eigenvalues()[i]);
  rep.classification = classify(rep.eigenvalues, opt.degeneracy);

  // sampled degree of grad phi on a small sphere: accept sign(det A) of the
  // fitted linear map when every sample lies in the same half-space as A v
  int n = static_cast<int>(Q.cols());
  int samples = 2 * static_cast<int>(xi.size()) * 32;
  std::mt19937_64 rng(opt.seed + 101);
  std::normal_distribution<double> nd;
  double rho = 1e-3 * g.diameter();
  Eigen::MatrixXd V(samples, n), G(samples, n);
  bool valid = true;
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = nd(rng);
    v.normalize();
    Config xs = unpack(z + rho * (Q * v));
    if (!feasible(g, xs)) {
      valid = false;
      break;
    }
    V.row(k) = v.transpose();
    G.row(k) = (Q.transpose() * grad_phi_m(g, xs, a)).transpose();
  }
  if (valid) {
    Eigen::MatrixXd At = V.colPivHouseholderQr().solve(G);  // G ~ V A^T
    for (int k = 0; k < samples && valid; ++k) {
      Eigen::VectorXd lin = At.transpose() * V.row(k).transpose();
      if (G.row(k).dot(lin) <= 0 || G.row(k).norm() == 0) valid = false;
    }
    double det = At.determinant();
    rep.degree = valid && det != 0 ? (det > 0 ? 1 : -1) : 0;
  }
  bool extremum = rep.classification == "max" || rep.classification == "min";
  rep.stable = extremum || rep.degree != 0;
  return rep;
}

std::vector<CriticalReport> find_critical(const GreenBackend& g, const Signs& a, const SearchOptions& opt) {
  check_signs(a);
  int m = static_cast<int>(a.size());
  std::mt19937_64 rng(opt.seed);
  std::vector<Config> starts;
  for (int s = 0; s < opt.starts; ++s) starts.push_back(random_start(g, m, rng));

  auto run = [&](const Config& x0) {
    std::vector<Config> out;
    Eigen::VectorXd z0 = pack(x0);
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2 * m, 2 * m);
    try {
      Eigen::VectorXd z = z0;
      for (double kappa : {1e-2, 1e-3, 1e-4, 1e-6, 0.0}) {
        Objective f{g, a, -1.0, kappa};
        z = bfgs(f, z, I, opt.max_iters, 1e-10);
      }
      out.push_back(unpack(newton_polish(g, a, z, 30)));
    } catch (const DomainError&) {
    }
    try {
      Eigen::VectorXd z = lm_stationary(g, a, z0, I, opt.max_iters, 1e-11);
      out.push_back(unpack(newton_polish(g, a, z, 30)));
    } catch (const DomainError&) {
    }
    return out;
  };

  std::vector<Config> candidates;
  for (const auto& x0 : starts)
    for (auto& c : run(x0)) candidates.push_back(std::move(c));

  std::vector<CriticalReport> reports;
  double diam = g.diameter();
  for (auto& c : candidates) {
    if (!feasible(g, c)) continue;
    bool near_wall = false;
    for (int i = 0; i < m; ++i) {
      if (g.signed_distance(c[i]) > -0.01 * diam) near_wall = true;
      for (int k = i + 1; k < m; ++k)
        if ((c[i] - c[k]).norm() < 0.01 * diam) near_wall = true;
    }
    if (near_wall) continue;
    c = gauge_fix(g, c);
    if (grad_phi_m(g, c, a).norm() > opt.grad_tol) continue;
    bool dup = false;
    for (const auto& r : reports)
      if (config_distance(g, r.points, c, a) < 1e-4) dup = true;
    if (dup) continue;
    reports.push_back(analyse_critical(g, c, a, opt));
  }
  std::sort(reports.begin(), reports.end(), [](const auto& x, const auto& y) { return x.phi > y.phi; });
  return reports;
}

CriticalReport find_critical_on_axis(const GreenBackend& g, int m, const SearchOptions& opt) {
  if (m < 1) throw std::invalid_argument("m must be positive");
  const auto& bd = g.boundary();
  double diam = g.diameter();
  for (const auto& p : bd.x)
    if (std::abs(g.signed_distance(Point(p.x(), -p.y()))) > 1e-8 * diam)
      throw DomainError("domain is not symmetric under reflection in the x_1-axis");

  // interval of the x_1-axis inside the domain
  double xl = INFINITY, xr = -INFINITY;
  for (int j = 0; j < bd.n; ++j) {
    const Point& p = bd.x[j];
    const Point& q = bd.x[(j + 1) % bd.n];
    if ((p.y() <= 0 && q.y() > 0) || (p.y() > 0 && q.y() <= 0)) {
      double x = p.x() + (q.x() - p.x()) * (-p.y()) / (q.y() - p.y());
      xl = std::min(xl, x);
      xr = std::max(xr, x);
    }
  }
  if (!(xl < xr)) throw DomainError("x_1-axis does not meet the domain");

  Signs a(m);
  for (int i = 0; i < m; ++i) a[i] = (i % 2 == 0) ? 1 : -1;
  Config x0(m);
  for (int i = 0; i < m; ++i) x0[i] = Point(xl + (xr - xl) * (i + 1.0) / (m + 1.0), 0.0);

  // coordinates restricted to the axis
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * m, m);
  for (int i = 0; i < m; ++i) B(2 * i, i) = 1.0;
  Eigen::VectorXd z = pack(x0);
  for (double kappa : {1e-2, 1e-3, 1e-4, 1e-6, 0.0}) {
    Objective f{g, a, -1.0, kappa};
    z = bfgs(f, z, B, opt.max_iters, 1e-11);
  }
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd r = B.transpose() * grad_phi_m(g, unpack(z), a);
    if (r.norm() < 1e-12) break;
    Eigen::MatrixXd H = B.transpose() * hessian_phi_m(g, unpack(z), a) * B;
    Eigen::VectorXd d = -H.ldlt().solve(r);
    Eigen::VectorXd zn = z + B * d;
    if (!feasible(g, unpack(zn))) break;
    z = zn;
  }
  Config xi = unpack(z);
  for (int i = 0; i + 1 < m; ++i)
    if (xi[i + 1].x() - xi[i].x() < 1e-6 * diam) throw DomainError("ordered points collapsed on the axis");
  return analyse_critical(g, xi, a, opt);
}

}  // namespace bubbling
