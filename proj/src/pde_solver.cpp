#include "bubbling/pde_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace bubbling {

namespace {
constexpr double kExpCap = 700.0;

using SpMat = Eigen::SparseMatrix<double>;

std::shared_ptr<const Grid2D> grid_of(const Field2D& u) {
  if (!u.grid) throw std::invalid_argument("field has no grid");
  if (u.values.size() != u.grid->size()) throw std::invalid_argument("field size does not match its grid");
  return u.grid;
}

double weighted_l2(const Grid2D& g, const Eigen::VectorXd& r) {
  double s = 0.0;
  for (int k = 0; k < g.interior(); ++k) s += g.volume(k) * r[k] * r[k];
  return std::sqrt(s);
}

double nonlinear_scale(const Field2D& u, double p, double lambda) {
  double s = 0.0;
  for (int k = 0; k < u.grid->interior(); ++k) s = std::max(s, std::abs(lambda * pde_nonlinearity(u.values[k], p)));
  return s;
}

// volume-scaled Jacobian V (L + lambda diag w'), symmetric
SpMat scaled_jacobian(const Field2D& u, double p, double lambda, double u_min) {
  const Grid2D& g = *u.grid;
  int n = g.interior();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * static_cast<size_t>(n));
  double d2 = g.dth * g.dth;
  for (int i = 0; i < g.nr - 1; ++i) {
    double vol = g.r[i] * g.rp[i] * g.h * g.dth;
    double cout = g.face[i] * g.dth / g.h;
    double cin = i > 0 ? g.face[i - 1] * g.dth / g.h : 0.0;
    double cang = vol / (g.r[i] * g.r[i] * d2);
    for (int j = 0; j < g.nth; ++j) {
      int k = g.index(i, j);
      double diag = -cout - cin - 2.0 * cang + vol * lambda * pde_nonlinearity_prime(u.values[k], p, u_min);
      t.emplace_back(k, k, diag);
      if (i + 1 < g.nr - 1) {
        t.emplace_back(k, g.index(i + 1, j), cout);
        t.emplace_back(g.index(i + 1, j), k, cout);
      }
      int jn = (j + 1) % g.nth;
      t.emplace_back(k, g.index(i, jn), cang);
      t.emplace_back(g.index(i, jn), k, cang);
    }
  }
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

Eigen::VectorXd linear_solve(const SpMat& A, const Eigen::VectorXd& b, const NewtonConfig& cfg, std::string& used) {
  double bn = b.norm();
  if (A.rows() > cfg.iterative_above) {
    Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-6);
    it.setTolerance(1e-12);
    it.compute(A);
    Eigen::VectorXd x = it.solve(b);
    if (it.info() == Eigen::Success) {
      used = "bicgstab_ilut";
      return x;
    }
  }
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd x = ldlt.solve(b);
    if (ldlt.info() == Eigen::Success && x.allFinite() && (A * x - b).norm() <= 1e-8 * bn) {
      used = "ldlt";
      return x;
    }
  }
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("singular Jacobian: " + lu.lastErrorMessage());
  used = "sparse_lu";
  return lu.solve(b);
}
}  // namespace

Grid2D Grid2D::polar(int nr, int nth, double radius, double scale) {
  if (nr < 3 || nth < 4) throw std::invalid_argument("polar grid needs nr >= 3 and ntheta >= 4");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  Grid2D g;
  g.nr = nr;
  g.nth = nth;
  g.radius = radius;
  g.scale = scale;
  g.h = 1.0 / (nr - 0.5);
  g.dth = 2.0 * M_PI / nth;
  bool graded = scale > 0.0;
  double k = graded ? std::asinh(radius / scale) : 0.0;
  auto R = [&](double s) { return graded ? radius * std::sinh(k * s) / std::sinh(k) : radius * s; };
  auto Rp = [&](double s) { return graded ? radius * k * std::cosh(k * s) / std::sinh(k) : radius; };
  for (int i = 0; i < nr; ++i) {
    double s = i == nr - 1 ? 1.0 : (i + 0.5) * g.h;
    g.r.push_back(R(s));
    g.rp.push_back(Rp(s));
    double sf = (i + 1) * g.h;
    g.face.push_back(R(sf) / Rp(sf));
  }
  for (int j = 0; j < nth; ++j) g.theta.push_back((j + 0.5) * g.dth);
  return g;
}

Grid2D Grid2D::for_domain(const DomainSpec& d, int nr, int nth, double scale) {
  if (d.kind != DomainSpec::Kind::unit_disk)
    throw DomainError("the PDE solver supports disk domains only (got '" + d.name + "')");
  return polar(nr, nth, d.radius, scale);
}

Point Grid2D::node(int k) const {
  int i = k / nth, j = k % nth;
  return r[i] * Point(std::cos(theta[j]), std::sin(theta[j]));
}

double Grid2D::volume(int k) const {
  int i = k / nth;
  return r[i] * rp[i] * h * dth;
}

Field2D Field2D::zeros(std::shared_ptr<const Grid2D> g) {
  Field2D f;
  f.values = Eigen::VectorXd::Zero(g->size());
  f.grid = std::move(g);
  return f;
}

Field2D Field2D::sample(std::shared_ptr<const Grid2D> g, const std::function<double(const Point&)>& fn) {
  Field2D f = zeros(std::move(g));
  for (int k = 0; k < f.grid->interior(); ++k) {
    double v = fn(f.grid->node(k));
    if (!std::isfinite(v)) throw std::domain_error("non-finite sample in field");
    f.values[k] = v;
  }
  return f;
}

Field2D laplacian(const Field2D& u) {
  auto gp = grid_of(u);
  const Grid2D& g = *gp;
  Field2D out = Field2D::zeros(gp);
  const auto& v = u.values;
  for (int i = 0; i < g.nr - 1; ++i) {
    double rad = 1.0 / (g.r[i] * g.rp[i] * g.h * g.h);
    double ang = 1.0 / (g.r[i] * g.r[i] * g.dth * g.dth);
    for (int j = 0; j < g.nth; ++j) {
      int k = g.index(i, j);
      double uc = v[k];
      double flux = g.face[i] * (v[g.index(i + 1, j)] - uc);
      if (i > 0) flux -= g.face[i - 1] * (uc - v[g.index(i - 1, j)]);
      double ua = v[g.index(i, (j + 1) % g.nth)] - 2.0 * uc + v[g.index(i, (j + g.nth - 1) % g.nth)];
      out.values[k] = rad * flux + ang * ua;
    }
  }
  return out;
}

double pde_nonlinearity(double u, double p) {
  if (u == 0.0) return 0.0;
  double a = std::abs(u), ap = std::pow(a, p);
  if (ap > kExpCap) {
    std::ostringstream os;
    os << "exponent |u|^p = " << ap << " exceeds " << kExpCap << " at u = " << u;
    throw std::overflow_error(os.str());
  }
  return std::copysign(std::exp(ap + (p - 1.0) * std::log(a)), u);
}

double pde_nonlinearity_prime(double u, double p, double u_min) {
  double a = std::abs(u);
  if (p < 2.0) a = std::max(a, u_min);
  if (a == 0.0) return p == 1.0 ? 1.0 : 0.0;
  double ap = std::pow(a, p);
  if (ap > kExpCap) throw std::overflow_error("exponent overflow in Jacobian");
  double e = std::exp(ap);
  double first = p == 1.0 ? 0.0 : (p - 1.0) * std::pow(a, p - 2.0);
  return e * (first + p * std::pow(a, 2.0 * p - 2.0));
}

Eigen::VectorXd roundoff_floor(const Field2D& u, double p, double lambda) {
  auto gp = grid_of(u);
  const Grid2D& g = *gp;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.size());
  const auto& v = u.values;
  for (int i = 0; i < g.nr - 1; ++i) {
    double rad = 1.0 / (g.r[i] * g.rp[i] * g.h * g.h);
    double ang = 1.0 / (g.r[i] * g.r[i] * g.dth * g.dth);
    for (int j = 0; j < g.nth; ++j) {
      int k = g.index(i, j);
      double uc = std::abs(v[k]);
      double a = g.face[i] * (std::abs(v[g.index(i + 1, j)]) + uc);
      if (i > 0) a += g.face[i - 1] * (uc + std::abs(v[g.index(i - 1, j)]));
      double b = std::abs(v[g.index(i, (j + 1) % g.nth)]) + 2.0 * uc + std::abs(v[g.index(i, (j + g.nth - 1) % g.nth)]);
      out[k] = std::numeric_limits<double>::epsilon() *
               (rad * a + ang * b + std::abs(lambda * pde_nonlinearity(v[k], p)));
    }
  }
  return out;
}

Eigen::SparseMatrix<double> residual_jacobian(const Field2D& u, double p, double lambda, double u_min) {
  grid_of(u);
  SpMat A = scaled_jacobian(u, p, lambda, u_min);
  Eigen::VectorXd inv(A.rows());
  for (int k = 0; k < A.rows(); ++k) inv[k] = 1.0 / u.grid->volume(k);
  return SpMat(inv.asDiagonal() * A);
}

Field2D nonlinear_residual(const Field2D& u, double p, double lambda) {
  Field2D r = laplacian(u);
  for (int k = 0; k < u.grid->interior(); ++k) r.values[k] += lambda * pde_nonlinearity(u.values[k], p);
  return r;
}

std::pair<Field2D, SolveReport> newton_solve(const Field2D& seed, double p, double lambda, const NewtonConfig& cfg) {
  auto gp = grid_of(seed);
  const Grid2D& g = *gp;
  if (!(p > 0.0 && p <= 2.0)) throw std::domain_error("p must lie in (0, 2]");
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be positive");
  for (int k = g.interior(); k < g.size(); ++k)
    if (seed.values[k] != 0.0) throw std::invalid_argument("seed must vanish on the boundary");

  SolveReport rep;
  rep.path.push_back({p, lambda});
  Field2D u = seed;
  Field2D R = nonlinear_residual(u, p, lambda);
  double norm = weighted_l2(g, R.values);
  rep.residual_history.push_back(norm);
  int n = g.interior();

  auto finish = [&](bool ok) {
    rep.converged = ok;
    rep.residual_max = R.values.head(n).cwiseAbs().maxCoeff();
    rep.residual_l2 = weighted_l2(g, R.values);
    rep.nonlinear_scale = nonlinear_scale(u, p, lambda);
    rep.roundoff_floor = roundoff_floor(u, p, lambda).maxCoeff();
  };
  auto converged = [&]() {
    double target = cfg.tol * nonlinear_scale(u, p, lambda);
    Eigen::VectorXd fl = roundoff_floor(u, p, lambda);
    for (int k = 0; k < n; ++k)
      if (std::abs(R.values[k]) > target + cfg.roundoff_factor * fl[k]) return false;
    return true;
  };

  for (int it = 0; it < cfg.max_iter; ++it) {
    if (converged()) {
      finish(true);
      return {u, rep};
    }
    double umin = cfg.u_min_rel * u.max_abs();
    SpMat A = scaled_jacobian(u, p, lambda, umin);
    Eigen::VectorXd b(n);
    for (int k = 0; k < n; ++k) b[k] = -g.volume(k) * R.values[k];
    Eigen::VectorXd du;
    try {
      du = linear_solve(A, b, cfg, rep.solver);
    } catch (const std::runtime_error& e) {
      finish(false);
      rep.message = e.what();
      throw SolveError(e.what(), rep, u);
    }
    double alpha = 1.0;
    Field2D trial = u;
    Field2D Rt;
    double tn = 0.0;
    while (true) {
      trial.values.head(n) = u.values.head(n) + alpha * du;
      bool ok = true;
      try {
        Rt = nonlinear_residual(trial, p, lambda);
        tn = weighted_l2(g, Rt.values);
        ok = std::isfinite(tn);
      } catch (const std::overflow_error&) {
        ok = false;
      }
      if (ok && tn <= (1.0 - cfg.armijo * alpha) * norm) break;
      alpha *= 0.5;
      if (alpha < cfg.damping_floor) {
        if (converged()) {
          finish(true);
          return {u, rep};
        }
        finish(false);
        rep.message = "line search stagnated at the damping floor";
        throw SolveError(rep.message, rep, u);
      }
    }
    u = trial;
    R = Rt;
    rep.damping.push_back(alpha);
    rep.residual_history.push_back(tn);
    if (!(tn < norm)) throw std::logic_error("accepted step did not decrease the residual");
    norm = tn;
    rep.iterations = it + 1;
  }
  finish(converged());
  if (!rep.converged) {
    rep.message = "no convergence within the iteration limit";
    throw SolveError(rep.message, rep, u);
  }
  return {u, rep};
}

std::pair<Field2D, SolveReport> continuation(const Field2D& seed, const std::vector<ParameterPoint>& path,
                                             const NewtonConfig& cfg,
                                             const std::function<Field2D(const ParameterPoint&)>& drift) {
  if (path.empty()) throw std::invalid_argument("empty continuation path");
  Field2D u = seed;
  SolveReport total;
  Field2D prev_anchor;
  for (size_t s = 0; s < path.size(); ++s) {
    if (drift) {
      Field2D anchor = drift(path[s]);
      if (s > 0) u.values += anchor.values - prev_anchor.values;
      prev_anchor = std::move(anchor);
    }
    auto [v, rep] = newton_solve(u, path[s].p, path[s].lambda, cfg);
    u = std::move(v);
    total.iterations += rep.iterations;
    total.damping.insert(total.damping.end(), rep.damping.begin(), rep.damping.end());
    total.residual_history.insert(total.residual_history.end(), rep.residual_history.begin(),
                                  rep.residual_history.end());
    total.path.push_back(path[s]);
    total.residual_max = rep.residual_max;
    total.residual_l2 = rep.residual_l2;
    total.nonlinear_scale = rep.nonlinear_scale;
    total.solver = rep.solver;
    total.converged = rep.converged;
  }
  return {u, total};
}

NodalSummary nodal_analysis(const Field2D& u) {
  auto gp = grid_of(u);
  const Grid2D& g = *gp;
  int n = g.interior();
  auto sgn = [&](int k) { return (u.values[k] > 0.0) - (u.values[k] < 0.0); };
  bool any = false;
  for (int k = 0; k < n; ++k) any = any || sgn(k) != 0;
  if (!any) throw std::invalid_argument("nodal analysis of an identically zero field");

  auto neighbours = [&](int k, int* out) {
    int i = k / g.nth, j = k % g.nth, c = 0;
    out[c++] = g.index(i, (j + 1) % g.nth);
    out[c++] = g.index(i, (j + g.nth - 1) % g.nth);
    if (i > 0) out[c++] = g.index(i - 1, j);
    if (i + 1 < g.nr - 1) out[c++] = g.index(i + 1, j);
    return c;
  };

  NodalSummary s;
  std::vector<int> label(n, -1);
  int nb[4];
  for (int k = 0; k < n; ++k) {
    if (sgn(k) == 0 || label[k] >= 0) continue;
    int id = s.components++;
    (sgn(k) > 0 ? s.positive : s.negative)++;
    std::queue<int> q;
    q.push(k);
    label[k] = id;
    while (!q.empty()) {
      int c = q.front();
      q.pop();
      for (int e = 0, m = neighbours(c, nb); e < m; ++e)
        if (label[nb[e]] < 0 && sgn(nb[e]) == sgn(k)) {
          label[nb[e]] = id;
          q.push(nb[e]);
        }
    }
  }
  int outer = g.nr - 2;
  for (int j = 0; j < g.nth && !s.boundary_touching; ++j) {
    int k = g.index(outer, j);
    if (sgn(k) == 0) s.boundary_touching = true;
    for (int e = 0, m = neighbours(k, nb); e < m; ++e)
      if (sgn(nb[e]) != sgn(k)) s.boundary_touching = true;
  }
  return s;
}

BoundaryFlux boundary_flux(const GreenBackend& g, const Config& xi, const Signs& a) {
  if (xi.size() != a.size()) throw std::invalid_argument("points and signs differ in length");
  const auto& bd = g.boundary();
  BoundaryFlux f;
  f.values.resize(bd.n);
  for (int k = 0; k < bd.n; ++k) {
    double v = 0.0;
    for (size_t i = 0; i < xi.size(); ++i) v += a[i] * g.normal_derivative_green(k, xi[i]);
    f.values[k] = v;
    f.integral += bd.weight[k] * v;
  }
  f.min = *std::min_element(f.values.begin(), f.values.end());
  f.max = *std::max_element(f.values.begin(), f.values.end());
  f.changes_sign = f.min < 0.0 && f.max > 0.0;
  return f;
}

LiouvilleRadial LiouvilleRadial::concentrated(double eps, double radius) {
  double e = eps * eps * radius * radius;
  if (!(e > 0.0 && e <= 2.0)) throw std::domain_error("no radial Liouville solution for eps^2 R^2 outside (0, 2]");
  double r4 = std::pow(radius, 4);
  LiouvilleRadial s;
  s.eps = eps;
  s.radius = radius;
  s.delta = (8.0 - 2.0 * e + std::sqrt(32.0 * (2.0 - e))) / (2.0 * eps * eps * r4);
  return s;
}

LiouvilleRadial LiouvilleRadial::flat(double eps, double radius) {
  LiouvilleRadial s = concentrated(eps, radius);
  s.delta = 1.0 / (std::pow(radius, 4) * s.delta);
  return s;
}

double LiouvilleRadial::operator()(double r) const {
  return std::log(8.0 * delta / (eps * eps)) - 2.0 * std::log1p(delta * r * r);
}

}  // namespace bubbling
