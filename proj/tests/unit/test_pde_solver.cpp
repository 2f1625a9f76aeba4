#include <doctest.h>

#include <Eigen/SparseLU>
#include <cmath>
#include <memory>
#include <random>

#include "bubbling/ansatz.hpp"
#include "bubbling/pde_solver.hpp"

using namespace bubbling;

namespace {
std::shared_ptr<GreenBackend> disk() { return std::make_shared<GreenBackend>(DomainSpec::disk(1.0)); }
const double kPairT = std::sqrt(std::sqrt(5.0) - 2.0);

std::shared_ptr<const Grid2D> polar(int nr, int nth, double scale = 0.0) {
  return std::make_shared<Grid2D>(Grid2D::polar(nr, nth, 1.0, scale));
}

double max_error(const Field2D& u, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (int k = 0; k < u.grid->interior(); ++k) e = std::max(e, std::abs(u.values[k] - exact(u.grid->node(k).norm())));
  return e;
}
}  // namespace

TEST_CASE("grid layout") {
  Grid2D g = Grid2D::polar(16, 8, 2.0, 0.1);
  CHECK(g.r.back() == 2.0);
  CHECK(g.r[0] > 0.0);
  for (int i = 1; i < g.nr; ++i) CHECK(g.r[i] > g.r[i - 1]);
  CHECK(g.interior() == 15 * 8);
  double area = 0.0;
  for (int k = 0; k < g.interior(); ++k) area += g.volume(k);
  // cells end half a spacing short of the boundary
  double k = std::asinh(2.0 / 0.1), rf = 2.0 * std::sinh(k * (1 - 0.5 * g.h)) / std::sinh(k);
  CHECK(area == doctest::Approx(M_PI * rf * rf).epsilon(0.02));
  CHECK_THROWS_AS(Grid2D::for_domain(DomainSpec::ellipse(1.2, 0.8), 16, 8), DomainError);
}

TEST_CASE("discrete Laplacian is second order") {
  for (double scale : {0.0, 0.05}) {
    std::vector<double> trunc, sol;
    for (int nr : {32, 64, 128}) {
      auto g = polar(nr, nr, scale);
      Field2D q = Field2D::sample(g, [](const Point& x) { return 1.0 - x.squaredNorm(); });
      Field2D lq = laplacian(q);
      double er = 0.0;
      for (int k = 0; k < g->interior(); ++k) er = std::max(er, std::abs(lq.values[k] + 4.0));
      trunc.push_back(er);

      // -Delta u = 8x with exact solution (1 - r^2) x
      Eigen::SparseMatrix<double> L = residual_jacobian(Field2D::zeros(g), 1.0, 0.0);
      Eigen::VectorXd b(g->interior());
      for (int k = 0; k < g->interior(); ++k) b[k] = -8.0 * g->node(k).x();
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(L);
      Eigen::VectorXd u = lu.solve(b);
      double es = 0.0;
      for (int k = 0; k < g->interior(); ++k) {
        Point x = g->node(k);
        es = std::max(es, std::abs(u[k] - (1.0 - x.squaredNorm()) * x.x()));
      }
      sol.push_back(es);
    }
    CAPTURE(scale);
    for (int i = 0; i < 2; ++i) {
      if (trunc[i] > 1e-9) CHECK(trunc[i] / trunc[i + 1] > 3.5);
      CHECK(sol[i] / sol[i + 1] == doctest::Approx(4.0).epsilon(0.15));
    }
  }
}

TEST_CASE("zero is a solution") {
  auto g = polar(16, 16);
  Field2D z = Field2D::zeros(g);
  for (double p : {0.5, 1.0, 1.5, 2.0}) CHECK(nonlinear_residual(z, p, 0.3).max_abs() == 0.0);
}

TEST_CASE("nonlinearity and overflow guard") {
  CHECK(pde_nonlinearity(2.0, 1.5) == doctest::Approx(2.0 * std::pow(2.0, -0.5) * std::exp(std::pow(2.0, 1.5))));
  CHECK(pde_nonlinearity(-2.0, 1.0) == doctest::Approx(-std::exp(2.0)));
  CHECK(pde_nonlinearity(0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(pde_nonlinearity(30.0, 2.0), std::overflow_error);
  for (double p : {1.0, 1.5, 2.0})
    for (double u : {-1.3, 0.4, 2.2}) {
      double h = 1e-5;
      double fd = (pde_nonlinearity(u + h, p) - pde_nonlinearity(u - h, p)) / (2 * h);
      CHECK(pde_nonlinearity_prime(u, p, 0.0) == doctest::Approx(fd).epsilon(1e-7));
    }
  // floor keeps the derivative finite at the nodal set
  CHECK(std::isfinite(pde_nonlinearity_prime(0.0, 1.5, 1e-8)));
}

TEST_CASE("Jacobian matches central differences of the residual") {
  auto g = polar(24, 16, 0.2);
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  for (double p : {1.0, 1.5}) {
    Field2D u = Field2D::sample(g, [](const Point& x) { return 2.0 * (1.0 - x.squaredNorm()) * (1.0 + 0.3 * x.x()); });
    Field2D v = Field2D::sample(g, [&](const Point&) { return nd(rng); });
    double lambda = 0.5;
    Eigen::VectorXd Jv = residual_jacobian(u, p, lambda) * v.values.head(g->interior());
    auto fd = [&](double h) {
      Field2D a = u, b = u;
      a.values += h * v.values;
      b.values -= h * v.values;
      Eigen::VectorXd d = (nonlinear_residual(a, p, lambda).values - nonlinear_residual(b, p, lambda).values) / (2 * h);
      return (d.head(g->interior()) - Jv).cwiseAbs().maxCoeff() / Jv.cwiseAbs().maxCoeff();
    };
    double e1 = fd(1e-2), e2 = fd(5e-3);
    CAPTURE(p);
    CHECK(e1 < 1e-3);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("exact Liouville data has an O(h^2) residual") {
  LiouvilleRadial ex = LiouvilleRadial::concentrated(0.1);
  CHECK(8 * ex.delta == doctest::Approx(0.01 * std::pow(1 + ex.delta, 2)));
  CHECK(ex.delta * ex.delta - 798 * ex.delta + 1 == doctest::Approx(0.0).scale(1e3));
  CHECK(ex(1.0) == doctest::Approx(0.0).scale(1.0));
  LiouvilleRadial fl = LiouvilleRadial::flat(0.1);
  CHECK(fl.delta * ex.delta == doctest::Approx(1.0));

  std::vector<double> res;
  for (int nr : {64, 128, 256}) {
    auto g = polar(nr, nr / 2, 0.1 / std::sqrt(8.0));
    Field2D u = Field2D::sample(g, [&](const Point& x) { return ex(x.norm()); });
    Field2D R = nonlinear_residual(u, 1.0, 0.01);
    double s = 0.0;
    for (int k = 0; k < g->interior(); ++k) s = std::max(s, 0.01 * std::exp(u.values[k]));
    res.push_back(R.max_abs() / s);
  }
  CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.15));
  CHECK(res[1] / res[2] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("Newton from the ansatz recovers the concentrated Liouville branch") {
  auto gb = disk();
  auto an = build_ansatz(gb, {Point(0, 0)}, {1}, 1.0, 0.01);
  double eps = an.scales().eps;
  LiouvilleRadial ex = LiouvilleRadial::concentrated(eps);
  std::vector<double> err;
  for (int nr : {64, 128}) {
    auto g = polar(nr, nr / 2, eps * an.mu()[0]);
    Field2D seed = Field2D::sample(g, [&](const Point& x) { return an.U(x); });
    auto [u, rep] = newton_solve(seed, 1.0, 0.01);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 10);
    CHECK(rep.residual_max <= 1e-8 * rep.nonlinear_scale + 64 * rep.roundoff_floor);
    for (size_t i = 1; i < rep.residual_history.size(); ++i)
      CHECK(rep.residual_history[i] < rep.residual_history[i - 1]);
    double e = max_error(u, ex);
    CHECK(e <= 5 * g->h * g->h * ex(0.0));
    err.push_back(e);

    // the discrete solution is a fixed point; the continuous one is a full undamped step or two away
    auto again = newton_solve(u, 1.0, 0.01);
    CHECK(again.second.iterations == 0);
    Field2D exact = Field2D::sample(g, [&](const Point& x) { return ex(x.norm()); });
    auto near = newton_solve(exact, 1.0, 0.01);
    CHECK(near.second.iterations <= 2);
    for (double d : near.second.damping) CHECK(d == 1.0);
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("small data stays positive") {
  auto g = polar(64, 32);
  LiouvilleRadial fl = LiouvilleRadial::flat(0.1);
  // zero itself solves the p = 1 problem, so start from small positive data
  auto [u, rep] = newton_solve(Field2D::sample(g, [](const Point& x) { return 1e-3 * (1.0 - x.squaredNorm()); }), 1.0, 0.01);
  CHECK(rep.converged);
  for (int k = 0; k < g->interior(); ++k) CHECK(u.values[k] > 0.0);
  CHECK(max_error(u, fl) < 10 * g->h * g->h * fl(0.0));
}

TEST_CASE("invalid inputs are rejected") {
  auto g = polar(8, 8);
  Field2D f = Field2D::sample(g, [](const Point&) { return 1.0; });
  f.values[g->size() - 1] = 1.0;
  CHECK_THROWS_AS(newton_solve(f, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(newton_solve(Field2D::zeros(g), 2.5, 0.1), std::domain_error);
  CHECK_THROWS_AS(newton_solve(Field2D::zeros(g), 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(nodal_analysis(Field2D::zeros(g)), std::invalid_argument);
}

TEST_CASE("continuation in p reaches a single-signed p = 1.5 solution") {
  auto gb = disk();
  double lambda = 1e-4;
  auto target = build_ansatz(gb, {Point(0, 0)}, {1}, 1.5, lambda);
  auto g = polar(128, 64, target.scales().eps * target.mu()[0]);
  auto drift = [&](const ParameterPoint& q) {
    auto a = build_ansatz(gb, {Point(0, 0)}, {1}, q.p, q.lambda);
    return Field2D::sample(g, [&](const Point& x) { return a.U(x); });
  };
  std::vector<ParameterPoint> path;
  for (int k = 0; k <= 5; ++k) path.push_back({1.0 + 0.1 * k, lambda});
  auto [u, rep] = continuation(drift(path[0]), path, {}, drift);
  CHECK(rep.converged);
  CHECK(rep.path.size() == path.size());
  NodalSummary ns = nodal_analysis(u);
  CHECK(ns.components == 1);
  CHECK(ns.positive == 1);
  CHECK_FALSE(ns.boundary_touching);
  Eigen::Index kmax;
  u.values.maxCoeff(&kmax);
  CHECK(g->node(static_cast<int>(kmax)).norm() < 1e-3);
}

TEST_CASE("ansatz seed residual agrees with the ansatz error after rescaling") {
  auto gb = disk();
  auto an = build_ansatz(gb, {Point(0, 0)}, {1}, 1.5, 1e-3);
  const Scales& sc = an.scales();
  double conv = 1.0 / (sc.p * std::pow(sc.gamma, sc.p - 1) * sc.eps * sc.eps);
  std::vector<double> diff;
  double emax = 0.0;
  for (int nr : {256, 512}) {
    auto g = polar(nr, 16, sc.eps * an.mu()[0]);
    Field2D seed = Field2D::sample(g, [&](const Point& x) { return an.U(x); });
    Field2D R = nonlinear_residual(seed, sc.p, 1e-3);
    double d = 0.0;
    for (int i = 0; i < nr - 1; ++i) {
      int k = g->index(i, 3);
      double E = -an.residual(g->node(k) / sc.eps) * conv;
      emax = std::max(emax, std::abs(E));
      d = std::max(d, std::abs(R.values[k] - E));
    }
    diff.push_back(d);
  }
  CHECK(diff[0] < 0.05 * emax);
  CHECK(diff[0] / diff[1] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("nodal structure") {
  auto gb = disk();
  auto g = polar(128, 128);

  auto single = build_ansatz(gb, {Point(0, 0)}, {1}, 1.0, 1e-4);
  NodalSummary one = nodal_analysis(Field2D::sample(g, [&](const Point& x) { return single.U(x); }));
  CHECK(one.components == 1);
  CHECK_FALSE(one.boundary_touching);

  auto pair = build_ansatz(gb, {Point(-kPairT, 0), Point(kPairT, 0)}, {1, -1}, 1.0, 1e-4);
  NodalSummary two = nodal_analysis(Field2D::sample(g, [&](const Point& x) { return pair.U(x); }));
  CHECK(two.components == 2);
  CHECK(two.positive == 1);
  CHECK(two.negative == 1);
  CHECK(two.boundary_touching);

  // interior nodal circle
  NodalSummary ring = nodal_analysis(Field2D::sample(g, [](const Point& x) { return x.squaredNorm() - 0.25; }));
  CHECK(ring.components == 2);
  CHECK_FALSE(ring.boundary_touching);
}

TEST_CASE("boundary flux of the signed Green combination") {
  auto gb = disk();
  BoundaryFlux pair = boundary_flux(*gb, {Point(-kPairT, 0), Point(kPairT, 0)}, {1, -1});
  CHECK(std::abs(pair.integral) < 1e-6);
  CHECK(pair.changes_sign);
  BoundaryFlux single = boundary_flux(*gb, {Point(0.3, 0.1)}, {1});
  CHECK(single.integral == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK_FALSE(single.changes_sign);

  auto ge = std::make_shared<GreenBackend>(DomainSpec::ellipse(1.2, 0.8));
  BoundaryFlux e = boundary_flux(*ge, {Point(-0.4, 0.1), Point(0.35, -0.1)}, {1, -1});
  CHECK(std::abs(e.integral) < 1e-6);
  CHECK(e.changes_sign);
}
