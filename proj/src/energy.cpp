#include "bubbling/energy.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bubbling/quadrature.hpp"
#include "bubbling/special_integrals.hpp"

namespace bubbling {

namespace {
constexpr double kLog8 = 2.0794415416798357;

// distance from c along direction e to the boundary, in x units
double ray_exit(const GreenBackend& g, const Point& c, const Point& e) {
  if (g.analytic()) {
    double R = g.spec().radius, b = c.dot(e);
    return -b + std::sqrt(b * b - c.squaredNorm() + R * R);
  }
  double diam = g.diameter(), step = diam / 256.0;
  double lo = 0.0, hi = step;
  while (g.signed_distance(c + hi * e) < 0.0) {
    lo = hi;
    hi += step;
    if (hi > 2.0 * diam) throw std::runtime_error("ray does not leave the domain");
  }
  for (int it = 0; it < 80 && hi - lo > 1e-15 * diam; ++it) {
    double mid = 0.5 * (lo + hi);
    (g.signed_distance(c + mid * e) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void check_star_shaped(const GreenBackend& g, const Point& c) {
  const auto& bd = g.boundary();
  for (int j = 0; j < bd.n; ++j)
    if ((bd.x[j] - c).dot(bd.normal[j]) <= 0.0) {
      std::ostringstream os;
      os << "domain is not star-shaped about (" << c.x() << ", " << c.y() << ")";
      throw DomainError(os.str());
    }
}

// exp(gamma^p (|q|^p - 1)) and |q|^p for q = 1 + v / (p gamma^p)
void exponential_parts(double v, const Scales& sc, double& e, double& qp) {
  double s = sc.s();
  double delta = v / (sc.p * s);
  double q = 1.0 + delta;
  if (q == 0.0) {
    e = std::exp(-s);
    qp = 0.0;
    return;
  }
  double la = std::log1p(q > 0 ? delta : -2.0 - delta);
  double em = std::expm1(sc.p * la);
  e = std::exp(s * em);
  qp = 1.0 + em;
}
}  // namespace

std::vector<double> integrate_rescaled(const Ansatz& an, int k, const std::function<void(const Site&, double*)>& g,
                                       const DomainQuadrature& q) {
  const GreenBackend& gb = an.backend();
  const Config& xi = an.points();
  const auto& mu = an.mu();
  double eps = an.scales().eps;
  size_t m = xi.size();
  std::vector<double> nodes(q.gl), weights(q.gl);
  gauss_legendre(q.gl, nodes.data(), weights.data());
  if (!gb.analytic())
    for (const auto& c : xi) check_star_shaped(gb, c);
  std::vector<double> total(k, 0.0), buf(k);
  for (size_t i = 0; i < m; ++i) {
    for (int a = 0; a < q.angular; ++a) {
      double th = 2.0 * M_PI * (a + 0.5) / q.angular;
      Point e(std::cos(th), std::sin(th));
      double rmax = ray_exit(gb, xi[i], e) / eps;
      double smax = std::asinh(rmax / mu[i]);
      int panels = std::max(1, static_cast<int>(std::ceil(smax / q.panel)));
      double h = smax / panels;
      for (int pnl = 0; pnl < panels; ++pnl)
        for (int j = 0; j < q.gl; ++j) {
          double s = h * (pnl + 0.5 * (nodes[j] + 1.0));
          double rho = mu[i] * std::sinh(s);
          double jac = rho * mu[i] * std::cosh(s) * 0.5 * h * weights[j] * (2.0 * M_PI / q.angular);
          Site st{static_cast<int>(i), rho * e};
          double bi = 0.0, bs = 0.0;
          for (size_t l = 0; l < m; ++l) {
            double r2 = l == i ? rho * rho : ((xi[i] - xi[l]) / eps + st.z).squaredNorm();
            double b = mu[l] * mu[l] / std::pow(mu[l] * mu[l] + r2, 2);
            bs += b;
            if (l == i) bi = b;
          }
          double w = jac * bi / bs;
          g(st, buf.data());
          for (int c = 0; c < k; ++c) total[c] += w * buf[c];
        }
    }
  }
  return total;
}

EnergyReport j_lambda(const Ansatz& an, const DomainQuadrature& q) {
  const Scales& sc = an.scales();
  double ps = sc.p * sc.s();
  auto v = integrate_rescaled(
      an, 2,
      [&](const Site& y, double* out) {
        double V = an.V(y);
        double e, qp;
        exponential_parts(V, sc, e, qp);
        out[0] = 0.5 * an.minus_laplacian_V(y) * (V + ps);
        out[1] = e;
      },
      q);
  EnergyReport r;
  r.dirichlet = v[0];
  r.exponential = v[1];
  r.scaled = v[0] - v[1];
  double norm = sc.p * sc.p * std::pow(sc.gamma, 2.0 * (sc.p - 1.0));
  r.J = r.scaled / norm;
  r.phi = phi_m(an.backend(), an.points(), an.signs());
  r.log_eps = std::abs(std::log(sc.eps));
  double m = static_cast<double>(an.points().size());
  r.closed_scaled = 4.0 * M_PI * (m * (4.0 * r.log_eps - 4.0 + 2.0 * kLog8) - 8.0 * M_PI * r.phi);
  r.closed = r.closed_scaled / norm;
  r.discrepancy = r.scaled - r.closed_scaled;
  return r;
}

EnergyMoments energy_moments(double p, double mu, const RadialGridOptions& opt) {
  if (!(p > 0.0 && p <= 2.0)) throw std::domain_error("p must lie in (0, 2]");
  EnergyMoments M;
  M.p = p;
  M.mu = mu;
  const double l = std::log(mu), L = kLog8, pi = M_PI;
  bool layer2 = p != 1.0;
  CorrectionProfiles prof(p, mu, layer2 ? 2 : 1, opt);
  auto om = [&](double t) { return L - 2.0 * l - 2.0 * std::log1p(t * t); };
  auto w1 = [&](double t) { return prof.w(1, t); };
  auto B1 = [&](double t) { return w1(t) + 0.5 * om(t) * om(t); };
  const double nan = std::numeric_limits<double>::quiet_NaN();

  M.B1 = {bubble_moment(B1).value, 16.0 * pi * (2.0 * l - L + 2.0)};
  M.pA1_B1 = {bubble_moment([&](double t) { return p * om(t) + (p - 1.0) * B1(t); }).value,
              8.0 * pi * (p - 2.0) * (2.0 * l - L + 2.0)};
  M.A1B1_B1 = {bubble_moment([&](double t) { return om(t) * B1(t) + B1(t); }).value,
               2.0 * pi * (-40.0 * l * l + (40.0 * L - 32.0) * l - 10.0 * L * L + 16.0 * L - 16.0)};
  M.vanishing_combo = (2.0 - p) / p * M.B1.quadrature + 2.0 / p * M.pA1_B1.quadrature;
  if (!layer2) {
    M.A2_A1B1 = {nan, nan};
    M.B2_B1sq = {nan, nan};
    M.four_combo = nan;
    return M;
  }
  const double qq = 1.0 / (p - 1.0), c2 = (p - 2.0) / (2.0 * (p - 1.0)), c6 = (p - 2.0) / (6.0 * (p - 1.0));
  M.A2_A1B1 = {bubble_moment([&](double t) { return w1(t) + c2 * om(t) * om(t) + om(t) * B1(t); }).value,
               2.0 * pi *
                   (-(8.0 * qq + 40.0) * l * l + ((8.0 * qq + 40.0) * L - 16.0 * qq - 32.0) * l -
                    (2.0 * qq + 10.0) * L * L + (8.0 * qq + 16.0) * L - 16.0 * qq - 16.0)};
  M.B2_B1sq = {bubble_moment([&](double t) {
                 double o = om(t), b1 = B1(t);
                 double B2 = prof.w(2, t) + o * w1(t) + c6 * o * o * o;
                 return B2 + 0.5 * b1 * b1;
               }).value,
               2.0 * pi *
                   ((16.0 * qq + 64.0) * l * l + (32.0 * qq + 32.0 - (16.0 * qq + 64.0) * L) * l +
                    (4.0 * qq + 16.0) * L * L - (16.0 * qq + 16.0) * L + 32.0 * qq + 16.0)};
  M.four_combo = (p - 1.0) / (8.0 * pi) * (M.B2_B1sq.quadrature + 2.0 * M.A1B1_B1.quadrature) +
                 (p - 2.0) / std::pow(16.0 * pi, 2) * M.B1.quadrature * M.B1.quadrature;
  return M;
}

BetaReport beta_lambda(const Ansatz& an, const DomainQuadrature& q) {
  const Scales& sc = an.scales();
  double p = sc.p;
  double floor = std::exp(-sc.s());
  auto v = integrate_rescaled(
      an, 2,
      [&](const Site& y, double* out) {
        double e, qp;
        exponential_parts(an.V(y), sc, e, qp);
        out[0] = e - floor;
        out[1] = qp * e;
      },
      q);
  BetaReport r;
  r.p = p;
  r.m = static_cast<int>(an.points().size());
  r.gamma = sc.gamma;
  r.first_integral = v[0];
  r.second_integral = v[1];
  r.direct = 0.5 * std::pow(v[0], (2.0 - p) / p) * std::pow(v[1], 2.0 * (p - 1.0) / p);
  double fourpim = 4.0 * M_PI * r.m;
  double g2p = std::pow(sc.gamma, 2.0 * p);
  if (p == 1.0) {
    r.formula = fourpim;
  } else {
    double sum_b = 0.0, sum_b1 = 0.0;
    for (double mu : an.mu()) {
      EnergyMoments M = energy_moments(p, mu, {});
      sum_b += M.B2_B1sq.quadrature + 2.0 * M.A1B1_B1.quadrature;
      sum_b1 += M.B1.quadrature;
    }
    r.formula = fourpim * (1.0 + (p - 1.0) * (p - 1.0) / (p * p * g2p) / (8.0 * M_PI * r.m) * sum_b +
                           (p - 1.0) * (p - 2.0) / (p * p * g2p) / std::pow(16.0 * M_PI * r.m, 2) * sum_b1 * sum_b1);
  }
  r.deviation = r.direct - fourpim;
  r.formula_deviation = r.formula - fourpim;
  r.scaled_deviation = r.deviation * g2p / fourpim;
  r.predicted = 4.0 * (p - 1.0) / (p * p);
  return r;
}

}  // namespace bubbling
