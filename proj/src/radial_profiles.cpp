#include "bubbling/radial_profiles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "bubbling/quadrature.hpp"
#include "bubbling/special_integrals.hpp"

namespace bubbling {

namespace {
const double kL = std::log(8.0);

double theta_route(double y, Theta0Route route) {
  return route == Theta0Route::dilog ? theta0_dilog(y) : theta0(y);
}

double theta0_dy(double y) {
  double y2 = y * y;
  if (y2 < 1e-300) return 0.0;
  return -2.0 * std::log1p(y2) / (y * (1.0 + y2));
}
}  // namespace

double omega_mu(double mu, double r) {
  double d = mu * mu + r * r;
  return std::log(8.0 * mu * mu / (d * d));
}

double omega_mu_dr(double mu, double r) { return -4.0 * r / (mu * mu + r * r); }

double omega0_inf(double y, Theta0Route route) {
  double z = zeta0(y), e = eta0(y), th = theta_route(y, route);
  return (kL * kL + 2.0 * kL - 10.0) * z + 4.0 * z * e * e + (6.0 - 2.0 * kL) * e + 4.0 * th - 8.0 * z * th;
}

double omega1_inf(double y) { return 2.0 * (1.0 + kL) * zeta0(y) - 2.0 * eta0(y); }

double omega1_tilde(double mu, double y, Theta0Route route) {
  double l = std::log(mu);
  return -omega0_inf(y, route) - (1.0 - 2.0 * l) * omega1_inf(y) - 4.0 * (l * l - l) * zeta0(y);
}

double omega1_tilde_dy(double mu, double y) {
  double l = std::log(mu);
  double d = 1.0 + y * y;
  double z = 1.0 / d, e = std::log1p(y * y), th = theta0_dilog(y);
  double dz = -2.0 * y / (d * d), de = 2.0 * y / d, dth = theta0_dy(y);
  double dw0 = (kL * kL + 2.0 * kL - 10.0) * dz + 4.0 * (dz * e * e + 2.0 * z * e * de) + (6.0 - 2.0 * kL) * de +
               4.0 * dth - 8.0 * (dz * th + z * dth);
  double dw1 = 2.0 * (1.0 + kL) * dz - 2.0 * de;
  return -dw0 - (1.0 - 2.0 * l) * dw1 - 4.0 * (l * l - l) * dz;
}

double d1_closed(double mu) { return 4.0 * kL - 8.0 - 8.0 * std::log(mu); }

double d2_closed(double mu, double p) {
  double q = 1.0 / (p - 1.0), l = std::log(mu);
  return -(8.0 * q + 24.0) * l * l + ((8.0 * q + 24.0) * kL - 16.0 * q) * l - (2.0 * q + 6.0) * kL * kL +
         8.0 * q * kL - 16.0 * q;
}

// ---- source terms ---------------------------------------------------------

double source_f1(double om) { return -(om + 0.5 * om * om); }

double source_f2(double p, double om, double w1) {
  double c2 = (p - 2.0) / (2.0 * (p - 1.0)), c6 = (p - 2.0) / (6.0 * (p - 1.0));
  double A1 = om, B1 = w1 + 0.5 * om * om, A2 = w1 + c2 * om * om;
  double B2_minus_w2 = om * w1 + c6 * om * om * om;
  return -(A2 + A1 * B1 + B2_minus_w2 + 0.5 * B1 * B1);
}

double source_f3(double p, double om, double w1, double w2) {
  double c2 = (p - 2.0) / (2.0 * (p - 1.0)), c6 = (p - 2.0) / (6.0 * (p - 1.0));
  double c1 = (p - 2.0) / (p - 1.0), c3 = (p - 2.0) * (p - 3.0) / (6.0 * (p - 1.0) * (p - 1.0));
  double c24 = c3 / 4.0;
  double om2 = om * om;
  double A1 = om, B1 = w1 + 0.5 * om2, A2 = w1 + c2 * om2;
  double B2 = w2 + om * w1 + c6 * om2 * om;
  double A3 = w2 + c1 * om * w1 + c3 * om2 * om;
  double B3_minus_w3 = 0.5 * w1 * w1 + om * w2 + c2 * om2 * w1 + c24 * om2 * om2;
  return -(A3 + A2 * B1 + A1 * (B2 + 0.5 * B1 * B1) + B3_minus_w3 + B1 * B2 + B1 * B1 * B1 / 6.0);
}

double source_f2_direct(double p, double om, double w1) {
  double h = w1 + 0.5 * om * om;
  return -((w1 + (p - 2.0) / (2.0 * (p - 1.0)) * om * om) + om * h + om * w1 +
           (p - 2.0) / (6.0 * (p - 1.0)) * om * om * om + 0.5 * h * h);
}

double source_f3_direct(double p, double om, double w1, double w2) {
  double q = p - 1.0;
  double h = w1 + 0.5 * om * om;
  double g2 = w2 + om * w1 + (p - 2.0) / (6.0 * q) * om * om * om;
  return -((w2 + (p - 2.0) / q * om * w1 + (p - 2.0) * (p - 3.0) / (6.0 * q * q) * om * om * om) +
           (w1 + (p - 2.0) / (2.0 * q) * om * om) * h +
           om * (om * w1 + w2 + (p - 2.0) / (6.0 * q) * om * om * om + 0.5 * h * h) + om * w2 +
           (p - 2.0) / (2.0 * q) * om * om * w1 + (p - 2.0) * (p - 3.0) / (24.0 * q * q) * om * om * om * om +
           0.5 * w1 * w1 + h * g2 + h * h * h / 6.0);
}

// ---- radial solver --------------------------------------------------------

namespace {

double gfun(double s) {
  double a = s * s + 1.0, b = s + 1.0;
  return a * a / (s * b * b);
}

double hfun(double t, double ft) {
  double d = 1.0 + t * t;
  return t * (1.0 - t * t) * ft / (d * d * d);
}

double qfun(double s, double I, double fs) {
  double d = 1.0 + s * s;
  return (s * s + 4.0 * s + 1.0) * I / (s * (s + 1.0) * d) - s * (1.0 + s) * fs / (d * d * d);
}

// raw solution and derivative from I, P, f at t
void raw_at(double t, double I, double P, double ft, double& w, double& dw) {
  if (t == 0.0) {
    w = 0.0;
    dw = 0.0;
    return;
  }
  double g = gfun(t);
  double dlg = 4.0 * t / (t * t + 1.0) - 1.0 / t - 2.0 / (t + 1.0);
  double phi = 8.0 * g * I;
  double dphi = 8.0 * g * (dlg * I + hfun(t, ft));
  double dP = 8.0 * g * qfun(t, I, ft);
  double d = 1.0 + t * t;
  double N = (1.0 + t) * phi + (1.0 - t * t) * P;
  double dN = phi + (1.0 + t) * dphi - 2.0 * t * P + (1.0 - t * t) * dP;
  w = N / d;
  dw = (dN * d - 2.0 * t * N) / (d * d);
}

double z0(double t) { return (t * t - 1.0) / (t * t + 1.0); }
double dz0(double t) {
  double d = 1.0 + t * t;
  return 4.0 * t / (d * d);
}

}  // namespace

RadialSolution solve_radial(const std::function<double(double)>& f, const RadialGridOptions& opt) {
  const int N = opt.nodes, n = opt.gl_points;
  if (N < 16 || n < 2 || n > 32) throw std::invalid_argument("solve_radial: bad grid options");
  RadialSolution sol;
  sol.f_ = f;

  {
    double worst = 0.0, base = 0.0;
    for (double t : {1e4, 1e7}) {
      double l = 1.0 + std::log(t);
      base = std::max(base, std::fabs(f(t)) / std::pow(l, 8));
    }
    double l = 1.0 + std::log(1e16);
    worst = std::fabs(f(1e16)) / std::pow(l, 8);
    sol.growth_check = base > 0.0 ? worst / base : 0.0;
    if (!std::isfinite(worst) || worst > 10.0 * base + 1e-300)
      throw std::runtime_error("solve_radial: source grows faster than a power of log");
  }

  std::vector<double> xg(n), wg(n);
  gauss_legendre(n, xg.data(), wg.data());

  const double h = std::asinh(opt.t_max) / N;
  sol.h_ = h;
  sol.t_.resize(N + 1);
  for (int k = 0; k <= N; ++k) sol.t_[k] = std::sinh(k * h);

  std::vector<double> I(N + 1, 0.0), P(N + 1, 0.0), fk(N + 1);
  for (int k = 0; k <= N; ++k) fk[k] = f(sol.t_[k]);
  for (int k = 0; k < N; ++k) {
    double a = sol.t_[k], b = sol.t_[k + 1], half = 0.5 * (b - a);
    double sI = 0.0, sP = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = a + half * (1.0 + xg[i]);
      double fx = f(x);
      double hh = 0.5 * (x - a), Ix = 0.0;
      for (int j = 0; j < n; ++j) {
        double y = a + hh * (1.0 + xg[j]);
        Ix += wg[j] * hfun(y, f(y));
      }
      Ix = I[k] + hh * Ix;
      sI += wg[i] * hfun(x, fx);
      sP += wg[i] * 8.0 * gfun(x) * qfun(x, Ix, fx);
    }
    I[k + 1] = I[k] + half * sI;
    P[k + 1] = P[k] + half * sP;
  }

  std::vector<double> raw(N + 1), draw(N + 1);
  for (int k = 0; k <= N; ++k) raw_at(sol.t_[k], I[k], P[k], fk[k], raw[k], draw[k]);

  const double T = sol.t_[N];
  sol.slope_D = (1.0 + T * T) / T * draw[N];
  sol.offset = raw[N] - 0.5 * sol.slope_D * std::log1p(T * T);

  sol.w_.resize(N + 1);
  sol.dw_.resize(N + 1);
  sol.d2w_.resize(N + 1);
  for (int k = 0; k <= N; ++k) {
    double t = sol.t_[k];
    double w = raw[k] - sol.offset * z0(t);
    double dw = draw[k] - sol.offset * dz0(t);
    double d = 1.0 + t * t;
    double e = 8.0 / (d * d);
    double d2w = t == 0.0 ? -4.0 * (w - fk[k]) : -dw / t - e * (w - fk[k]);
    sol.w_[k] = w;
    sol.dw_[k] = dw;
    sol.d2w_[k] = d2w;
  }
  sol.tail_c_ = (sol.w_[N] - 0.5 * sol.slope_D * std::log1p(T * T)) * T;

  sol.moment_D = psi0_moment(f, 1e-12).value;

  auto Iq = [&](double s) { return integrate([&](double t) { return hfun(t, f(t)); }, 0.0, s, 1e-13).value; };
  sol.phi_one = 8.0 * Iq(1.0);
  {
    auto phi = [&](double s) { return 8.0 * gfun(s) * Iq(s); };
    auto sym = [&](double d) { return 0.5 * (phi(1.0 + d) + phi(1.0 - d)); };
    double prevR = 0.0, Aprev = sym(0.125);
    int stable = 0;
    bool ok = false;
    for (int k = 4; k <= 24; ++k) {
      double A = sym(std::ldexp(1.0, -k));
      double R = (4.0 * A - Aprev) / 3.0;
      if (k > 4 && std::fabs(R - prevR) <= 1e-10) {
        if (++stable >= 3) {
          ok = true;
          sol.phi_one_limit = R;
          break;
        }
      } else {
        stable = 0;
      }
      prevR = R;
      Aprev = A;
    }
    if (!ok) throw std::runtime_error("solve_radial: phi_f(1) limit did not stabilise");
  }
  return sol;
}

double RadialSolution::value(double t) const {
  t = std::fabs(t);
  const int N = static_cast<int>(t_.size()) - 1;
  if (t >= t_[N]) return 0.5 * slope_D * std::log1p(t * t) + tail_c_ / t;
  double s = std::asinh(t);
  int k = std::min(static_cast<int>(s / h_), N - 1);
  double u = (s - k * h_) / h_;
  double c0 = std::cosh(k * h_), s0 = std::sinh(k * h_);
  double c1 = std::cosh((k + 1) * h_), s1 = std::sinh((k + 1) * h_);
  double y0 = w_[k], y1 = w_[k + 1];
  double p0 = dw_[k] * c0, p1 = dw_[k + 1] * c1;
  double q0 = d2w_[k] * c0 * c0 + dw_[k] * s0, q1 = d2w_[k + 1] * c1 * c1 + dw_[k + 1] * s1;
  double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
  double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5, H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
  double H2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5, H3 = 10 * u3 - 15 * u4 + 6 * u5;
  double H4 = -4 * u3 + 7 * u4 - 3 * u5, H5 = 0.5 * u3 - u4 + 0.5 * u5;
  return H0 * y0 + h_ * H1 * p0 + h_ * h_ * H2 * q0 + H3 * y1 + h_ * H4 * p1 + h_ * h_ * H5 * q1;
}

double RadialSolution::derivative(double t) const {
  double sgn = t < 0 ? -1.0 : 1.0;
  t = std::fabs(t);
  const int N = static_cast<int>(t_.size()) - 1;
  if (t >= t_[N]) return sgn * (slope_D * t / (1.0 + t * t) - tail_c_ / (t * t));
  double s = std::asinh(t);
  int k = std::min(static_cast<int>(s / h_), N - 1);
  double u = (s - k * h_) / h_;
  double c0 = std::cosh(k * h_), s0 = std::sinh(k * h_);
  double c1 = std::cosh((k + 1) * h_), s1 = std::sinh((k + 1) * h_);
  double y0 = w_[k], y1 = w_[k + 1];
  double p0 = dw_[k] * c0, p1 = dw_[k + 1] * c1;
  double q0 = d2w_[k] * c0 * c0 + dw_[k] * s0, q1 = d2w_[k + 1] * c1 * c1 + dw_[k + 1] * s1;
  double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
  double G0 = -30 * u2 + 60 * u3 - 30 * u4, G1 = 1 - 18 * u2 + 32 * u3 - 15 * u4;
  double G2 = u - 4.5 * u2 + 6 * u3 - 2.5 * u4, G3 = 30 * u2 - 60 * u3 + 30 * u4;
  double G4 = -12 * u2 + 28 * u3 - 15 * u4, G5 = 1.5 * u2 - 4 * u3 + 2.5 * u4;
  double dWds = (G0 * y0 + h_ * G1 * p0 + h_ * h_ * G2 * q0 + G3 * y1 + h_ * G4 * p1 + h_ * h_ * G5 * q1) / h_;
  return sgn * dWds / std::sqrt(1.0 + t * t);
}

double RadialSolution::raw_value(double t) const { return value(t) + offset * z0(t); }

// ---- correction layers ----------------------------------------------------

CorrectionProfiles::CorrectionProfiles(double p, double mu, int jmax, const RadialGridOptions& opt)
    : p_(p), mu_(mu), jmax_(jmax) {
  if (!(p > 0.0 && p < 2.0 + 1e-12)) throw std::invalid_argument("correction profiles: p outside (0,2]");
  if (!(mu > 0.0)) throw std::invalid_argument("correction profiles: mu must be positive");
  if (jmax < 1 || jmax > 3) throw std::invalid_argument("correction profiles: order must be 1..3");
  if (jmax >= 2 && p == 1.0)
    throw std::invalid_argument("correction profiles: orders j >= 2 are undefined at p = 1");
  const double a = kL - 2.0 * std::log(mu);
  auto om = [a](double t) { return a - 2.0 * std::log1p(t * t); };

  sol_[1] = std::make_shared<RadialSolution>(solve_radial([=](double t) { return source_f1(om(t)); }, opt));
  D_[1] = sol_[1]->moment_D;
  Dslope_[1] = sol_[1]->slope_D;
  if (jmax >= 2) {
    sol_[2] = std::make_shared<RadialSolution>(
        solve_radial([=](double t) { return source_f2(p, om(t), omega1_tilde(mu, t)); }, opt));
    D_[2] = sol_[2]->moment_D;
    Dslope_[2] = sol_[2]->slope_D;
  }
  if (jmax >= 3) {
    auto s2 = sol_[2];
    sol_[3] = std::make_shared<RadialSolution>(
        solve_radial([=](double t) { return source_f3(p, om(t), omega1_tilde(mu, t), s2->value(t)); }, opt));
    D_[3] = sol_[3]->moment_D;
    Dslope_[3] = sol_[3]->slope_D;
  }
}

double CorrectionProfiles::w(int j, double t) const {
  if (j == 1) return omega1_tilde(mu_, t);
  if (j < 1 || j > jmax_) throw std::out_of_range("correction layer not built");
  return sol_[j]->value(t);
}

double CorrectionProfiles::f(int j, double t) const {
  if (j < 1 || j > jmax_) throw std::out_of_range("correction layer not built");
  return sol_[j]->source(t);
}

double CorrectionProfiles::omega(int j, double r) const { return w(j, r / mu_); }

double CorrectionProfiles::omega_dr(int j, double r) const {
  if (j == 1) return omega1_tilde_dy(mu_, r / mu_) / mu_;
  if (j < 1 || j > jmax_) throw std::out_of_range("correction layer not built");
  return sol_[j]->derivative(r / mu_) / mu_;
}

double CorrectionProfiles::source(int j, double r) const { return f(j, r / mu_); }

// ---- D constants ----------------------------------------------------------

namespace {
std::mutex d3_mutex;
std::map<std::pair<double, int>, std::vector<double>> d3_cache;
}  // namespace

DConstants::DConstants(double p, const RadialGridOptions& opt) : p_(p) {
  if (p == 1.0) return;
  const int K = 7;
  for (int k = 0; k < K; ++k) l_nodes_.push_back(4.0 * std::cos((2.0 * k + 1.0) * M_PI / (2.0 * K)));
  std::lock_guard<std::mutex> lock(d3_mutex);
  auto key = std::make_pair(p, opt.nodes);
  auto it = d3_cache.find(key);
  if (it != d3_cache.end()) {
    d3_nodes_ = it->second;
    return;
  }
  for (double l : l_nodes_) {
    double mu = std::exp(l), a = kL - 2.0 * l;
    auto om = [a](double t) { return a - 2.0 * std::log1p(t * t); };
    RadialSolution s2 = solve_radial([=](double t) { return source_f2(p, om(t), omega1_tilde(mu, t)); }, opt);
    double d3 =
        psi0_moment([&](double t) { return source_f3(p, om(t), omega1_tilde(mu, t), s2.value(t)); }, 1e-12).value;
    d3_nodes_.push_back(d3);
  }
  d3_cache[key] = d3_nodes_;
}

double DConstants::operator()(int j, double mu) const {
  if (j == 1) return d1_closed(mu);
  if (p_ == 1.0) throw std::invalid_argument("D^j for j >= 2 is undefined at p = 1");
  if (j == 2) return d2_closed(mu, p_);
  if (j != 3) throw std::out_of_range("D^j: j must be 1..3");
  double l = std::log(mu), v = 0.0;
  for (size_t k = 0; k < l_nodes_.size(); ++k) {
    double L = 1.0;
    for (size_t m = 0; m < l_nodes_.size(); ++m)
      if (m != k) L *= (l - l_nodes_[m]) / (l_nodes_[k] - l_nodes_[m]);
    v += L * d3_nodes_[k];
  }
  return v;
}

}  // namespace bubbling
