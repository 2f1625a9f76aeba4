#include "bubbling/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bubbling {

namespace {
constexpr double kLog8 = 2.0794415416798357;
constexpr double kTau = 10.0;
constexpr double kTheta = 0.9;

double scale_equation(double p, double lambda, double s) {
  return (1.0 - 0.5 * p) * s + std::log(p) + std::log(lambda) + 2.0 * (p - 1.0) / p * std::log(s);
}
double scale_equation_ds(double p, double s) { return (1.0 - 0.5 * p) + 2.0 * (p - 1.0) / (p * s); }

std::vector<double> layer_sums(const DConstants* D, const std::array<double, 4>& c, const std::vector<double>& mu,
                               double p) {
  std::vector<double> S(mu.size(), 0.0);
  if (p == 1.0) return S;
  for (size_t i = 0; i < mu.size(); ++i)
    for (int j = 1; j <= 3; ++j) S[i] += c[j] * (*D)(j, mu[i]);
  return S;
}

struct PairData {
  std::vector<double> H;               // H(xi_i, xi_i)
  std::vector<std::vector<double>> G;  // G(xi_i, xi_k)
};

PairData pair_data(const GreenBackend& g, const Config& xi) {
  PairData pd;
  size_t m = xi.size();
  pd.H.resize(m);
  pd.G.assign(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i) {
    pd.H[i] = g.robin(xi[i]);
    for (size_t k = i + 1; k < m; ++k) pd.G[i][k] = pd.G[k][i] = g.green(xi[i], xi[k]);
  }
  return pd;
}

std::vector<double> mu_residual(const PairData& pd, const Signs& a, const Scales& sc, const std::array<double, 4>& c,
                                const DConstants* D, const std::vector<double>& mu) {
  size_t m = mu.size();
  std::vector<double> S = layer_sums(D, c, mu, sc.p), R(m);
  for (size_t i = 0; i < m; ++i) {
    double rhs = (1.0 - 0.25 * S[i]) * 8.0 * M_PI * pd.H[i] + S[i] * std::log(sc.eps * mu[i]);
    for (size_t k = 0; k < m; ++k)
      if (k != i) rhs += (1.0 - 0.25 * S[k]) * 8.0 * M_PI * a[i] * a[k] * pd.G[i][k];
    R[i] = std::log(8.0 * mu[i] * mu[i]) - rhs;
  }
  return R;
}

std::shared_ptr<DConstants> dconstants_for(double p, const RadialGridOptions& opt) {
  if (p == 1.0) return nullptr;
  return std::make_shared<DConstants>(p, opt);
}
}  // namespace

double Scales::s() const { return std::pow(gamma, p); }

double Scales::relation_residual() const {
  double lg = std::log(p) + std::log(lambda) + 2.0 * (p - 1.0) * std::log(gamma) + 2.0 * std::log(eps) + s();
  return std::abs(std::expm1(lg));
}

double Scales::log_relation_residual() const {
  double ps = p * s();
  return std::abs(ps + 4.0 * std::log(eps)) / ps;
}

Scales resolve_scales(double p, double lambda) {
  if (!(p > 0.0 && p < 2.0)) throw std::domain_error("p must lie in (0, 2)");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::domain_error("lambda must be positive");
  double lo;
  if (p < 1.0) {
    lo = 4.0 * (1.0 - p) / (p * (2.0 - p));  // minimiser of the scalar equation
  } else {
    lo = 1e-12;
  }
  double flo = scale_equation(p, lambda, lo);
  if (!(flo < 0.0)) {
    std::ostringstream os;
    os << "no solution of the scale relations for p = " << p << ", lambda = " << lambda
       << " (equation is positive at s = " << lo << ")";
    throw std::domain_error(os.str());
  }
  double hi = std::max(2.0 * lo, 1.0);
  while (scale_equation(p, lambda, hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw std::domain_error("scale relations: root bracket not found");
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double f = scale_equation(p, lambda, s);
    if (f < 0) lo = s;
    else hi = s;
    double sn = s - f / scale_equation_ds(p, s);
    if (!(sn > lo && sn < hi)) sn = 0.5 * (lo + hi);
    if (std::abs(sn - s) <= 1e-15 * s) {
      s = sn;
      break;
    }
    s = sn;
  }
  Scales sc;
  sc.p = p;
  sc.lambda = lambda;
  sc.gamma = std::pow(s, 1.0 / p);
  sc.eps = std::exp(-0.25 * p * s);
  return sc;
}

std::array<double, 4> layer_weights(const Scales& sc) {
  std::array<double, 4> c{};
  if (sc.p == 1.0) return c;
  double r = (sc.p - 1.0) / sc.p / sc.s();
  c[0] = 1.0;
  for (int j = 1; j <= 3; ++j) c[j] = c[j - 1] * r;
  c[0] = 0.0;
  return c;
}

double separation_scale(const GreenBackend& g, const Config& xi) {
  double m = INFINITY;
  for (size_t i = 0; i < xi.size(); ++i) {
    m = std::min(m, -g.signed_distance(xi[i]));
    for (size_t k = i + 1; k < xi.size(); ++k) m = std::min(m, (xi[i] - xi[k]).norm());
  }
  return 0.25 * m;
}

double default_d(const GreenBackend& g, const Config& xi) { return std::min(separation_scale(g, xi), 0.01); }

std::vector<double> mu_system_residual(const GreenBackend& g, const Config& xi, const Signs& a, const Scales& sc,
                                       const std::vector<double>& mu, const DConstants* D) {
  std::shared_ptr<DConstants> own;
  if (!D && sc.p != 1.0) D = (own = dconstants_for(sc.p, {})).get();
  return mu_residual(pair_data(g, xi), a, sc, layer_weights(sc), D, mu);
}

std::vector<double> mu_limit_log8mu2(const GreenBackend& g, const Config& xi, const Signs& a, double p) {
  PairData pd = pair_data(g, xi);
  std::vector<double> out(xi.size());
  for (size_t i = 0; i < xi.size(); ++i) {
    double phi = pd.H[i];
    for (size_t k = 0; k < xi.size(); ++k)
      if (k != i) phi += a[i] * a[k] * pd.G[i][k];
    out[i] = 2.0 * (p - 1.0) / (2.0 - p) * (1.0 - kLog8) + 8.0 * M_PI / (2.0 - p) * phi;
  }
  return out;
}

MuSolution solve_mu(const GreenBackend& g, const Config& xi, const Signs& a, const Scales& sc, const DConstants* D,
                    double tol) {
  check_signs(a);
  if (xi.size() != a.size()) throw std::invalid_argument("number of points and signs differ");
  std::shared_ptr<DConstants> own;
  if (!D && sc.p != 1.0) D = (own = dconstants_for(sc.p, {})).get();
  PairData pd = pair_data(g, xi);
  auto c = layer_weights(sc);
  size_t m = xi.size();
  std::vector<double> x(m);
  auto lim = mu_limit_log8mu2(g, xi, a, sc.p);
  for (size_t i = 0; i < m; ++i) x[i] = 0.5 * (lim[i] - kLog8);
  auto mus = [](const std::vector<double>& l) {
    std::vector<double> mu(l.size());
    for (size_t i = 0; i < l.size(); ++i) mu[i] = std::exp(l[i]);
    return mu;
  };

  MuSolution out;
  // fixed point x <- x - R/2 (the system reads 2 x_i + log 8 = rhs_i)
  for (int it = 0; it < 100; ++it) {
    auto R = mu_residual(pd, a, sc, c, D, mus(x));
    double nr = 0;
    for (size_t i = 0; i < m; ++i) {
      x[i] -= 0.5 * R[i];
      nr = std::max(nr, std::abs(R[i]));
    }
    ++out.iterations;
    if (nr < 1e-6) break;
  }
  // Newton polish with a difference Jacobian in log mu
  for (int it = 0; it < 30; ++it) {
    auto R = mu_residual(pd, a, sc, c, D, mus(x));
    Eigen::VectorXd r(m);
    for (size_t i = 0; i < m; ++i) r[i] = R[i];
    ++out.iterations;
    if (r.cwiseAbs().maxCoeff() < 0.01 * tol) break;
    Eigen::MatrixXd J(m, m);
    for (size_t k = 0; k < m; ++k) {
      double h = 1e-6;
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      auto Rp = mu_residual(pd, a, sc, c, D, mus(xp)), Rm = mu_residual(pd, a, sc, c, D, mus(xm));
      for (size_t i = 0; i < m; ++i) J(i, k) = (Rp[i] - Rm[i]) / (2 * h);
    }
    Eigen::VectorXd dx = J.partialPivLu().solve(-r);
    for (size_t i = 0; i < m; ++i) x[i] += dx[i];
  }
  out.mu = mus(x);
  auto R = mu_residual(pd, a, sc, c, D, out.mu);
  for (double r : R) out.residual = std::max(out.residual, std::abs(r));
  if (!(out.residual <= tol)) {
    std::ostringstream os;
    os << "concentration-parameter system did not converge (residual " << out.residual << ")";
    throw std::runtime_error(os.str());
  }
  double d = default_d(g, xi);
  for (double mu : out.mu)
    if (mu < d || mu > 1.0 / d) {
      std::ostringstream os;
      os << "concentration parameter " << mu << " outside [" << d << ", " << 1.0 / d << "]";
      throw std::runtime_error(os.str());
    }
  return out;
}

double nonlinearity(double v, const Scales& sc) {
  double s = sc.s();
  double delta = v / (sc.p * s);
  double q = 1.0 + delta;
  if (q == 0.0) return 0.0;
  double am1 = q > 0 ? delta : -2.0 - delta;  // |q| - 1
  double la = std::log1p(am1);
  double e = (sc.p - 1.0) * la + s * std::expm1(sc.p * la);
  return (q > 0 ? 1.0 : -1.0) * std::exp(e);
}

double nonlinearity_prime(double v, const Scales& sc) {
  double s = sc.s();
  double delta = v / (sc.p * s);
  double q = 1.0 + delta;
  double am1 = q > 0 ? delta : -2.0 - delta;
  double la = std::log1p(am1);
  double ex = s * std::expm1(sc.p * la);
  // (p-1)/(p s) |q|^{p-2} e^{...} + |q|^{2(p-1)} e^{...}
  double t1 = q == 0.0 ? (sc.p > 2.0 ? 0.0 : INFINITY) : (sc.p - 1.0) / (sc.p * s) * std::exp((sc.p - 2.0) * la + ex);
  if (sc.p == 1.0) t1 = 0.0;
  double t2 = std::exp(2.0 * (sc.p - 1.0) * la + ex);
  return t1 + t2;
}

double default_sigma(double p) { return 0.5 * std::min((2.0 - p) / p, 0.5); }

Ansatz::Ansatz(std::shared_ptr<const GreenBackend> g, Config xi, Signs a, Scales sc, std::vector<double> mu,
               const AnsatzOptions& opt)
    : g_(std::move(g)), xi_(std::move(xi)), a_(std::move(a)), sc_(sc), mu_(std::move(mu)), opt_(opt) {
  check_signs(a_);
  size_t m = xi_.size();
  if (a_.size() != m || mu_.size() != m) throw std::invalid_argument("ansatz: inconsistent sizes");
  d_ = default_d(*g_, xi_);
  c_ = layer_weights(sc_);
  layers_ = sc_.p == 1.0 ? 0 : 3;
  auto D = dconstants_for(sc_.p, opt_.radial);
  D_.assign(m, {});
  prof_.resize(m);
  for (size_t i = 0; i < m; ++i) {
    D_[i][1] = d1_closed(mu_[i]);
    if (layers_ > 0) {
      for (int j = 2; j <= 3; ++j) D_[i][j] = (*D)(j, mu_[i]);
      prof_[i] = std::make_shared<CorrectionProfiles>(sc_.p, mu_[i], 3, opt_.radial);
    }
  }
  if (!g_->analytic())
    for (size_t i = 0; i < m; ++i) Hfield_.push_back(std::make_shared<HarmonicField>(g_->regular_part_field(xi_[i])));
  if (opt_.exact_projection) {
    double ps = sc_.p * sc_.s();
    for (size_t i = 0; i < m; ++i) {
      exact_.push_back(std::make_shared<HarmonicField>(g_->harmonic_extension(
          [&, i, ps](const Point& xb) { return -(ps + bubble(static_cast<int>(i), (xb - xi_[i]).norm() / sc_.eps)); })));
    }
  }
}

double Ansatz::bubble(int i, double r) const {
  double v = omega_mu(mu_[i], r);
  for (int j = 1; j <= layers_; ++j) v += c_[j] * prof_[i]->omega(j, r);
  return v;
}

double Ansatz::projection(int i, const Point& x) const {
  if (opt_.exact_projection) return (*exact_[i])(x);
  double S = 0.0;
  for (int j = 1; j <= layers_; ++j) S += c_[j] * D_[i][j];
  double H = g_->analytic() ? g_->regular_part(x, xi_[i]) : (*Hfield_[i])(x);
  return (1.0 - 0.25 * S) * 8.0 * M_PI * H - std::log(8.0 * mu_[i] * mu_[i]) + S * std::log(sc_.eps * mu_[i]);
}

double Ansatz::U(const Point& x) const {
  double ps = sc_.p * sc_.s();
  double v = 0.0;
  for (size_t i = 0; i < xi_.size(); ++i)
    v += a_[i] * (ps + bubble(static_cast<int>(i), (x - xi_[i]).norm() / sc_.eps) + projection(static_cast<int>(i), x));
  return v / (sc_.p * std::pow(sc_.gamma, sc_.p - 1.0));
}

Point Ansatz::locate(const Site& s, std::vector<double>& r) const {
  size_t m = xi_.size();
  r.resize(m);
  if (s.anchor < 0) {
    for (size_t k = 0; k < m; ++k) r[k] = (s.z - xi_[k] / sc_.eps).norm();
    return sc_.eps * s.z;
  }
  const Point& c = xi_[s.anchor];
  for (size_t k = 0; k < m; ++k)
    r[k] = static_cast<int>(k) == s.anchor ? s.z.norm() : ((c - xi_[k]) / sc_.eps + s.z).norm();
  return c + sc_.eps * s.z;
}

double Ansatz::V(const Site& s) const {
  std::vector<double> r;
  Point x = locate(s, r);
  double ps = sc_.p * sc_.s();
  int asum = 0;
  double v = 0.0;
  for (size_t i = 0; i < xi_.size(); ++i) {
    asum += a_[i];
    v += a_[i] * (bubble(static_cast<int>(i), r[i]) + projection(static_cast<int>(i), x));
  }
  return v + (asum - 1) * ps;
}

double Ansatz::minus_laplacian_V(const Site& s) const {
  std::vector<double> r;
  locate(s, r);
  double v = 0.0;
  for (size_t i = 0; i < xi_.size(); ++i) {
    double br = 1.0;
    for (int j = 1; j <= layers_; ++j) br += c_[j] * (prof_[i]->omega(j, r[i]) - prof_[i]->source(j, r[i]));
    v += a_[i] * std::exp(omega_mu(mu_[i], r[i])) * br;
  }
  return v;
}

double Ansatz::residual(const Site& s) const { return minus_laplacian_V(s) - nonlinearity(V(s), sc_); }

double Ansatz::weight(const Site& s, double sigma) const {
  std::vector<double> r;
  locate(s, r);
  double w = 0.0;
  for (size_t i = 0; i < xi_.size(); ++i)
    w += std::pow(mu_[i], sigma) * std::pow(mu_[i] * mu_[i] + r[i] * r[i], -0.5 * (2.0 + sigma));
  return 1.0 / w;
}

double Ansatz::potential(const Site& s) const { return nonlinearity_prime(V(s), sc_); }

double Ansatz::far_field(const Point& x) const {
  double v = 0.0;
  for (size_t i = 0; i < xi_.size(); ++i) {
    double S = 0.0;
    for (int j = 1; j <= layers_; ++j) S += c_[j] * D_[i][j];
    v += (1.0 - 0.25 * S) * 8.0 * M_PI * a_[i] * g_->green(x, xi_[i]);
  }
  return v / (sc_.p * std::pow(sc_.gamma, sc_.p - 1.0));
}

double Ansatz::kernel(int i, int j, const Site& s) const {
  Point z = s.z;
  if (s.anchor < 0) z -= xi_[i] / sc_.eps;
  else if (s.anchor != i) z += (xi_[s.anchor] - xi_[i]) / sc_.eps;
  double r2 = z.squaredNorm(), m2 = mu_[i] * mu_[i];
  if (j == 0) return (r2 - m2) / (r2 + m2);
  if (j == 1 || j == 2) return 4.0 * mu_[i] * z[j - 1] / (r2 + m2);
  throw std::out_of_range("kernel index must be 0, 1 or 2");
}

Ansatz build_ansatz(std::shared_ptr<const GreenBackend> g, const Config& xi, const Signs& a, double p, double lambda,
                    const AnsatzOptions& opt) {
  Scales sc = resolve_scales(p, lambda);
  std::shared_ptr<DConstants> D = dconstants_for(p, opt.radial);
  MuSolution mu = solve_mu(*g, xi, a, sc, D.get());
  return Ansatz(std::move(g), xi, a, sc, mu.mu, opt);
}

ResidualReport residual_norm(const Ansatz& an, double sigma, const ResidualGrid& grid, bool keep_samples) {
  double p = an.scales().p;
  double smax = std::min((2.0 - p) / p, 0.5);
  if (!(sigma > 0.0 && sigma < smax)) throw std::invalid_argument("sigma must lie in (0, min{(2-p)/p, 1/2})");
  const GreenBackend& g = an.backend();
  double eps = an.scales().eps;
  double leps = std::abs(std::log(eps));
  const Config& xi = an.points();
  size_t m = xi.size();

  std::vector<Site> sites;
  for (size_t i = 0; i < m; ++i) {
    int a = static_cast<int>(i);
    sites.push_back({a, Point(0, 0)});
    double r0 = grid.inner_factor * an.mu()[i], r1 = separation_scale(g, xi) / eps;
    for (int k = 0; k < grid.radial; ++k) {
      double rho = r0 * std::pow(r1 / r0, static_cast<double>(k) / (grid.radial - 1));
      for (int l = 0; l < grid.angular; ++l) {
        double th = 2.0 * M_PI * (l + 0.5) / grid.angular;
        sites.push_back({a, rho * Point(std::cos(th), std::sin(th))});
      }
    }
  }
  auto anchored = [&](const Point& x) {
    int k = 0;
    for (size_t i = 1; i < m; ++i)
      if ((x - xi[i]).norm() < (x - xi[k]).norm()) k = static_cast<int>(i);
    return Site{k, (x - xi[k]) / eps};
  };
  const auto& bd = g.boundary();
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& q : bd.x) {
    xmin = std::min(xmin, q.x());
    xmax = std::max(xmax, q.x());
    ymin = std::min(ymin, q.y());
    ymax = std::max(ymax, q.y());
  }
  for (int i = 0; i < grid.background; ++i)
    for (int j = 0; j < grid.background; ++j)
      sites.push_back(anchored(
          Point(xmin + (xmax - xmin) * (i + 0.5) / grid.background, ymin + (ymax - ymin) * (j + 0.5) / grid.background)));
  for (const auto& q : bd.x) sites.push_back(anchored(q));

  ResidualReport rep;
  rep.sigma = sigma;
  rep.region_max = {0.0, 0.0, 0.0};
  for (const auto& st : sites) {
    const Point& c = xi[st.anchor];
    Point x = c + eps * st.z;
    if (g.signed_distance(x) > 1e-12 * g.diameter()) continue;
    std::vector<double> r(m);
    int nearest = 0;
    double best = INFINITY;
    for (size_t i = 0; i < m; ++i) {
      r[i] = static_cast<int>(i) == st.anchor ? st.z.norm() : ((c - xi[i]) / eps + st.z).norm();
      if (r[i] / an.mu()[i] < best) {
        best = r[i] / an.mu()[i];
        nearest = static_cast<int>(i);
      }
    }
    double dist = r[nearest];
    int region = best <= std::pow(leps, kTau) ? 0 : (dist <= an.d() / std::pow(eps, kTheta) ? 1 : 2);
    double E = an.residual(st);
    double w = an.weight(st, sigma);
    Point y = c / eps + st.z;
    if (!std::isfinite(E) || !std::isfinite(w)) {
      std::ostringstream os;
      os << "non-finite residual at y = (" << y.x() << ", " << y.y() << "), region " << region;
      throw std::runtime_error(os.str());
    }
    double val = std::abs(w * E);
    rep.region_max[region] = std::max(rep.region_max[region], val);
    if (val > rep.norm) {
      rep.norm = val;
      rep.argmax = y;
      rep.argmax_region = region;
      rep.argmax_distance = best;
    }
    if (region == 1) {
      double s = 0.0;
      for (size_t i = 0; i < m; ++i) s += std::exp(omega_mu(an.mu()[i], r[i]));
      rep.potential_ratio = std::max(rep.potential_ratio, std::abs(an.potential(st)) / s);
    }
    ++rep.points;
    if (keep_samples) rep.samples.push_back({st, y, E, w, region, nearest});
  }
  return rep;
}

}  // namespace bubbling
