#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace bubbling {

// omega_mu(r) = log(8 mu^2 / (mu^2 + r^2)^2), the standard Liouville bubble.
double omega_mu(double mu, double r);
double omega_mu_dr(double mu, double r);

enum class Theta0Route { quadrature, dilog };

// Explicit radial solutions in the rescaled variable y = z / mu.
double omega0_inf(double y, Theta0Route route = Theta0Route::dilog);
double omega1_inf(double y);
// First correction layer in rescaled variables:
// -omega0_inf - (1 - 2 log mu) omega1_inf - 4 (log^2 mu - log mu)/(y^2 + 1).
double omega1_tilde(double mu, double y, Theta0Route route = Theta0Route::dilog);
double omega1_tilde_dy(double mu, double y);

double d1_closed(double mu);
double d2_closed(double mu, double p);

struct RadialGridOptions {
  int nodes = 8000;
  double t_max = 1e16;
  int gl_points = 8;
};

// Radial solution of  w'' + w'/t + 8/(1+t^2)^2 (w - f) = 0  on [0, inf),
// normalised so that w - (D/2) log(1+t^2) -> 0 at infinity.  The particular
// solution that vanishes at the origin is w_raw = w + offset * Z0.
class RadialSolution {
 public:
  double value(double t) const;
  double derivative(double t) const;
  double raw_value(double t) const;
  double source(double t) const { return f_(t); }

  double slope_D = 0.0;      // lim t w'(t), read at the end of the grid
  double moment_D = 0.0;     // int_0^inf psi0 f by adaptive quadrature
  double offset = 0.0;       // far-field constant of the raw solution
  double phi_one = 0.0;      // phi_f(1) = 8 I(1)
  double phi_one_limit = 0.0;  // Richardson limit of phi_f(1 +- 2^-k)
  double growth_check = 0.0;   // max |f(t)| / (1 + log^k) sample ratio

  const std::vector<double>& nodes() const { return t_; }
  const std::vector<double>& values() const { return w_; }

 private:
  friend RadialSolution solve_radial(const std::function<double(double)>& f, const RadialGridOptions& opt);
  std::function<double(double)> f_;
  double h_ = 0.0;
  std::vector<double> t_, w_, dw_, d2w_;
  double tail_c_ = 0.0;
};

RadialSolution solve_radial(const std::function<double(double)>& f, const RadialGridOptions& opt = {});

// The correction layers omega^j_mu, j = 1..jmax, for one (p, mu).  Values are
// in the unscaled variable z; omega^j_mu(z) = w_j(|z|/mu).
class CorrectionProfiles {
 public:
  CorrectionProfiles(double p, double mu, int jmax = 3, const RadialGridOptions& opt = {});

  double p() const { return p_; }
  double mu() const { return mu_; }
  int jmax() const { return jmax_; }

  double omega(int j, double r) const;
  double omega_dr(int j, double r) const;
  double source(int j, double r) const;
  double D(int j) const { return D_[j]; }
  double D_slope(int j) const { return Dslope_[j]; }
  const RadialSolution* solution(int j) const { return sol_[j].get(); }

  // Rescaled helpers (t = r / mu).
  double w(int j, double t) const;
  double f(int j, double t) const;

 private:
  double p_, mu_;
  int jmax_;
  std::array<double, 4> D_{}, Dslope_{};
  std::array<std::shared_ptr<RadialSolution>, 4> sol_;
};

// Source terms in rescaled variables assembled from the bracket groupings
// A_k, B_k; w1, w2 are the lower layers at the same point.
double source_f1(double om);
double source_f2(double p, double om, double w1);
double source_f3(double p, double om, double w1, double w2);
// Direct transcription of the expanded source formulas.
double source_f2_direct(double p, double om, double w1);
double source_f3_direct(double p, double om, double w1, double w2);

// D^j(mu) for fixed p.  D1, D2 closed form; D3 is a degree-6 polynomial in
// log mu (the layers are polynomial in log mu), fitted on seven nodes.
class DConstants {
 public:
  explicit DConstants(double p, const RadialGridOptions& opt = {});
  double operator()(int j, double mu) const;
  double p() const { return p_; }

 private:
  double p_;
  std::vector<double> l_nodes_, d3_nodes_;
};

}  // namespace bubbling
