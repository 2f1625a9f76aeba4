#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "bubbling/greens.hpp"
#include "bubbling/kirchhoff_routh.hpp"
#include "bubbling/radial_profiles.hpp"

namespace bubbling {

struct Scales {
  double p = 1.0;
  double lambda = 0.0;
  double gamma = 0.0;
  double eps = 0.0;
  double s() const;  // gamma^p
  // residuals of p lambda gamma^{2(p-1)} eps^2 e^{gamma^p} = 1 and p gamma^p = -4 log eps
  double relation_residual() const;
  double log_relation_residual() const;
};

// Solves for gamma, eps given p and lambda; throws std::domain_error when no root.
Scales resolve_scales(double p, double lambda);

// ((p-1)/p)^j gamma^{-jp}, j = 1..3
std::array<double, 4> layer_weights(const Scales& sc);

// A quarter of the smallest pairwise / boundary distance.
double separation_scale(const GreenBackend& g, const Config& xi);
// min(separation_scale, 0.01); mu must lie in [d, 1/d].
double default_d(const GreenBackend& g, const Config& xi);

struct MuSolution {
  std::vector<double> mu;
  double residual = 0.0;
  int iterations = 0;
};

// Solves the concentration-parameter system for mu.
MuSolution solve_mu(const GreenBackend& g, const Config& xi, const Signs& a, const Scales& sc,
                    const DConstants* D = nullptr, double tol = 1e-12);
// Residual of that system at a given mu.
std::vector<double> mu_system_residual(const GreenBackend& g, const Config& xi, const Signs& a, const Scales& sc,
                                       const std::vector<double>& mu, const DConstants* D = nullptr);
// log(8 mu_i^2) in the eps -> 0 limit.
std::vector<double> mu_limit_log8mu2(const GreenBackend& g, const Config& xi, const Signs& a, double p);

// f(v) with the exponent evaluated through log1p / expm1.
double nonlinearity(double v, const Scales& sc);
double nonlinearity_prime(double v, const Scales& sc);

struct AnsatzOptions {
  bool exact_projection = false;  // harmonic extension of -U_i instead of the expansion
  RadialGridOptions radial;
};

// A point of Omega_eps: y = xi_anchor / eps + z, or y = z when anchor < 0.
// Anchoring keeps offsets from a bubble centre exact when |xi| / eps is huge.
struct Site {
  int anchor = -1;
  Point z{0, 0};
};

class Ansatz {
 public:
  Ansatz(std::shared_ptr<const GreenBackend> g, Config xi, Signs a, Scales sc, std::vector<double> mu,
         const AnsatzOptions& opt = {});

  const GreenBackend& backend() const { return *g_; }
  std::shared_ptr<const GreenBackend> backend_ptr() const { return g_; }
  const Config& points() const { return xi_; }
  const Signs& signs() const { return a_; }
  const Scales& scales() const { return sc_; }
  const std::vector<double>& mu() const { return mu_; }
  double d() const { return d_; }
  bool exact_projection() const { return opt_.exact_projection; }
  int layers() const { return layers_; }
  double D(int i, int j) const { return D_[i][j]; }
  const CorrectionProfiles* profiles(int i) const { return prof_[i].get(); }

  // p gamma^{p-1} H_i(x)
  double projection(int i, const Point& x) const;
  // pure bubble part p gamma^{p-1} U_i(x) - p gamma^p, in y = (x - xi_i)/eps
  double bubble(int i, double r) const;

  double U(const Point& x) const;
  // rescaled quantities at y in Omega_eps
  double V(const Site& s) const;
  double minus_laplacian_V(const Site& s) const;
  double residual(const Site& s) const;
  double weight(const Site& s, double sigma) const;
  double potential(const Site& s) const;  // f'(V)
  double V(const Point& y) const { return V(Site{-1, y}); }
  double minus_laplacian_V(const Point& y) const { return minus_laplacian_V(Site{-1, y}); }
  double residual(const Point& y) const { return residual(Site{-1, y}); }
  double weight(const Point& y, double sigma) const { return weight(Site{-1, y}, sigma); }
  double potential(const Point& y) const { return potential(Site{-1, y}); }
  // far-field expansion of U (valid at distance >= d from every point)
  double far_field(const Point& x) const;
  // Z_ij(y) = Z_j((y - xi'_i)/mu_i)
  double kernel(int i, int j, const Site& s) const;
  double kernel(int i, int j, const Point& y) const { return kernel(i, j, Site{-1, y}); }

 private:
  // x = eps y and the distances |y - xi'_k|
  Point locate(const Site& s, std::vector<double>& r) const;
  std::shared_ptr<const GreenBackend> g_;
  Config xi_;
  Signs a_;
  Scales sc_;
  std::vector<double> mu_;
  AnsatzOptions opt_;
  double d_ = 0.0;
  int layers_ = 0;
  std::array<double, 4> c_{};
  std::vector<std::array<double, 4>> D_;
  std::vector<std::shared_ptr<CorrectionProfiles>> prof_;
  std::vector<std::shared_ptr<HarmonicField>> exact_;
  std::vector<std::shared_ptr<HarmonicField>> Hfield_;
};

// resolve scales, solve mu, build profiles
Ansatz build_ansatz(std::shared_ptr<const GreenBackend> g, const Config& xi, const Signs& a, double p, double lambda,
                    const AnsatzOptions& opt = {});

double default_sigma(double p);

struct ResidualGrid {
  int radial = 240;      // geometric radii per bubble
  int angular = 48;
  int background = 64;   // background mesh per side
  double inner_factor = 1e-3;  // innermost radius / mu_i
};

struct ResidualSample {
  Site site;
  Point y;
  double E = 0.0;
  double weight = 0.0;
  int region = 0;  // 0 inner ball, 1 annulus, 2 far field
  int bubble = -1;
};

struct ResidualReport {
  double sigma = 0.0;
  double norm = 0.0;  // max |weight E| over the grid (a lower bound of the sup)
  std::array<double, 3> region_max{};
  Point argmax{0, 0};
  int argmax_region = -1;
  double argmax_distance = 0.0;  // |y - xi'_i| / mu_i at the maximiser
  std::size_t points = 0;
  double potential_ratio = 0.0;  // max |f'(V)| / sum e^{omega} on the annuli
  std::vector<ResidualSample> samples;
};

ResidualReport residual_norm(const Ansatz& an, double sigma, const ResidualGrid& grid = {}, bool keep_samples = false);

}  // namespace bubbling
