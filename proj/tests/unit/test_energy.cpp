#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "bubbling/energy.hpp"

using namespace bubbling;

namespace {
std::shared_ptr<GreenBackend> disk() { return std::make_shared<GreenBackend>(DomainSpec::disk(1.0)); }
const double kPairT = std::sqrt(std::sqrt(5.0) - 2.0);
}  // namespace

TEST_CASE("energy moments against closed forms") {
  for (double mu : {0.5, 1.0, 2.0})
    for (double p : {0.5, 1.5, 2.0}) {
      EnergyMoments M = energy_moments(p, mu);
      CAPTURE(mu);
      CAPTURE(p);
      for (const MomentPair* m : {&M.B1, &M.pA1_B1, &M.A1B1_B1, &M.A2_A1B1, &M.B2_B1sq})
        CHECK(std::abs(m->quadrature - m->closed) <= 1e-7 * std::max(1.0, std::abs(m->closed)));
      CHECK(std::abs(M.vanishing_combo) < 1e-7);
      CHECK(M.four_combo == doctest::Approx(4.0).epsilon(1e-7));
    }
  EnergyMoments one = energy_moments(1.0, 1.0);
  CHECK(one.B1.closed == doctest::Approx(16 * M_PI * (2 - std::log(8.0))));
  CHECK(one.B1.quadrature == doctest::Approx(-3.992).epsilon(1e-3));
  CHECK(std::abs(one.vanishing_combo) < 1e-7);
  CHECK(std::isnan(one.four_combo));
}

TEST_CASE("domain quadrature oracles") {
  auto g = disk();
  auto an = build_ansatz(g, {Point(0, 0)}, {1}, 1.5, 1e-4);
  double eps = an.scales().eps, mu = an.mu()[0];
  auto v = integrate_rescaled(an, 2, [&](const Site& s, double* out) {
    double r = s.z.norm();
    out[0] = std::exp(omega_mu(mu, r));
    out[1] = 1.0;
  });
  CHECK(v[0] == doctest::Approx(8 * M_PI / (1 + mu * mu * eps * eps)).epsilon(1e-11));
  CHECK(v[1] == doctest::Approx(M_PI / (eps * eps)).epsilon(1e-11));

  auto ge = std::make_shared<GreenBackend>(DomainSpec::ellipse(1.2, 0.8, 256));
  auto ae = build_ansatz(ge, {Point(-0.4, 0.1), Point(0.35, -0.1)}, {1, -1}, 1.0, 1e-4);
  double ee = ae.scales().eps;
  auto area = integrate_rescaled(ae, 1, [](const Site&, double* out) { out[0] = 1.0; });
  CHECK(area[0] * ee * ee == doctest::Approx(M_PI * 1.2 * 0.8).epsilon(1e-9));
}

TEST_CASE("quadrature rejects domains that are not star-shaped about a point") {
  std::vector<Point> pts(256);
  for (int j = 0; j < 256; ++j) {
    double t = 2 * M_PI * j / 256, r = 1 + 0.6 * std::cos(3 * t);
    pts[j] = r * Point(std::cos(t), std::sin(t));
  }
  auto g = std::make_shared<GreenBackend>(DomainSpec::from_nodes(pts, "trefoil"));
  auto an = build_ansatz(g, {Point(1.2, 0)}, {1}, 1.0, 1e-6);
  CHECK_THROWS_AS(j_lambda(an), DomainError);
}

TEST_CASE("energy at p = 1 follows the reduced expansion") {
  auto g = disk();
  auto an = build_ansatz(g, {Point(0, 0)}, {1}, 1.0, 1e-8);
  EnergyReport r = j_lambda(an);
  CHECK(r.phi == doctest::Approx(0.0).scale(1.0));
  CHECK(std::abs(r.discrepancy) <= r.closed_scaled / r.log_eps);
  CHECK(r.J == doctest::Approx(r.scaled));
}

TEST_CASE("sign flip leaves J and beta unchanged") {
  auto g = disk();
  Config pair{Point(-kPairT, 0), Point(kPairT, 0)};
  auto a = build_ansatz(g, pair, {1, -1}, 1.5, 1e-6);
  auto b = build_ansatz(g, pair, {-1, 1}, 1.5, 1e-6);
  CHECK(j_lambda(a).J == doctest::Approx(j_lambda(b).J).epsilon(1e-12));
  CHECK(beta_lambda(a).direct == doctest::Approx(beta_lambda(b).direct).epsilon(1e-12));
}

TEST_CASE("energy remainder stays bounded") {
  auto g = disk();
  std::vector<double> R;
  for (double lam : {1e-6, 1e-8, 1e-10}) {
    EnergyReport r = j_lambda(build_ansatz(g, {Point(0, 0)}, {1}, 1.5, lam));
    R.push_back(std::abs(r.discrepancy) * r.log_eps);
  }
  CHECK(*std::max_element(R.begin(), R.end()) <= 4 * R[0]);
  CHECK(*std::max_element(R.begin(), R.end()) <= 4 * *std::min_element(R.begin(), R.end()));
}

TEST_CASE("beta approaches 4 pi m from the side of p - 1") {
  auto g = disk();
  for (double lam : {1e-6, 1e-8, 1e-10}) {
    BetaReport lo = beta_lambda(build_ansatz(g, {Point(0, 0)}, {1}, 0.5, lam));
    BetaReport hi = beta_lambda(build_ansatz(g, {Point(0, 0)}, {1}, 1.5, lam));
    CHECK(lo.direct < 4 * M_PI);
    CHECK(hi.direct > 4 * M_PI);
    CHECK(lo.formula < 4 * M_PI);
    CHECK(hi.formula > 4 * M_PI);
    // single bubble: the expansion collapses to 4 pi (1 + 4(p-1)/(p^2 gamma^{2p}))
    for (const BetaReport* b : {&lo, &hi})
      CHECK(b->formula ==
            doctest::Approx(4 * M_PI * (1 + 4 * (b->p - 1) / (b->p * b->p * std::pow(b->gamma, 2 * b->p)))).epsilon(1e-10));
  }
  BetaReport one = beta_lambda(build_ansatz(g, {Point(0, 0)}, {1}, 1.0, 1e-8));
  CHECK(one.formula == 4 * M_PI);
  CHECK(one.direct == doctest::Approx(4 * M_PI).epsilon(1e-7));

  BetaReport b = beta_lambda(build_ansatz(g, {Point(0, 0)}, {1}, 1.5, 1e-10));
  CHECK(std::abs(b.direct - b.formula) <= 0.05 * std::abs(b.formula_deviation));
  CHECK(b.scaled_deviation == doctest::Approx(b.predicted).epsilon(0.2));
}
