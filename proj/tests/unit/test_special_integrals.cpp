#include <doctest.h>

#include <cmath>

#include "bubbling/special_integrals.hpp"

using namespace bubbling;

TEST_CASE("kernel functions at simple points") {
  CHECK(psi0(1.0) == doctest::Approx(0.0));
  CHECK(psi0(2.0) == doctest::Approx(8.0 * 2.0 * 3.0 / 125.0));
  CHECK(eta0(1.0) == doctest::Approx(std::log(2.0)));
  CHECK(zeta0(3.0) == doctest::Approx(0.1));
  CHECK(upsilon_inf(0.0) == doctest::Approx(std::log(8.0)));
}

TEST_CASE("theta0 endpoint values") {
  // int_0^inf log(1+s)/(s(1+s)) ds = pi^2/6
  CHECK(std::abs(theta0(0.0) - M_PI * M_PI / 6) < 1e-12);
  double one = M_PI * M_PI / 12 + 0.5 * std::log(2.0) * std::log(2.0);
  CHECK(std::abs(theta0(1.0) - one) < 1e-12);
  CHECK(std::abs(theta0_dilog(1.0) - one) < 1e-14);
}

TEST_CASE("theta0 routes agree and derivative matches integrand") {
  for (double t : {0.01, 0.3, 0.9, 1.0, 1.7, 10.0, 300.0, 1e5}) {
    CHECK(std::abs(theta0(t) - theta0_dilog(t)) < 1e-13 * std::max(1.0, theta0_dilog(t)));
  }
  for (double t : {0.5, 2.0, 7.0}) {
    double h = 1e-5;
    double fd = (theta0_dilog(t + h) - theta0_dilog(t - h)) / (2 * h);
    double x = t * t;
    CHECK(fd == doctest::Approx(-2 * t * std::log1p(x) / (x * (1 + x))).epsilon(1e-8));
  }
}

TEST_CASE("theta0 is positive and decreasing") {
  double prev = theta0_dilog(0.0);
  for (double t = 0.1; t < 50; t *= 1.5) {
    double v = theta0_dilog(t);
    CHECK(v > 0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("moment integrators") {
  CHECK(std::abs(psi0_moment([](double) { return 1.0; }).value) < 1e-13);
  CHECK(bubble_moment([](double) { return 1.0; }).value == doctest::Approx(8 * M_PI).epsilon(1e-13));
  // 2 pi int 16 t/(1+t^2)^3 dt = 32 pi / 4
  CHECK(bubble_moment([](double t) { return 2.0 / (1 + t * t); }).value ==
        doctest::Approx(8.0 * M_PI).epsilon(1e-13));
}

TEST_CASE("zeta by direct summation") {
  CHECK(std::abs(zeta_series(2) - M_PI * M_PI / 6) < 1e-13);
  CHECK(std::abs(zeta_series(4) - std::pow(M_PI, 4) / 90) < 1e-14);
}

TEST_CASE("glob matching") {
  CHECK(glob_match("*", "anything"));
  CHECK(glob_match("psi0:*", "psi0:w^2"));
  CHECK_FALSE(glob_match("psi0:*", "bubble:w"));
  CHECK(glob_match("b?bble*", "bubble:w"));
}

TEST_CASE("identity catalog passes") {
  auto recs = verify_catalog();
  CHECK(recs.size() >= 100);
  int fails = 0;
  for (const auto& r : recs) {
    if (!r.pass) {
      ++fails;
      MESSAGE(r.name << " closed " << r.closed << " quad " << r.quadrature);
    }
    CHECK(r.abs_err <= 1e-7 * std::max(1.0, std::abs(r.closed)));
  }
  CHECK(fails == 0);
  auto sub = verify_catalog({"psi0:*", 1e-8, 1e-13});
  CHECK(!sub.empty());
  for (const auto& r : sub) CHECK(glob_match("psi0:*", r.name));
}

TEST_CASE("zeta constants recovered from theta0 moments") {
  auto a = apery_backout();
  CHECK(std::abs(a.zeta3 - zeta_series(3)) < 1e-9);
  CHECK(std::abs(a.zeta4 - zeta_series(4)) < 1e-9);
}
