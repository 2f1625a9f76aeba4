#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "bubbling/greens.hpp"

using namespace bubbling;

namespace {
double disk_robin(const Point& y, double R = 1.0, const Point& c = Point(0, 0)) {
  return std::log((R * R - (y - c).squaredNorm()) / R) / (2 * M_PI);
}

Point random_in_disk(std::mt19937& rng, double r) {
  std::uniform_real_distribution<double> u(-1, 1);
  while (true) {
    Point p(u(rng), u(rng));
    if (p.norm() < 1) return r * p;
  }
}

DomainSpec shifted_circle(double R, Point c, int n) {
  std::vector<Point> pts(n);
  for (int j = 0; j < n; ++j) {
    double t = 2 * M_PI * j / n;
    pts[j] = c + R * Point(std::cos(t), std::sin(t));
  }
  return DomainSpec::from_nodes(pts, "shifted");
}
}  // namespace

TEST_CASE("disk closed-form values") {
  GreenBackend g(DomainSpec::disk());
  CHECK(g.analytic());
  CHECK(g.green(Point(0.5, 0), Point(0, 0)) == doctest::Approx(std::log(2.0) / (2 * M_PI)).epsilon(1e-14));
  CHECK(std::abs(g.regular_part(Point(0.3, -0.6), Point(0, 0))) < 1e-15);
  CHECK(std::abs(g.regular_part(Point(0.5, 0), Point(0.5, 0)) - std::log(0.75) / (2 * M_PI)) < 1e-15);
  CHECK(std::abs(g.robin(Point(0, 0))) < 1e-15);
  CHECK(std::abs(g.robin(Point(0.9, 0)) - std::log(0.19) / (2 * M_PI)) < 1e-15);
  CHECK(g.robin(Point(0.99, 0)) < g.robin(Point(0.9, 0)));
  Point gr = g.grad_robin(Point(0.5, 0));
  CHECK(gr.x() == doctest::Approx(-0.212207).epsilon(1e-5));
  CHECK(std::abs(gr.y()) < 1e-15);
  CHECK(g.grad_robin(Point(0, 0)).norm() < 1e-15);
}

TEST_CASE("disk symmetry and boundary vanishing") {
  GreenBackend g(DomainSpec::disk());
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    Point x = random_in_disk(rng, 0.98), y = random_in_disk(rng, 0.98);
    if ((x - y).norm() < 0.05) continue;
    CHECK(std::abs(g.green(x, y) - g.green(y, x)) <= 1e-8);
  }
  for (double t = 0.1; t < 6.2; t += 0.7) {
    Point xb = (1 - 1e-10) * Point(std::cos(t), std::sin(t));
    CHECK(std::abs(g.green(xb, Point(0.2, -0.4))) <= 1e-6);
  }
}

TEST_CASE("disk gradients match finite differences") {
  GreenBackend g(DomainSpec::disk(1.7));
  Point x(0.4, -0.3), y(-0.2, 0.9);
  double h = 1e-6;
  Point fd((g.green(x + Point(h, 0), y) - g.green(x - Point(h, 0), y)) / (2 * h),
           (g.green(x + Point(0, h), y) - g.green(x - Point(0, h), y)) / (2 * h));
  CHECK((g.grad_green(x, y) - fd).norm() < 1e-8);
  Point fr((g.robin(y + Point(h, 0)) - g.robin(y - Point(h, 0))) / (2 * h),
           (g.robin(y + Point(0, h)) - g.robin(y - Point(0, h))) / (2 * h));
  CHECK((g.grad_robin(y) - fr).norm() < 1e-8);
}

TEST_CASE("Nystrom circle reproduces the disk Robin function") {
  auto t0 = std::chrono::steady_clock::now();
  GreenBackend ny(DomainSpec::circle_nodes(1.0, 256));
  CHECK_FALSE(ny.analytic());
  std::mt19937 rng(11);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    Point y = random_in_disk(rng, 0.8);
    worst = std::max(worst, std::abs(ny.robin(y) - disk_robin(y)));
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(worst < 1e-6);
  CHECK(secs < 5.0);
}

TEST_CASE("shifted circle matches translated closed form") {
  Point c(0.3, -0.1);
  GreenBackend g(shifted_circle(2.0, c, 256));
  for (Point y : {Point(0.3, -0.1), Point(1.2, 0.5), Point(-1.0, -0.9)}) {
    CHECK(std::abs(g.robin(y) - disk_robin(y, 2.0, c)) < 1e-8);
    Point gr = g.grad_robin(y);
    Point exact = -(y - c) / (M_PI * (4.0 - (y - c).squaredNorm()));
    CHECK((gr - exact).norm() < 1e-6);
  }
}

TEST_CASE("ellipse backend properties") {
  double a = 1.5, b = 0.8;
  GreenBackend g(DomainSpec::ellipse(a, b, 256));
  std::mt19937 rng(5);
  auto sample = [&]() {
    Point p = random_in_disk(rng, 0.95);
    return Point(a * p.x(), b * p.y());
  };
  for (int i = 0; i < 40; ++i) {
    Point x = sample(), y = sample();
    if ((x - y).norm() < 0.05) continue;
    CHECK(std::abs(g.green(x, y) - g.green(y, x)) <= 1e-6);
  }
  // off-node boundary points, slightly inside
  int n = 256;
  for (int j = 0; j < n; j += 37) {
    double t = 2 * M_PI * (j + 0.5) / n;
    Point xb(a * std::cos(t), b * std::sin(t));
    xb -= 1e-11 * xb.normalized();
    CHECK(std::abs(g.green(xb, Point(0.4, 0.2))) <= 1e-6);
  }
  // gradient of the Robin function against central differences
  for (Point y : {Point(0.3, 0.2), Point(-0.9, -0.1), Point(0.0, 0.5)}) {
    double h = g.gradient_step();
    Point fd((g.robin(y + Point(h, 0)) - g.robin(y - Point(h, 0))) / (2 * h),
             (g.robin(y + Point(0, h)) - g.robin(y - Point(0, h))) / (2 * h));
    CHECK((g.grad_robin(y) - fd).norm() < 1e-6);
  }
  // removable singularity of H along a shrinking segment
  Point y(0.2, -0.3), d = Point(1, 2).normalized();
  double prev = g.regular_part(y + 1e-2 * d, y), step = INFINITY;
  for (double s = 1e-3; s > 1e-8; s /= 10) {
    double v = g.regular_part(y + s * d, y);
    CHECK(std::abs(v - prev) < 10 * s);
    step = std::abs(v - prev);
    prev = v;
  }
  CHECK(step < 1e-6);
  CHECK(std::abs(prev - g.robin(y)) < 1e-6);
}

TEST_CASE("harmonic extensions") {
  GreenBackend g(DomainSpec::ellipse(1.2, 0.9, 256));
  auto one = g.harmonic_extension([](const Point&) { return 1.0; });
  auto xy = g.harmonic_extension([](const Point& p) { return p.x() * p.y() + p.x(); });
  auto gauss = g.harmonic_extension([](const Point& p) { return std::exp(p.x()) * std::cos(p.y()); });
  for (Point x : {Point(0, 0), Point(0.5, 0.3), Point(-1.1, 0.05), Point(0.2, -0.85)}) {
    CHECK(std::abs(one(x) - 1.0) < 1e-10);
    CHECK(std::abs(xy(x) - (x.x() * x.y() + x.x())) < 1e-9);
    CHECK(std::abs(gauss(x) - std::exp(x.x()) * std::cos(x.y())) < 1e-9);
  }
  GreenBackend disk(DomainSpec::disk());
  auto re = disk.harmonic_extension([](const Point& p) { return p.x(); });
  for (Point x : {Point(0.1, 0.2), Point(-0.6, 0.6)}) {
    CHECK(std::abs(re(x) - x.x()) < 1e-10);
    double h = 1e-3;
    double lap = re(x + Point(h, 0)) + re(x - Point(h, 0)) + re(x + Point(0, h)) + re(x - Point(0, h)) - 4 * re(x);
    CHECK(std::abs(lap / (h * h)) < 1e-5);
  }
}

TEST_CASE("boundary flux of G is -1") {
  for (auto spec : {DomainSpec::disk(), DomainSpec::ellipse(1.4, 0.7, 256)}) {
    GreenBackend g(spec);
    const auto& bd = g.boundary();
    for (Point y : {Point(0, 0), Point(0.3, 0.2)}) {
      double flux = 0;
      for (int k = 0; k < bd.n; ++k) flux += g.normal_derivative_green(k, y) * bd.weight[k];
      CHECK(flux == doctest::Approx(-1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("domain validation and errors") {
  GreenBackend g(DomainSpec::disk());
  CHECK_THROWS_AS(g.green(Point(1.5, 0), Point(0, 0)), DomainError);
  CHECK_THROWS_AS(g.green(Point(0.2, 0), Point(0.2, 0)), DomainError);
  CHECK_THROWS_AS(g.robin(Point(0.9995, 0)), DomainError);
  CHECK_THROWS_AS(DomainSpec::disk(-1.0), DomainError);
  CHECK_THROWS_AS(GreenBackend(DomainSpec::ellipse(1, 1, 62)), DomainError);
  CHECK_THROWS_AS(GreenBackend(DomainSpec::ellipse(1, 1, 65)), DomainError);
  std::vector<Point> eight(128);
  for (int j = 0; j < 128; ++j) {
    double t = 2 * M_PI * j / 128;
    eight[j] = Point(std::sin(t), std::sin(2 * t));
  }
  CHECK_THROWS_AS(GreenBackend(DomainSpec::from_nodes(eight)), DomainError);

  GreenBackend el(DomainSpec::ellipse(2, 1, 128));
  CHECK(el.contains(Point(1.9, 0)));
  CHECK_FALSE(el.contains(Point(2.01, 0)));
  CHECK_FALSE(el.contains(Point(0, 1.001)));
  CHECK(el.boundary_distance(Point(0, 0.5)) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("clockwise input is reoriented") {
  auto spec = DomainSpec::ellipse(1.3, 0.6, 128);
  std::vector<Point> rev(spec.nodes.rbegin(), spec.nodes.rend());
  GreenBackend a(spec), b(DomainSpec::from_nodes(rev));
  Point y(0.2, 0.1);
  CHECK(std::abs(a.robin(y) - b.robin(y)) < 1e-12);
}

TEST_CASE("domain JSON round trip") {
  auto d = DomainSpec::from_json_text(R"({"kind":"unit_disk","radius":2.5})");
  CHECK(d.kind == DomainSpec::Kind::unit_disk);
  CHECK(d.radius == 2.5);
  auto e = DomainSpec::ellipse(1.1, 0.7, 64);
  auto back = DomainSpec::from_json_text(e.to_json_text());
  REQUIRE(back.nodes.size() == 64);
  CHECK((back.nodes[5] - e.nodes[5]).norm() == 0.0);
  CHECK_THROWS_AS(DomainSpec::from_json_text(R"({"kind":"torus"})"), DomainError);
  CHECK_THROWS_AS(DomainSpec::from_json_text("not json"), DomainError);
}
