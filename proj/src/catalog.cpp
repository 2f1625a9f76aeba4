#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>

#include "bubbling/radial_profiles.hpp"
#include "bubbling/special_integrals.hpp"

namespace bubbling {

namespace {

const double kL = std::log(8.0);
const double kPi = M_PI;

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string tag(double mu) { return fmt("mu=%g", mu); }
std::string tag(double p, double mu) { return fmt("p=%g,", p) + tag(mu); }

struct Builder {
  const CatalogOptions& opt;
  std::vector<IdentityRecord> out;

  bool wanted(const std::string& name) const { return glob_match(opt.filter, name); }

  void add(const std::string& group, const std::string& name, const std::string& expr, double closed, QuadResult q,
           const std::string& note = "") {
    IdentityRecord r;
    r.group = group;
    r.name = name;
    r.closed_form = expr;
    r.closed = closed;
    r.quadrature = q.value;
    r.quad_error = q.error;
    r.abs_err = std::fabs(closed - q.value);
    r.rel_err = closed != 0.0 ? r.abs_err / std::fabs(closed) : r.abs_err;
    r.pass = r.abs_err <= std::max(opt.tol, opt.tol * std::fabs(closed));
    r.note = note;
    out.push_back(r);
  }
};

struct Layer {
  double mu, l, a;
  double om(double y) const { return a - 2.0 * std::log1p(y * y); }
  double w1(double y) const { return omega1_tilde(mu, y, Theta0Route::quadrature); }
  explicit Layer(double m) : mu(m), l(std::log(m)), a(kL - 2.0 * std::log(m)) {}
};

}  // namespace

std::vector<IdentityRecord> verify_catalog(const CatalogOptions& opt) {
  Builder b{opt, {}};
  const double qt = opt.quad_tol;
  const double z3 = zeta_series(3), z4 = zeta_series(4);

  // Kernel moments int_0^inf psi0 * product.
  struct K {
    const char* name;
    const char* expr;
    double value;
    std::function<double(double)> g;
  };
  auto th = [](double t) { return theta0(t); };
  const std::vector<K> kernels = {
      {"psi0", "0", 0.0, [](double) { return 1.0; }},
      {"psi0*eta0", "2", 2.0, [](double t) { return eta0(t); }},
      {"psi0*eta0^2", "6", 6.0, [](double t) { return std::pow(eta0(t), 2); }},
      {"psi0*eta0^3", "21", 21.0, [](double t) { return std::pow(eta0(t), 3); }},
      {"psi0*eta0^4", "90", 90.0, [](double t) { return std::pow(eta0(t), 4); }},
      {"psi0*zeta0", "-2/3", -2.0 / 3.0, [](double t) { return zeta0(t); }},
      {"psi0*zeta0*eta0", "1/9", 1.0 / 9.0, [](double t) { return zeta0(t) * eta0(t); }},
      {"psi0*zeta0*eta0^2", "11/27", 11.0 / 27.0, [](double t) { return zeta0(t) * std::pow(eta0(t), 2); }},
      {"psi0*zeta0*eta0^3", "49/54", 49.0 / 54.0, [](double t) { return zeta0(t) * std::pow(eta0(t), 3); }},
      {"psi0*zeta0*eta0^4", "179/81", 179.0 / 81.0, [](double t) { return zeta0(t) * std::pow(eta0(t), 4); }},
      {"psi0*zeta0^2", "-2/3", -2.0 / 3.0, [](double t) { return std::pow(zeta0(t), 2); }},
      {"psi0*zeta0^2*eta0", "-1/18", -1.0 / 18.0, [](double t) { return std::pow(zeta0(t), 2) * eta0(t); }},
      {"psi0*zeta0^2*eta0^2", "5/108", 5.0 / 108.0,
       [](double t) { return std::pow(zeta0(t), 2) * std::pow(eta0(t), 2); }},
      {"psi0*zeta0^2*eta0^3", "47/432", 47.0 / 432.0,
       [](double t) { return std::pow(zeta0(t), 2) * std::pow(eta0(t), 3); }},
      {"psi0*zeta0^2*eta0^4", "269/1296", 269.0 / 1296.0,
       [](double t) { return std::pow(zeta0(t), 2) * std::pow(eta0(t), 4); }},
      {"psi0*theta0", "-1", -1.0, th},
      {"psi0*zeta0*theta0", "-61/54", -61.0 / 54.0, [](double t) { return zeta0(t) * theta0(t); }},
      {"psi0*eta0*theta0", "1/2", 0.5, [](double t) { return eta0(t) * theta0(t); }},
      {"psi0*zeta0^2*theta0", "-223/216", -223.0 / 216.0, [](double t) { return std::pow(zeta0(t), 2) * theta0(t); }},
      {"psi0*eta0^2*theta0", "11 - 8 zeta(3)", 11.0 - 8.0 * z3,
       [](double t) { return std::pow(eta0(t), 2) * theta0(t); }},
      {"psi0*eta0*zeta0*theta0", "4/3 zeta(3) - 179/108", 4.0 / 3.0 * z3 - 179.0 / 108.0,
       [](double t) { return eta0(t) * zeta0(t) * theta0(t); }},
      {"psi0*eta0^2*zeta0*theta0", "4 zeta(4) - 4/9 zeta(3) - 589/162", 4.0 * z4 - 4.0 / 9.0 * z3 - 589.0 / 162.0,
       [](double t) { return std::pow(eta0(t), 2) * zeta0(t) * theta0(t); }},
      {"psi0*eta0^2*zeta0^2*theta0", "4 zeta(4) + 2/9 zeta(3) - 11893/2592",
       4.0 * z4 + 2.0 / 9.0 * z3 - 11893.0 / 2592.0,
       [](double t) { return std::pow(eta0(t), 2) * std::pow(zeta0(t), 2) * theta0(t); }},
      {"psi0*theta0^2", "8 zeta(3) - 23/2", 8.0 * z3 - 11.5, [](double t) { return std::pow(theta0(t), 2); }},
      {"psi0*zeta0*theta0^2", "68/9 zeta(3) - 3517/324", 68.0 / 9.0 * z3 - 3517.0 / 324.0,
       [](double t) { return zeta0(t) * std::pow(theta0(t), 2); }},
      {"psi0*zeta0^2*theta0^2", "62/9 zeta(3) - 51127/5184", 62.0 / 9.0 * z3 - 51127.0 / 5184.0,
       [](double t) { return std::pow(zeta0(t) * theta0(t), 2); }},
  };
  for (const auto& k : kernels)
    if (b.wanted(k.name)) b.add("kernel", k.name, k.expr, k.value, psi0_moment(k.g, qt));

  // Zeta integral representation int_0^inf log^{z-1}(s+1)/(s(s+1)) ds = Gamma(z) zeta(z).
  for (int z : {2, 3, 4}) {
    std::string name = "zeta_integral(" + std::to_string(z) + ")";
    if (!b.wanted(name)) continue;
    auto g = [z](double s) { return s == 0.0 ? 0.0 : std::pow(std::log1p(s), z - 1) / (s * (1.0 + s)); };
    if (z == 2) {
      auto g2 = [](double s) { return s == 0.0 ? 1.0 : std::log1p(s) / (s * (1.0 + s)); };
      QuadResult q = integrate_half_line(g2, qt, 1e16);
      b.add("zeta", name, "Gamma(2) zeta(2)", zeta_series(2), q);
    } else {
      QuadResult q = integrate_half_line(g, qt, 1e16);
      b.add("zeta", name, "Gamma(" + std::to_string(z) + ") zeta(" + std::to_string(z) + ")",
            std::tgamma(z) * zeta_series(z), q);
    }
  }
  if (b.wanted("theta0(0)")) {
    QuadResult q{theta0(0.0), 1e-14};
    b.add("zeta", "theta0(0)", "zeta(2)", zeta_series(2), q);
  }

  // Bubble-weighted radial moments, in the rescaled variable.
  if (b.wanted("bubble:half_ups2-w0inf")) {
    QuadResult q = bubble_moment(
        [](double y) {
          double u = upsilon_inf(y);
          return 0.5 * u * u - omega0_inf(y, Theta0Route::quadrature);
        },
        qt);
    q.value /= 8.0 * kPi;
    q.error /= 8.0 * kPi;
    b.add("bubble", "bubble:half_ups2-w0inf", "(1/8pi) int = 3 - log 8", 3.0 - kL, q);
  }

  const double mus[] = {0.5, 1.0, 2.0};
  const double ps[] = {0.5, 1.5, 2.0};
  const double ps_all[] = {0.5, 1.0, 1.5, 2.0};

  for (double mu : mus) {
    Layer s(mu);
    const double l = s.l;
    auto z0 = [](double y) { return (y * y - 1.0) / (y * y + 1.0); };
    std::string name = "bubble:Z0^2(1+w1+w^2/2+2w)," + tag(mu);
    if (b.wanted(name)) {
      QuadResult q = bubble_moment(
          [&](double y) {
            double o = s.om(y), z = z0(y);
            return z * z * (1.0 + s.w1(y) + 0.5 * o * o + 2.0 * o);
          },
          qt);
      b.add("bubble", name, "8 pi", 8.0 * kPi, q);
    }
    name = "bubble:w," + tag(mu);
    if (b.wanted(name))
      b.add("bubble", name, "8pi(L - 2l - 2)", 8.0 * kPi * (kL - 2.0 * l - 2.0),
            bubble_moment([&](double y) { return s.om(y); }, qt));
    name = "bubble:w^2," + tag(mu);
    if (b.wanted(name))
      b.add("bubble", name, "8pi(4l^2 - 4(L-2)l + L^2 - 4L + 8)",
            8.0 * kPi * (4.0 * l * l - 4.0 * (kL - 2.0) * l + kL * kL - 4.0 * kL + 8.0),
            bubble_moment([&](double y) { return std::pow(s.om(y), 2); }, qt));
    name = "bubble:w^3," + tag(mu);
    if (b.wanted(name))
      b.add("bubble", name, "8pi(-8l^3 + 12(L-2)l^2 - 6(L^2-4L+8)l + L^3 - 6L^2 + 24L - 48)",
            8.0 * kPi *
                (-8.0 * l * l * l + 12.0 * (kL - 2.0) * l * l - 6.0 * (kL * kL - 4.0 * kL + 8.0) * l + kL * kL * kL -
                 6.0 * kL * kL + 24.0 * kL - 48.0),
            bubble_moment([&](double y) { return std::pow(s.om(y), 3); }, qt),
            "constant term -48; the +48 variant disagrees with quadrature by 768 pi");
    const double m87 = 16.0 * kPi * (2.0 * l - kL + 2.0);
    QuadResult qB1 = bubble_moment(
        [&](double y) {
          double o = s.om(y);
          return s.w1(y) + 0.5 * o * o;
        },
        qt);
    name = "bubble:B1," + tag(mu);
    if (b.wanted(name)) b.add("bubble", name, "16pi(2l - L + 2)", m87, qB1);
    name = "bubble:w1," + tag(mu);
    if (b.wanted(name))
      b.add("bubble", name, "4pi(-4l^2 + 4Ll - L^2)", 4.0 * kPi * (-4.0 * l * l + 4.0 * kL * l - kL * kL),
            bubble_moment([&](double y) { return s.w1(y); }, qt));
    name = "bubble:w1*w," + tag(mu);
    if (b.wanted(name))
      b.add("bubble", name, "4pi(8l^3 + (4-12L)l^2 + (6L^2-4L+24)l - L^3 + L^2 - 12L + 32)",
            4.0 * kPi *
                (8.0 * l * l * l + (4.0 - 12.0 * kL) * l * l + (6.0 * kL * kL - 4.0 * kL + 24.0) * l -
                 kL * kL * kL + kL * kL - 12.0 * kL + 32.0),
            bubble_moment([&](double y) { return s.w1(y) * s.om(y); }, qt),
            "constant term +32; the -64 variant disagrees with quadrature by 384 pi");
    QuadResult q816 = bubble_moment(
        [&](double y) {
          double o = s.om(y), B1 = s.w1(y) + 0.5 * o * o;
          return o * B1 + B1;
        },
        qt);
    const double c816 = 2.0 * kPi * (-40.0 * l * l + (40.0 * kL - 32.0) * l - 10.0 * kL * kL + 16.0 * kL - 16.0);
    name = "bubble:A1B1+B1," + tag(mu);
    if (b.wanted(name)) b.add("bubble", name, "2pi(-40l^2 + (40L-32)l - 10L^2 + 16L - 16)", c816, q816);

    for (double p : ps) {
      const double q = 1.0 / (p - 1.0);
      name = "bubble:A2+A1B1," + tag(p, mu);
      if (b.wanted(name)) {
        QuadResult qq = bubble_moment(
            [&](double y) {
              double o = s.om(y), w1 = s.w1(y);
              return (w1 + (p - 2.0) / (2.0 * (p - 1.0)) * o * o) + o * (w1 + 0.5 * o * o);
            },
            qt);
        double c = 2.0 * kPi *
                   (-(8.0 * q + 40.0) * l * l + ((8.0 * q + 40.0) * kL - 16.0 * q - 32.0) * l -
                    (2.0 * q + 10.0) * kL * kL + (8.0 * q + 16.0) * kL - 16.0 * q - 16.0);
        b.add("bubble", name, "2pi(-(8q+40)l^2 + ((8q+40)L-16q-32)l - (2q+10)L^2 + (8q+16)L - 16q - 16), q=1/(p-1)",
              c, qq);
      }
    }
    for (double p : ps_all) {
      QuadResult q817 = bubble_moment(
          [&](double y) {
            double o = s.om(y);
            return p * o + (p - 1.0) * (s.w1(y) + 0.5 * o * o);
          },
          qt);
      name = "bubble:pA1+(p-1)B1," + tag(p, mu);
      if (b.wanted(name)) b.add("bubble", name, "8pi(p-2)(2l - L + 2)", 8.0 * kPi * (p - 2.0) * (2.0 * l - kL + 2.0), q817);
      name = "combo:B1-weighted-vanishing," + tag(p, mu);
      if (b.wanted(name)) {
        QuadResult c{(2.0 - p) / p * qB1.value + 2.0 / p * q817.value,
                     (2.0 - p) / p * qB1.error + 2.0 / p * q817.error};
        b.add("combo", name, "(2-p)/p int B1 + (2/p) int [pA1+(p-1)B1] = 0", 0.0, c);
      }
    }

    // psi0 against the layers.
    const double a = s.a;
    const double v4 = 8.0 / 3 * l * l - (8.0 / 3 * kL + 40.0 / 3) * l + 2.0 / 3 * kL * kL + 20.0 / 3 * kL - 20.0;
    const double v5 = -16.0 / 3 * l * l * l + (8.0 * kL + 248.0 / 9) * l * l +
                      (776.0 / 9 - 248.0 / 9 * kL - 4.0 * kL * kL) * l + 2.0 / 3 * std::pow(kL, 3) +
                      62.0 / 9 * kL * kL - 388.0 / 9 * kL - 64.0 / 3 * z3 + 84.0;
    const double v6 = 32.0 / 3 * std::pow(l, 4) - (64.0 / 3 * kL + 512.0 / 9) * std::pow(l, 3) +
                      (16.0 * kL * kL + 256.0 / 3 * kL - 7328.0 / 27) * l * l +
                      (-16.0 / 3 * std::pow(kL, 3) - 128.0 / 3 * kL * kL + 7328.0 / 27 * kL - 17792.0 / 27 +
                       256.0 / 3 * z3) *
                          l +
                      2.0 / 3 * std::pow(kL, 4) + 64.0 / 9 * std::pow(kL, 3) - 1832.0 / 27 * kL * kL +
                      (8896.0 / 27 - 128.0 / 3 * z3) * kL - 1952.0 / 3 + 1024.0 / 9 * z3 + 128.0 * z4;
    const double v7 = -32.0 / 3 * std::pow(l, 4) + (64.0 / 3 * kL + 416.0 / 9) * std::pow(l, 3) +
                      (-16.0 * kL * kL - 208.0 / 3 * kL + 3344.0 / 27) * l * l +
                      (16.0 / 3 * std::pow(kL, 3) + 104.0 / 3 * kL * kL - 3344.0 / 27 * kL - 256.0 / 3 * z3 +
                       4880.0 / 27) *
                          l -
                      2.0 / 3 * std::pow(kL, 4) - 52.0 / 9 * std::pow(kL, 3) + 836.0 / 27 * kL * kL +
                      (128.0 / 3 * z3 - 2440.0 / 27) * kL - 128.0 * z4 - 256.0 / 9 * z3 + 584.0 / 3;
    struct P0 {
      std::string name, expr;
      double v;
      std::function<double(double)> g;
    };
    const std::vector<P0> p0s = {
        {"psi0:w^2", "-8a + 24, a = L - 2l", -8.0 * a + 24.0, [&](double y) { return std::pow(s.om(y), 2); }},
        {"psi0:w^3", "-12a^2 + 72a - 168", -12.0 * a * a + 72.0 * a - 168.0,
         [&](double y) { return std::pow(s.om(y), 3); }},
        {"psi0:w^4", "-16a^3 + 144a^2 - 672a + 1440", -16.0 * a * a * a + 144.0 * a * a - 672.0 * a + 1440.0,
         [&](double y) { return std::pow(s.om(y), 4); }},
        {"psi0:w1", "quadratic in l", v4, [&](double y) { return s.w1(y); }},
        {"psi0:w1*w", "cubic in l with zeta(3)", v5, [&](double y) { return s.w1(y) * s.om(y); }},
        {"psi0:w1*w^2", "quartic in l with zeta(3), zeta(4)", v6,
         [&](double y) { return s.w1(y) * std::pow(s.om(y), 2); }},
        {"psi0:w1^2", "quartic in l with zeta(3), zeta(4)", v7, [&](double y) { return std::pow(s.w1(y), 2); }},
    };
    for (const auto& e : p0s) {
      std::string nm = e.name + "," + tag(mu);
      if (b.wanted(nm)) b.add("psi0_layer", nm, e.expr, e.v, psi0_moment(e.g, qt));
    }

    for (double p : ps) {
      const double q = 1.0 / (p - 1.0);
      std::string nd = "dconst:D2," + tag(p, mu);
      if (b.wanted(nd))
        b.add("dconst", nd, "-(8q+24)l^2 + ((8q+24)L - 16q)l - (2q+6)L^2 + 8qL - 16q", d2_closed(mu, p),
              psi0_moment([&](double y) { return source_f2(p, s.om(y), s.w1(y)); }, qt));
      std::string n95 = "bubble:B2+B1^2/2," + tag(p, mu);
      std::string n96 = "combo:energy-level-correction," + tag(p, mu);
      if (!b.wanted(n95) && !b.wanted(n96)) continue;
      RadialSolution w2 = solve_radial([&](double y) { return source_f2(p, s.om(y), omega1_tilde(mu, y)); });
      QuadResult q95 = bubble_moment(
          [&](double y) {
            double o = s.om(y), w1 = s.w1(y);
            double B1 = w1 + 0.5 * o * o;
            double B2 = w2.value(y) + o * w1 + (p - 2.0) / (6.0 * (p - 1.0)) * o * o * o;
            return B2 + 0.5 * B1 * B1;
          },
          qt);
      double c95 = 2.0 * kPi *
                   ((16.0 * q + 64.0) * l * l + (32.0 * q + 32.0 - (16.0 * q + 64.0) * kL) * l +
                    (4.0 * q + 16.0) * kL * kL - (16.0 * q + 16.0) * kL + 32.0 * q + 16.0);
      if (b.wanted(n95))
        b.add("bubble", n95,
              "2pi((16q+64)l^2 + (32q + 32 - (16q+64)L)l + (4q+16)L^2 - (16q+16)L + 32q + 16)", c95, q95);
      if (b.wanted(n96)) {
        double v = (p - 1.0) / (8.0 * kPi) * (q95.value + 2.0 * q816.value) +
                   (p - 2.0) / std::pow(16.0 * kPi, 2) * qB1.value * qB1.value;
        double e = std::fabs(p - 1.0) / (8.0 * kPi) * (q95.error + 2.0 * q816.error) +
                   std::fabs(p - 2.0) / std::pow(16.0 * kPi, 2) * 2.0 * std::fabs(qB1.value) * qB1.error;
        b.add("combo", n96, "(p-1)/(8pi)[int(B2+B1^2/2) + 2 int(A1B1+B1)] + (p-2)/(16pi)^2 (int B1)^2 = 4", 4.0,
              QuadResult{v, e});
      }
    }
  }
  return b.out;
}

AperyBackout apery_backout(double quad_tol) {
  AperyBackout r;
  r.moment_eta2_theta = psi0_moment([](double t) { return std::pow(eta0(t), 2) * theta0(t); }, quad_tol).value;
  r.moment_eta2_zeta_theta =
      psi0_moment([](double t) { return std::pow(eta0(t), 2) * zeta0(t) * theta0(t); }, quad_tol).value;
  r.zeta3 = (11.0 - r.moment_eta2_theta) / 8.0;
  r.zeta4 = (r.moment_eta2_zeta_theta + 4.0 / 9.0 * r.zeta3 + 589.0 / 162.0) / 4.0;
  return r;
}

}  // namespace bubbling
