#include <cmath>
#include <iostream>

#include "bubbling/radial_profiles.hpp"
#include "bubbling/special_integrals.hpp"
#include "commands.hpp"

namespace cli {

using namespace bubbling;

void add_identities(CLI::App& app, Action& action) {
  auto* top = app.add_subcommand("identities", "closed-form integral identities");
  top->require_subcommand(1);
  auto* verify = top->add_subcommand("verify", "recompute every catalogued identity by quadrature");
  auto o = std::make_shared<CatalogOptions>();
  auto out = std::make_shared<std::string>("-");
  verify->add_option("--filter", o->filter, "glob over identity names")->capture_default_str();
  verify->add_option("--tol", o->tol, "abs/rel pass tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  verify->add_option("--out", *out, "report path")->capture_default_str();
  verify->callback([=, &action] {
    action = {verify, [=] {
                auto recs = verify_catalog(*o);
                Json arr = Json::array();
                int passed = 0;
                for (const auto& r : recs) {
                  passed += r.pass;
                  arr.push_back({{"name", r.name},
                                 {"group", r.group},
                                 {"closed_form", r.closed_form},
                                 {"closed", r.closed},
                                 {"quadrature", r.quadrature},
                                 {"quad_error", r.quad_error},
                                 {"abs_err", r.abs_err},
                                 {"rel_err", r.rel_err},
                                 {"pass", r.pass},
                                 {"note", r.note}});
                }
                Json res{{"records", arr}, {"total", recs.size()}, {"passed", passed}};
                bool apery_ok = true;
                if (o->filter == "*") {
                  AperyBackout a = apery_backout();
                  apery_ok = std::abs(a.zeta3 - 1.2020569031595942) < 1e-7 && std::abs(a.zeta4 - 1.0823232337111382) < 1e-7;
                  res["apery"] = {{"zeta3", a.zeta3}, {"zeta4", a.zeta4}, {"pass", apery_ok}};
                }
                bool ok = passed == static_cast<int>(recs.size()) && !recs.empty() && apery_ok;
                write_json(*out, artifact(*verify, res));
                summary(*out, "identities: " + std::to_string(passed) + "/" + std::to_string(recs.size()) + " passed" +
                                  (o->filter == "*" ? (apery_ok ? ", zeta back-out ok" : ", zeta back-out FAILED") : ""));
                return ok ? 0 : 1;
              }};
  });
}

void add_greens(CLI::App& app, Action& action) {
  auto* top = app.add_subcommand("greens", "Green's function and Robin function");
  top->require_subcommand(1);

  auto* eval = top->add_subcommand("eval", "G(x, y), H(x, y) and the Robin function at y");
  auto e = std::make_shared<std::array<std::string, 4>>();
  eval->add_option("--domain", (*e)[0], "domain JSON (default unit disk)");
  eval->add_option("--x", (*e)[1], "x as 'a,b'")->required();
  eval->add_option("--y", (*e)[2], "y as 'c,d'")->required();
  (*e)[3] = "-";
  eval->add_option("--out", (*e)[3], "report path")->capture_default_str();
  eval->callback([=, &action] {
    action = {eval, [=] {
                GreenBackend g(load_domain((*e)[0]));
                Point x = parse_point((*e)[1]), y = parse_point((*e)[2]);
                if (!g.contains(x)) throw UsageError("x lies outside the domain");
                if (!g.contains(y)) throw UsageError("y lies outside the domain");
                if ((x - y).norm() == 0.0) throw UsageError("G is singular at x = y");
                Json res{{"x", to_json(x)},
                         {"y", to_json(y)},
                         {"G", g.green(x, y)},
                         {"H", g.regular_part(x, y)},
                         {"robin_y", g.robin(y)},
                         {"backend", g.analytic() ? "analytic" : "nystrom"}};
                write_json((*e)[3], artifact(*eval, res));
                summary((*e)[3], "G(x, y) = " + format17(res["G"].get<double>()));
                return 0;
              }};
  });

  auto* table = top->add_subcommand("robin-table", "CSV rows x,y,H(y,y) on an n x n grid over the bounding box");
  auto t = std::make_shared<std::pair<std::string, std::string>>("", "-");
  auto n = std::make_shared<int>(21);
  table->add_option("--domain", t->first, "domain JSON (default unit disk)");
  table->add_option("--grid", *n, "points per side")->capture_default_str()->check(CLI::Range(2, 2000));
  table->add_option("--out", t->second, "CSV path")->capture_default_str();
  table->callback([=, &action] {
    action = {table, [=] {
                GreenBackend g(load_domain(t->first));
                const auto& bd = g.boundary();
                double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
                for (const auto& p : bd.x) {
                  x0 = std::min(x0, p.x());
                  x1 = std::max(x1, p.x());
                  y0 = std::min(y0, p.y());
                  y1 = std::max(y1, p.y());
                }
                Csv csv({"x", "y", "H"});
                int rows = 0;
                for (int i = 0; i < *n; ++i)
                  for (int j = 0; j < *n; ++j) {
                    Point y(x0 + (x1 - x0) * i / (*n - 1), y0 + (y1 - y0) * j / (*n - 1));
                    if (g.signed_distance(y) > -1e-3 * g.diameter()) continue;
                    csv.row({y.x(), y.y(), g.robin(y)});
                    ++rows;
                  }
                csv.save(t->second, *table);
                summary(t->second, "robin-table: " + std::to_string(rows) + " interior points");
                return 0;
              }};
  });
}

void add_radial(CLI::App& app, Action& action) {
  auto* top = app.add_subcommand("radial", "radial correction profiles and D constants");
  top->require_subcommand(1);

  struct Opts {
    int j = 1;
    double p = 1.5, mu = 1.0, rmax = 1e4;
    int points = 400;
    std::string out = "-";
  };
  auto o = std::make_shared<Opts>();
  auto* prof = top->add_subcommand("profile", "CSV columns r, omega^j(r), f^j(r)");
  prof->add_option("--j", o->j, "layer")->capture_default_str()->check(CLI::Range(1, 3));
  prof->add_option("--p", o->p, "exponent")->capture_default_str()->check(CLI::Range(0.0, 2.0));
  prof->add_option("--mu", o->mu, "concentration parameter")->capture_default_str()->check(CLI::PositiveNumber);
  prof->add_option("--rmax", o->rmax, "largest radius")->capture_default_str()->check(CLI::PositiveNumber);
  prof->add_option("--points", o->points, "log-spaced radii")->capture_default_str()->check(CLI::Range(2, 100000));
  prof->add_option("--out", o->out, "CSV path")->capture_default_str();
  prof->callback([=, &action] {
    action = {prof, [=] {
                if (o->p == 0.0) throw UsageError("p must lie in (0, 2]");
                if (o->p == 1.0) throw UsageError("the correction layers vanish identically at p = 1");
                CorrectionProfiles cp(o->p, o->mu, o->j);
                Csv csv({"r", "omega", "f"});
                double r0 = 1e-4 * o->mu;
                for (int k = 0; k < o->points; ++k) {
                  double r = r0 * std::pow(o->rmax / r0, static_cast<double>(k) / (o->points - 1));
                  csv.row({r, cp.omega(o->j, r), cp.source(o->j, r)});
                }
                csv.save(o->out, *prof);
                summary(o->out, "radial profile j=" + std::to_string(o->j) + ": D = " + format17(cp.D(o->j)));
                return 0;
              }};
  });

  auto d = std::make_shared<Opts>();
  auto* dc = top->add_subcommand("dconst", "JSON {D1, D2, D3}");
  dc->add_option("--p", d->p, "exponent")->capture_default_str()->check(CLI::Range(0.0, 2.0));
  dc->add_option("--mu", d->mu, "concentration parameter")->capture_default_str()->check(CLI::PositiveNumber);
  dc->add_option("--out", d->out, "report path")->capture_default_str();
  dc->callback([=, &action] {
    action = {dc, [=] {
                if (d->p == 0.0) throw UsageError("p must lie in (0, 2]");
                Json res;
                if (d->p == 1.0) {
                  res = {{"D1", d1_closed(d->mu)}, {"D2", 0.0}, {"D3", 0.0}};
                } else {
                  CorrectionProfiles cp(d->p, d->mu, 3);
                  res = {{"D1", cp.D(1)}, {"D2", cp.D(2)}, {"D3", cp.D(3)},
                         {"D1_closed", d1_closed(d->mu)}, {"D2_closed", d2_closed(d->mu, d->p)}};
                }
                write_json(d->out, artifact(*dc, res));
                summary(d->out, "D1 = " + format17(res["D1"].get<double>()));
                return 0;
              }};
  });
}

namespace {
Json report_json(const CriticalReport& r) {
  return {{"points", to_json(r.points)},
          {"signs", r.signs},
          {"phi", r.phi},
          {"grad_norm", r.grad_norm},
          {"fd_grad_norm", r.fd_grad_norm},
          {"eigenvalues", r.eigenvalues},
          {"classification", r.classification},
          {"degree", r.degree},
          {"stable", r.stable},
          {"gauge_fixed", r.gauge_fixed}};
}
}  // namespace

void add_kr(CLI::App& app, Action& action) {
  auto* top = app.add_subcommand("kr", "signed Kirchhoff-Routh function");
  top->require_subcommand(1);

  struct Opts {
    std::string domain, signs = "+,-", points, out = "-";
    SearchOptions search;
  };
  auto f = std::make_shared<Opts>();
  auto* find = top->add_subcommand("find", "multistart search for critical points");
  find->add_option("--domain", f->domain, "domain JSON (default unit disk)");
  find->add_option("--signs", f->signs, "signs such as +,-")->capture_default_str();
  find->add_option("--starts", f->search.starts, "random starts")->capture_default_str()->check(CLI::Range(1, 100000));
  find->add_option("--seed", f->search.seed, "random seed")->capture_default_str();
  find->add_option("--out", f->out, "report path")->capture_default_str();
  find->callback([=, &action] {
    action = {find, [=] {
                GreenBackend g(load_domain(f->domain));
                Signs a = parse_signs(f->signs);
                auto reps = find_critical(g, a, f->search);
                Json arr = Json::array();
                for (const auto& r : reps) arr.push_back(report_json(r));
                write_json(f->out, artifact(*find, arr));
                std::string line = "kr find: " + std::to_string(reps.size()) + " critical configuration(s)";
                if (!reps.empty()) line += ", first phi = " + format17(reps.front().phi);
                summary(f->out, line);
                return reps.empty() ? 1 : 0;
              }};
  });

  auto e = std::make_shared<Opts>();
  auto* ev = top->add_subcommand("eval", "phi_m at a configuration");
  ev->add_option("--domain", e->domain, "domain JSON (default unit disk)");
  ev->add_option("--points", e->points, "'x1,y1;x2,y2'")->required();
  ev->add_option("--signs", e->signs, "signs such as +,-")->capture_default_str();
  ev->callback([=, &action] {
    action = {ev, [=] {
                GreenBackend g(load_domain(e->domain));
                Config xi = parse_points(e->points);
                Signs a = parse_signs(e->signs);
                if (a.size() != xi.size()) throw UsageError("number of signs differs from number of points");
                for (const auto& x : xi)
                  if (!g.contains(x)) throw UsageError("a point lies outside the domain");
                std::cout << format17(phi_m(g, xi, a)) << "\n";
                return 0;
              }};
  });
}

}  // namespace cli
