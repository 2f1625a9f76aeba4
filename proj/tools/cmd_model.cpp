#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "bubbling/energy.hpp"
#include "bubbling/pde_solver.hpp"
#include "commands.hpp"

namespace cli {

using namespace bubbling;

void summary(const std::string& artifact_path, const std::string& line) {
  (artifact_path.empty() || artifact_path == "-" ? std::cerr : std::cout) << line << "\n";
}

int thread_count() {
  if (const char* env = std::getenv("BUBBLING_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Json describe_ansatz(const Ansatz& an) {
  const Scales& sc = an.scales();
  Json D = Json::array();
  for (size_t i = 0; i < an.points().size(); ++i)
    D.push_back({an.D(static_cast<int>(i), 1), an.D(static_cast<int>(i), 2), an.D(static_cast<int>(i), 3)});
  return {{"domain", Json::parse(an.backend().spec().to_json_text())},
          {"p", sc.p},
          {"lambda", sc.lambda},
          {"gamma", sc.gamma},
          {"eps", sc.eps},
          {"points", to_json(an.points())},
          {"signs", an.signs()},
          {"mu", an.mu()},
          {"d", an.d()},
          {"layers", an.layers()},
          {"D", D},
          {"exact_projection", an.exact_projection()},
          {"phi", phi_m(an.backend(), an.points(), an.signs())}};
}

AnsatzFile read_ansatz_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open ansatz file " + path);
  Json j;
  try {
    j = Json::parse(in);
    const Json& r = j.contains("result") ? j.at("result") : j;
    AnsatzFile f;
    f.domain = DomainSpec::from_json_text(r.at("domain").dump());
    for (const auto& p : r.at("points")) f.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    f.signs = r.at("signs").get<Signs>();
    f.p = r.at("p").get<double>();
    f.lambda = r.at("lambda").get<double>();
    f.exact_projection = r.value("exact_projection", false);
    return f;
  } catch (const Json::exception& e) {
    throw UsageError("malformed ansatz file " + path + ": " + e.what());
  }
}

namespace {
Ansatz build_from(const AnsatzFile& f, double p, double lambda) {
  auto g = std::make_shared<GreenBackend>(f.domain);
  AnsatzOptions opt;
  opt.exact_projection = f.exact_projection;
  return build_ansatz(g, f.points, f.signs, p, lambda, opt);
}

double parse_sigma(const std::string& s, double p) {
  if (s == "auto") return default_sigma(p);
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size() && v > 0.0 && v < 2.0) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("sigma must be 'auto' or a number in (0, 2)");
}
}  // namespace

void add_ansatz(CLI::App& app, Action& action) {
  auto* top = app.add_subcommand("ansatz", "multi-bubble ansatz and its residual");
  top->require_subcommand(1);

  struct Build {
    std::string domain, points, signs, out = "-";
    double p = 1.5, lambda = 1e-8;
    bool exact = false;
  };
  auto b = std::make_shared<Build>();
  auto* build = top->add_subcommand("build", "solve for the scales and mu, write the ansatz description");
  build->add_option("--domain", b->domain, "domain JSON (default unit disk)");
  build->add_option("--p", b->p, "exponent in (0, 2]")->capture_default_str()->check(CLI::Range(0.0, 2.0));
  build->add_option("--lambda", b->lambda, "lambda > 0")->capture_default_str()->check(CLI::PositiveNumber);
  build->add_option("--points", b->points, "'x1,y1;x2,y2'")->required();
  build->add_option("--signs", b->signs, "signs such as +,- (default all +)");
  build->add_flag("--exact-projection", b->exact, "harmonic extension instead of the projection expansion");
  build->add_option("--out", b->out, "ansatz JSON path")->capture_default_str();
  build->callback([=, &action] {
    action = {build, [=] {
                AnsatzFile f;
                f.domain = load_domain(b->domain);
                f.points = parse_points(b->points);
                f.signs = b->signs.empty() ? Signs(f.points.size(), 1) : parse_signs(b->signs);
                if (f.signs.size() != f.points.size()) throw UsageError("number of signs differs from number of points");
                f.exact_projection = b->exact;
                if (b->p == 0.0) throw UsageError("p must lie in (0, 2]");
                Ansatz an = build_from(f, b->p, b->lambda);
                write_json(b->out, artifact(*build, describe_ansatz(an)));
                std::ostringstream line;
                line << "ansatz: m = " << an.points().size() << ", gamma = " << format17(an.scales().gamma)
                     << ", eps = " << format17(an.scales().eps);
                summary(b->out, line.str());
                return 0;
              }};
  });

  struct Res {
    std::string in, sigma = "auto", out = "-", field;
    ResidualGrid grid;
  };
  auto r = std::make_shared<Res>();
  auto* res = top->add_subcommand("residual", "weighted residual norm on a sample grid");
  res->add_option("--in", r->in, "ansatz JSON from 'ansatz build'")->required();
  res->add_option("--sigma", r->sigma, "weight exponent or 'auto'")->capture_default_str();
  res->add_option("--radial", r->grid.radial, "radii per bubble")->capture_default_str()->check(CLI::Range(4, 100000));
  res->add_option("--angular", r->grid.angular, "rays per bubble")->capture_default_str()->check(CLI::Range(4, 100000));
  res->add_option("--background", r->grid.background, "background mesh per side")
      ->capture_default_str()
      ->check(CLI::Range(0, 10000));
  res->add_option("--field", r->field, "optional CSV dump x,y,U,E,weight");
  res->add_option("--out", r->out, "report path")->capture_default_str();
  res->callback([=, &action] {
    action = {res, [=] {
                AnsatzFile f = read_ansatz_file(r->in);
                Ansatz an = build_from(f, f.p, f.lambda);
                double sigma = parse_sigma(r->sigma, f.p);
                ResidualReport rep = residual_norm(an, sigma, r->grid, !r->field.empty());
                double g4p = std::pow(an.scales().gamma, 4.0 * f.p);
                Json out{{"ansatz", describe_ansatz(an)},
                         {"sigma", sigma},
                         {"norm", rep.norm},
                         {"norm_times_gamma_4p", rep.norm * g4p},
                         {"region_max", rep.region_max},
                         {"argmax", to_json(rep.argmax)},
                         {"argmax_region", rep.argmax_region},
                         {"argmax_distance", rep.argmax_distance},
                         {"points", rep.points},
                         {"potential_ratio", rep.potential_ratio},
                         {"note", "norm is the maximum over a finite sample grid and under-reports the supremum"}};
                if (!r->field.empty()) {
                  Csv csv({"x", "y", "U", "E", "weight"});
                  double eps = an.scales().eps;
                  for (const auto& s : rep.samples) {
                    Point x = eps * s.y;
                    csv.row({x.x(), x.y(), an.U(x), s.E, s.weight});
                  }
                  csv.save(r->field, *res);
                }
                write_json(r->out, artifact(*res, out));
                summary(r->out, "residual: ||E||_* = " + format17(rep.norm) + " over " + std::to_string(rep.points) +
                                    " points (sigma = " + format17(sigma) + ")");
                return std::isfinite(rep.norm) ? 0 : 1;
              }};
  });
}

void add_energy(CLI::App& app, Action& action) {
  auto* top = app.add_subcommand("energy", "energy expansion and beta_lambda");
  top->require_subcommand(1);
  struct Opts {
    std::string ansatz, sweep = "1e-6:1e-10:3", out = "-";
    DomainQuadrature q;
  };
  auto o = std::make_shared<Opts>();
  auto* ex = top->add_subcommand("expand", "J_lambda, the closed reduced energy and beta over a lambda sweep");
  ex->add_option("--ansatz", o->ansatz, "ansatz JSON from 'ansatz build'")->required();
  ex->add_option("--sweep", o->sweep, "start:end:count, geometric in lambda")->capture_default_str();
  ex->add_option("--rays", o->q.angular, "rays per bubble patch")->capture_default_str()->check(CLI::Range(4, 4096));
  ex->add_option("--out", o->out, "CSV path")->capture_default_str();
  ex->callback([=, &action] {
    action = {ex, [=] {
                AnsatzFile f = read_ansatz_file(o->ansatz);
                std::vector<double> lams = parse_sweep(o->sweep);
                struct Row {
                  double lambda, gamma, eps, J, F, bd, bf, dev;
                };
                auto one = [&](double lam) {
                  Ansatz an = build_from(f, f.p, lam);
                  EnergyReport e = j_lambda(an, o->q);
                  BetaReport b = beta_lambda(an, o->q);
                  return Row{lam, an.scales().gamma, an.scales().eps, e.J, e.closed, b.direct, b.formula, b.deviation};
                };
                std::vector<Row> rows(lams.size());
                int nt = std::min<int>(thread_count(), static_cast<int>(lams.size()));
                for (size_t start = 0; start < lams.size(); start += nt) {
                  std::vector<std::future<Row>> fut;
                  for (size_t k = start; k < std::min(lams.size(), start + nt); ++k)
                    fut.push_back(std::async(std::launch::async, one, lams[k]));
                  for (size_t k = 0; k < fut.size(); ++k) rows[start + k] = fut[k].get();
                }
                Csv csv({"lambda", "gamma", "eps", "J", "F_closed", "beta_direct", "beta_formula", "deviation"});
                for (const auto& w : rows) csv.row({w.lambda, w.gamma, w.eps, w.J, w.F, w.bd, w.bf, w.dev});
                csv.save(o->out, *ex);
                const Row& last = rows.back();
                summary(o->out, "energy: " + std::to_string(rows.size()) + " lambda values, beta - 4 pi m = " +
                                    format17(last.dev) + " at lambda = " + format17(last.lambda));
                return 0;
              }};
  });
}

void add_pde(CLI::App& app, Action& action) {
  auto* top = app.add_subcommand("pde", "nonlinear Dirichlet problem on a polar grid");
  top->require_subcommand(1);
  struct Opts {
    std::string domain, seed, out = "-", report, grade = "auto";
    double p = 1.0, lambda = 1e-2;
    int nr = 512, nth = 256;
    double start_p = 0.0, start_lambda = 0.0;
    int steps = 0;
    NewtonConfig newton;
  };
  auto o = std::make_shared<Opts>();
  auto* solve = top->add_subcommand("solve", "damped Newton from the ansatz, optional continuation");
  solve->add_option("--domain", o->domain, "domain JSON (default unit disk)");
  solve->add_option("--p", o->p, "exponent in (0, 2]")->capture_default_str()->check(CLI::Range(0.0, 2.0));
  solve->add_option("--lambda", o->lambda, "lambda > 0")->capture_default_str()->check(CLI::PositiveNumber);
  solve->add_option("--seed", o->seed, "ansatz JSON supplying points and signs (default one bubble at the centre)");
  solve->add_option("--nr", o->nr, "rings including the boundary")->capture_default_str()->check(CLI::Range(3, 1 << 15));
  solve->add_option("--nth", o->nth, "angles")->capture_default_str()->check(CLI::Range(4, 1 << 15));
  solve->add_option("--grade", o->grade, "radial grading scale, 'auto' or 'none'")->capture_default_str();
  solve->add_option("--tol", o->newton.tol, "relative residual tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", o->newton.max_iter, "Newton iterations per stage")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000));
  solve->add_option("--start-p", o->start_p, "continuation start in p (default: target)");
  solve->add_option("--start-lambda", o->start_lambda, "continuation start in lambda (default: target)");
  solve->add_option("--steps", o->steps, "continuation stages after the start")
      ->capture_default_str()
      ->check(CLI::Range(0, 1000));
  solve->add_option("--out", o->out, "solution CSV x,y,u")->capture_default_str();
  solve->add_option("--report", o->report, "report JSON path");
  solve->callback([=, &action] {
    action = {solve, [=] {
                if (o->p == 0.0) throw UsageError("p must lie in (0, 2]");
                AnsatzFile f;
                if (!o->seed.empty()) {
                  f = read_ansatz_file(o->seed);
                  if (!o->domain.empty() &&
                      load_domain(o->domain).to_json_text() != f.domain.to_json_text())
                    throw UsageError("--domain differs from the domain stored in the seed");
                } else {
                  f.domain = load_domain(o->domain);
                  f.points = {Point(0, 0)};
                  f.signs = {1};
                }
                if (f.domain.kind != DomainSpec::Kind::unit_disk)
                  throw UsageError("pde solve supports disk domains only");

                double sp = o->start_p > 0.0 ? o->start_p : o->p;
                double sl = o->start_lambda > 0.0 ? o->start_lambda : o->lambda;
                if (!(sp <= 2.0)) throw UsageError("--start-p must lie in (0, 2]");
                std::vector<ParameterPoint> path;
                for (int k = 0; k <= o->steps; ++k) {
                  double t = o->steps == 0 ? 1.0 : static_cast<double>(k) / o->steps;
                  path.push_back({sp + t * (o->p - sp), sl * std::pow(o->lambda / sl, t)});
                }

                Ansatz target = build_from(f, o->p, o->lambda);
                double scale = 0.0;
                if (o->grade == "auto") {
                  for (size_t i = 0; i < f.points.size(); ++i)
                    if (f.points[i].norm() < 1e-12) scale = target.scales().eps * target.mu()[i];
                } else if (o->grade != "none") {
                  try {
                    scale = std::stod(o->grade);
                  } catch (const std::exception&) {
                    throw UsageError("--grade must be 'auto', 'none' or a positive number");
                  }
                  if (!(scale > 0.0)) throw UsageError("--grade must be positive");
                }
                auto grid = std::make_shared<Grid2D>(Grid2D::for_domain(f.domain, o->nr, o->nth, scale));
                auto drift = [&](const ParameterPoint& q) {
                  Ansatz a = build_from(f, q.p, q.lambda);
                  return Field2D::sample(grid, [&](const Point& x) { return a.U(x); });
                };
                Field2D seed = drift(path.front());

                Json rep_json;
                Field2D u;
                int status = 0;
                auto fill = [&](const SolveReport& rep) {
                  Json path_json = Json::array();
                  for (const auto& q : rep.path) path_json.push_back({{"p", q.p}, {"lambda", q.lambda}});
                  rep_json = {{"converged", rep.converged},
                              {"iterations", rep.iterations},
                              {"residual_max", rep.residual_max},
                              {"residual_l2", rep.residual_l2},
                              {"nonlinear_scale", rep.nonlinear_scale},
                              {"roundoff_floor", rep.roundoff_floor},
                              {"damping", rep.damping},
                              {"residual_history", rep.residual_history},
                              {"path", path_json},
                              {"linear_solver", rep.solver},
                              {"message", rep.message},
                              {"grid", {{"nr", grid->nr}, {"nth", grid->nth}, {"radius", grid->radius},
                                        {"scale", grid->scale}, {"h", grid->h}}},
                              {"seed", describe_ansatz(target)}};
                };
                try {
                  std::function<Field2D(const ParameterPoint&)> moving;
                  if (o->steps > 0) moving = drift;
                  auto [sol, rep] = continuation(seed, path, o->newton, moving);
                  u = std::move(sol);
                  fill(rep);
                } catch (const SolveError& e) {
                  u = e.snapshot;
                  fill(e.report);
                  rep_json["converged"] = false;
                  rep_json["message"] = e.what();
                  status = 1;
                }
                NodalSummary ns = nodal_analysis(u);
                rep_json["nodal"] = {{"components", ns.components},
                                     {"positive", ns.positive},
                                     {"negative", ns.negative},
                                     {"boundary_touching", ns.boundary_touching}};
                rep_json["max_u"] = u.values.maxCoeff();
                rep_json["min_u"] = u.values.minCoeff();
                if (o->p == 1.0 && f.points.size() == 1 && f.points[0].norm() < 1e-12) {
                  LiouvilleRadial ex = LiouvilleRadial::concentrated(std::sqrt(o->lambda), grid->radius);
                  double err = 0.0;
                  for (int k = 0; k < grid->interior(); ++k)
                    err = std::max(err, std::abs(u.values[k] - ex(grid->node(k).norm())));
                  rep_json["exact_max_error"] = err;
                  rep_json["exact_delta"] = ex.delta;
                }
                Csv csv({"x", "y", "u"});
                for (int k = 0; k < grid->size(); ++k) {
                  Point x = grid->node(k);
                  csv.row({x.x(), x.y(), u.values[k]});
                }
                csv.save(o->out, *solve);
                if (!o->report.empty()) write_json(o->report, artifact(*solve, rep_json));
                std::ostringstream line;
                line << "pde: " << (status == 0 ? "converged" : "FAILED") << " after "
                     << rep_json["iterations"].get<int>() << " Newton steps, max u = " << format17(u.values.maxCoeff())
                     << ", " << ns.components << " sign component(s)";
                summary(o->out, line.str());
                return status;
              }};
  });
}

}  // namespace cli
