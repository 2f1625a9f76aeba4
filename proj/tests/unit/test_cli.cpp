#include <doctest.h>

#include <json.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path workdir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("bubbling_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    std::ofstream(d / "disk.json") << R"({"kind":"unit_disk","radius":1.0})";
    std::ofstream(d / "oval.json") << R"({"kind":"parametric","nodes":[[1,0],[0,0.7],[-1,0],[0,-0.7]]})";
    std::ofstream(d / "bad.json") << R"({"kind":"unit_disk","radius":1.0,"colour":"red"})";
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  std::string cmd = "cd '" + workdir().string() + "' && '" BUBBLING_CLI "' " + args + " >stdout.txt 2>stderr.txt";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::string& name) {
  std::ifstream in(workdir() / name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("identity catalogue passes") {
  REQUIRE(run("identities verify --out ids.json") == 0);
  json j = json::parse(slurp("ids.json"));
  CHECK(j["command"] == "identities verify");
  CHECK(j["result"]["passed"] == j["result"]["total"]);
  CHECK(j["result"]["total"].get<int>() >= 45);
  CHECK(j["result"]["apery"]["pass"] == true);
}

TEST_CASE("kr find returns the antipodal pair") {
  REQUIRE(run("kr find --domain disk.json --signs +,- --starts 16 --seed 7 --out kr.json") == 0);
  json j = json::parse(slurp("kr.json"));
  const json& pts = j["result"].at(0)["points"];
  double t = std::sqrt(std::sqrt(5.0) - 2.0);
  CHECK(std::abs(std::hypot(pts[0][0].get<double>(), pts[0][1].get<double>()) - t) < 1e-5);
  CHECK(std::abs(std::hypot(pts[1][0].get<double>(), pts[1][1].get<double>()) - t) < 1e-5);
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run("greens eval --domain disk.json --x 2,0 --y 0.1,0") == 2);
  CHECK(slurp("stderr.txt").find("outside") != std::string::npos);
  CHECK(run("--json-errors greens eval --domain disk.json --x 2,0 --y 0.1,0") == 2);
  json e = json::parse(slurp("stderr.txt"));
  CHECK(e["error"]["kind"] == "usage");
  CHECK(e["error"]["status"] == 2);
  CHECK(run("nonsense") == 2);
  CHECK(run("kr eval --points 0.1,0 --unknown 3") == 2);
  CHECK(run("greens eval --domain bad.json --x 0,0 --y 0.1,0") == 2);
  CHECK(run("ansatz build --p 3 --points 0,0") == 2);
  CHECK(run("radial profile --p 1 --j 1") == 2);
  CHECK(run("pde solve --domain oval.json --nr 16 --nth 8") == 2);
}

TEST_CASE("outputs are byte-identical for identical runs and embed the run config") {
  REQUIRE(run("ansatz build --p 1.5 --lambda 1e-6 --points '-0.48586827175664571,0;0.48586827175664571,0' --signs +,- --out an.json") == 0);
  std::string first = slurp("an.json");
  REQUIRE(run("ansatz build --p 1.5 --lambda 1e-6 --points '-0.48586827175664571,0;0.48586827175664571,0' --signs +,- --out an.json") == 0);
  CHECK(slurp("an.json") == first);
  json j = json::parse(first);
  CHECK(j["tool"] == "bubbling");
  CHECK(j.contains("version"));
  CHECK(j["options"]["p"] == "1.5");
  CHECK(j["result"]["mu"].size() == 2);
  // 17 significant digits
  CHECK(first.find("\"eps\": ") != std::string::npos);
  std::string eps = first.substr(first.find("\"eps\": ") + 7);
  eps = eps.substr(0, eps.find_first_of(",\n"));
  CHECK(std::stod(eps) == j["result"]["eps"].get<double>());
}

TEST_CASE("residual, energy and pde commands write their artifacts") {
  REQUIRE(run("ansatz build --p 1.5 --lambda 1e-6 --points 0,0 --out one.json") == 0);
  REQUIRE(run("ansatz residual --in one.json --sigma auto --radial 40 --angular 8 --background 8 --out res.json "
              "--field field.csv") == 0);
  json r = json::parse(slurp("res.json"));
  CHECK(r["result"]["norm"].get<double>() > 0.0);
  CHECK(slurp("field.csv").rfind("x,y,U,E,weight\n", 0) == 0);
  CHECK(json::parse(slurp("field.csv.meta.json"))["command"] == "ansatz residual");

  REQUIRE(run("energy expand --ansatz one.json --sweep 1e-6:1e-8:2 --out energy.csv") == 0);
  std::string csv = slurp("energy.csv");
  CHECK(csv.rfind("lambda,gamma,eps,J,F_closed,beta_direct,beta_formula,deviation\n9.9999999999999995e-07,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  REQUIRE(run("ansatz build --p 1 --lambda 1e-2 --points 0,0 --out seed.json") == 0);
  REQUIRE(run("pde solve --domain disk.json --p 1 --lambda 1e-2 --seed seed.json --nr 64 --nth 32 --out sol.csv "
              "--report pde.json") == 0);
  json p = json::parse(slurp("pde.json"));
  CHECK(p["result"]["converged"] == true);
  CHECK(p["result"]["iterations"].get<int>() <= 10);
  CHECK(p["result"]["exact_max_error"].get<double>() < 1e-2);
  CHECK(p["result"]["nodal"]["components"] == 1);
  CHECK(slurp("sol.csv").rfind("x,y,u\n", 0) == 0);
}
