#pragma once

#include <CLI11.hpp>
#include <json.hpp>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bubbling/greens.hpp"
#include "bubbling/kirchhoff_routh.hpp"

namespace cli {

using Json = nlohmann::ordered_json;

// bad input that the parser could not catch; exits with status 2
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// the selected subcommand, set by its parse callback
struct Action {
  const CLI::App* leaf = nullptr;
  std::function<int()> run;
};

std::string format17(double v);
// JSON text with every float printed to 17 significant digits
std::string dump17(const Json& j);
void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const Json& j);

// {"tool": ..., "version": ..., "command": ..., "options": {...}}
Json run_config(const CLI::App& leaf);
// run config plus payload under "result"
Json artifact(const CLI::App& leaf, Json result);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void row(const std::vector<double>& values);
  std::string text() const { return out_; }
  void save(const std::string& path) const;  // "-" or empty writes to stdout
  // also writes the run config next to a file target as <path>.meta.json
  void save(const std::string& path, const CLI::App& leaf) const;

 private:
  size_t cols_;
  std::string out_;
};

bubbling::Point parse_point(const std::string& text);
bubbling::Config parse_points(const std::string& text);
// "start:end:count", geometric
std::vector<double> parse_sweep(const std::string& text);
bubbling::DomainSpec load_domain(const std::string& path);

Json to_json(const bubbling::Point& p);
Json to_json(const bubbling::Config& c);

}  // namespace cli
