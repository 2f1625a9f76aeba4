#pragma once

#include <memory>
#include <string>

#include "bubbling/ansatz.hpp"
#include "report.hpp"

namespace cli {

void add_identities(CLI::App& app, Action& action);
void add_greens(CLI::App& app, Action& action);
void add_radial(CLI::App& app, Action& action);
void add_kr(CLI::App& app, Action& action);
void add_ansatz(CLI::App& app, Action& action);
void add_energy(CLI::App& app, Action& action);
void add_pde(CLI::App& app, Action& action);

// Artifacts go to stdout when the path is "-"; the summary then moves to stderr.
void summary(const std::string& artifact_path, const std::string& line);

// domain, points, signs, p, lambda written by `ansatz build`
struct AnsatzFile {
  bubbling::DomainSpec domain;
  bubbling::Config points;
  bubbling::Signs signs;
  double p = 1.0, lambda = 0.0;
  bool exact_projection = false;
};

AnsatzFile read_ansatz_file(const std::string& path);
Json describe_ansatz(const bubbling::Ansatz& an);

int thread_count();  // BUBBLING_THREADS, default hardware concurrency

}  // namespace cli
