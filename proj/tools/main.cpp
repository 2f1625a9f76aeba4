#include <iostream>

#include "bubbling/greens.hpp"
#include "commands.hpp"

namespace {

int fail(bool json, int status, const std::string& kind, const std::string& message) {
  if (json)
    std::cerr << cli::dump17(cli::Json{{"error", {{"kind", kind}, {"status", status}, {"message", message}}}});
  else
    std::cerr << "error: " << message << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-bubble ansatz toolkit for exponential Dirichlet problems"};
  app.set_version_flag("--version", std::string("bubbling ") + BUBBLING_VERSION);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "print failures as JSON on stderr");
  app.require_subcommand(1);

  cli::Action action;
  cli::add_identities(app, action);
  cli::add_greens(app, action);
  cli::add_radial(app, action);
  cli::add_kr(app, action);
  cli::add_ansatz(app, action);
  cli::add_energy(app, action);
  cli::add_pde(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (json_errors) return fail(true, 2, "usage", e.what());
    app.exit(e);
    return 2;
  }
  if (!action.run) return fail(json_errors, 2, "usage", "no command selected");

  try {
    return action.run();
  } catch (const cli::UsageError& e) {
    return fail(json_errors, 2, "usage", e.what());
  } catch (const bubbling::DomainError& e) {
    return fail(json_errors, 2, "usage", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(json_errors, 2, "usage", e.what());
  } catch (const std::exception& e) {
    return fail(json_errors, 1, "computation", e.what());
  }
}
