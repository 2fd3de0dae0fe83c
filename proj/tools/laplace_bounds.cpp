// laplace-bounds <command> --config <path> [--out <path>] [--seed <n>]

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "laplace_bounds/cli.hpp"

namespace lbc = laplace_bounds::cli;

int main(int argc, char** argv) {
  CLI::App app{"Upper and lower estimates for Laplace integrals"};
  app.require_subcommand(1);

  const std::map<std::string, std::string> about = {
      {"conjugate", "Legendre-Fenchel conjugate and pi_kappa at lambda points"},
      {"bound", "oracle, best upper and best lower estimate of ln I(lambda)"},
      {"scan", "ln I / zeta* along a ray, with R and V diagnostics"},
      {"inverse", "bounds on zeta recovered from a comparison function (1D)"},
      {"chernoff", "tail bound exp(-phi*(x)) from a log-MGF"},
      {"asympt", "power-family oracle against its closed-form bracket"},
  };
  std::string config, out;
  std::optional<std::uint64_t> seed;
  for (const std::string& name : lbc::commands()) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "CSV output path ('-' for stdout); the sidecar goes next to it as .json");
    sub->add_option("--seed", seed, "RNG seed (default 42)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return lbc::kExitInput;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (out.empty()) out = command + ".csv";
  return lbc::execute(command, config, out, seed, std::cout, std::cerr);
}
