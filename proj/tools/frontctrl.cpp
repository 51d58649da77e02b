#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "frontctrl/config.hpp"
#include "frontctrl/errors.hpp"

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

// Command-line flags and the config keys they override.
const std::map<std::string, std::vector<Flag>> kFlags = {
    {"cstar", {}},
    {"profile", {{"--problem", "problem.kind", "p1 or p2"}, {"--c", "problem.c", "front speed"}}},
    {"ecurve",
     {{"--cmin", "ecurve.cmin", "smallest speed"},
      {"--cmax", "ecurve.cmax", "largest speed"},
      {"--n", "ecurve.n", "number of speeds"}}},
    {"verify",
     {{"--problem", "problem.kind", "p1 or p2"},
      {"--c", "problem.c", "front speed"},
      {"--grid", "numerics.grid", "oracle lattice size"}}},
    {"simulate", {{"--dim", "simulate.dim", "1, strip or plane"}, {"--c", "simulate.c", "control speed"}}},
    {"interface-limit", {{"--n", "limit.n", "plateau parameter"}}},
};


}  // namespace

int main(int argc, char** argv) {
  using namespace frontctrl;
  CLI::App app{"Optimal controls for traveling fronts of scalar reaction-diffusion equations"};
  app.set_version_flag("--version", std::string("frontctrl ") + FRONTCTRL_VERSION + " (config schema " +
                                        FRONTCTRL_CONFIG_SCHEMA + ")");
  app.require_subcommand(1);
  app.footer("Config keys (section.key = value) and defaults:\n" + config_reference());

  const std::map<std::string, std::string> about = {
      {"cstar", "critical speed and the uncontrolled heteroclinic"},
      {"profile", "optimal controlled profile at one speed"},
      {"ecurve", "minimum effort E(c) over a range of speeds"},
      {"verify", "closed form against the grid oracle and the Stokes identity"},
      {"simulate", "time-dependent run in 1D, on a strip or in the plane"},
      {"interface-limit", "eps sweep of the controlled moving set"},
  };

  std::string config_file, model, output, threads;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, std::vector<std::pair<CLI::Option*, std::string>>> flag_opts;

  for (const auto& [name, flags] : kFlags) {
    auto* sub = app.add_subcommand(name, about.at(name));
    subs[name] = sub;
    sub->add_option("--config", config_file, "config file")->check(CLI::ExistingFile);
    sub->add_option("--model", model, "cubic, logistic or polynomial");
    sub->add_option("--output", output, "output directory");
    sub->add_option("--threads", threads, "worker threads, 0 = all cores");
    sub->add_option("--set", sets, "override, section.key=value (repeatable)");
    for (const auto& f : flags) {
      auto* opt = sub->add_option(f.name, flag_values[std::string(name) + f.key], f.help);
      flag_opts[name].push_back({opt, f.key});
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kPrecondition;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  RunConfig cfg;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = parse_config(ss.str());
    }
    if (!model.empty()) apply_override(cfg, "model.kind", model);
    if (!output.empty()) apply_override(cfg, "output.dir", output);
    if (!threads.empty()) apply_override(cfg, "numerics.threads", threads);
    for (const auto& [opt, key] : flag_opts[command])
      if (opt->count() > 0) apply_override(cfg, key, flag_values[command + key]);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) fail(ErrorCode::Config, "--set expects section.key=value, got '" + s + "'");
      apply_override(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kPrecondition;
  }
  return cli::run(command, cfg, std::cout, std::cerr);
}
