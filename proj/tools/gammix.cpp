#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "gammix/density_zoo.hpp"
#include "gammix/experiments.hpp"
#include "gammix/io.hpp"
#include "gammix/sampler.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEnvironment = 3;

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::string config_file;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet-process Gamma mixtures: simulation, posterior fitting, approximation studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gammix::kToolVersion);

  std::map<std::string, Subcommand> subs;
  for (const auto& spec : gammix::command_specs()) {
    Subcommand& s = subs[spec.name];
    s.app = app.add_subcommand(spec.name, spec.help);
    for (const auto& o : spec.options) {
      std::string help = o.help;
      if (!o.fallback.empty()) help += " [default: " + o.fallback + "]";
      if (o.required) help += " (required)";
      s.app->add_option("--" + o.key, s.values[o.key], help);
    }
    s.app->add_option("--config", s.config_file, "key=value file mirroring the flags; flags win")
        ->check(CLI::ExistingFile);
  }
  std::string manifest;
  CLI::App* rerun = app.add_subcommand("rerun", "re-run a command from its manifest and compare outputs");
  rerun->add_option("--manifest", manifest, "manifest JSON written by an earlier run")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (rerun->parsed()) {
      const auto report = gammix::rerun_manifest(manifest, std::cout);
      if (!report.identical) {
        std::cerr << "error: outputs differ from the manifest\n";
        return kExitFailure;
      }
      std::cout << "all outputs identical\n";
      return kExitOk;
    }
    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      std::map<std::string, std::string> flags;
      for (const auto& [key, value] : s.values) {
        if (s.app->get_option("--" + key)->count() > 0) flags[key] = value;
      }
      const auto file = s.config_file.empty() ? std::map<std::string, std::string>{}
                                              : gammix::read_config_file(s.config_file);
      const auto config = gammix::resolve_config(name, file, flags);
      gammix::run_command(name, config, std::cout);
      return kExitOk;
    }
  } catch (const gammix::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
