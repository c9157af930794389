#include <CLI11.hpp>
#include <iostream>

#include "b4nls/experiment/runner.hpp"

using namespace b4nls;
using namespace b4nls::experiment;

namespace {

// Exit codes: 0 success, 1 a precondition or numerical failure inside the
// experiment, 2 an unreadable or malformed configuration, 3 I/O failure.
int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

void describe(const std::string& name) {
  const auto kind = parse_kind(name);
  if (!kind) {
    std::string known;
    for (const auto& k : kinds()) known += std::string(known.empty() ? "" : ", ") + k.name;
    throw ConfigError("unknown experiment '" + name + "' (known: " + known + ")");
  }
  const auto& info = kind_info(*kind);
  std::cout << info.name << "\n  " << info.summary << "\n  sections: [experiment] kind seed output";
  std::string sections = info.sections;
  std::istringstream is(sections);
  std::string s;
  while (is >> s) std::cout << ", [" << s << ']';
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments for the damped fourth-order Schrodinger equation"};
  app.require_subcommand(1);

  std::string config_path, output, experiment_name;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "INI config file")->required();
  run->add_option("-o,--output", output, "Output directory (overrides experiment.output)");

  auto* check = app.add_subcommand("validate", "Parse and validate a config without running it");
  check->add_option("config", config_path, "INI config file")->required();

  auto* desc = app.add_subcommand("describe", "Describe an experiment and the config sections it reads");
  desc->add_option("experiment", experiment_name, "Experiment name");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return guarded([&] {
      std::optional<std::filesystem::path> out;
      if (!output.empty()) out = output;
      const auto report = run_config_file(config_path, out);
      for (const auto& [k, v] : report.summary) std::cout << k << " = " << v << '\n';
      std::cout << "artifacts written to " << report.output.string() << '\n';
    });
  }
  if (check->parsed()) {
    return guarded([&] {
      const auto cfg = load_config(config_path);
      validate(cfg);
      std::cout << "ok: " << kind_info(cfg.kind).name << '\n';
    });
  }
  return guarded([&] {
    if (experiment_name.empty()) {
      for (const auto& k : kinds()) describe(k.name);
    } else {
      describe(experiment_name);
    }
  });
}
