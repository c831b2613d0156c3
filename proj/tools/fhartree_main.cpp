// Command-line entry point: one subcommand per experiment plus `compare`.
// All experiment parameters live in the JSON config; the command line only
// selects the config file and optionally overrides the output directory.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "fhartree/runner.hpp"
#include "fhartree/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fhartree: radial pseudospectral workbench for the fractional "
               "Hartree equation"};
  app.set_version_flag("--version", fhartree::version_string);
  app.require_subcommand(1);

  struct SubOpts {
    std::string config;
    std::string output;
  };
  std::map<std::string, SubOpts> opts;
  for (const std::string& name : fhartree::experiment_names) {
    auto* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    auto& o = opts[name];
    sub->add_option("-c,--config", o.config, "JSON config file")->required();
    sub->add_option("-o,--output", o.output, "output directory override");
  }

  std::string cmp_a, cmp_b;
  auto* cmp = app.add_subcommand("compare", "diff two run manifests");
  cmp->add_option("a", cmp_a, "first manifest.json")->required();
  cmp->add_option("b", cmp_b, "second manifest.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmp->parsed()) {
      const auto diff = fhartree::compare_manifests(cmp_a, cmp_b);
      std::cout << diff.dump(2) << "\n";
      return 0;
    }
    for (const std::string& name : fhartree::experiment_names) {
      if (!app.get_subcommand(name)->parsed()) continue;
      const auto& o = opts[name];
      const auto config = fhartree::parse_config_file(
          o.config, name,
          o.output.empty() ? std::nullopt : std::make_optional(o.output));
      const auto manifest = fhartree::run(config);
      for (const auto& check : manifest.checks)
        std::printf("[%s] %s = %.6g (tolerance %.6g, %s)\n",
                    check.pass ? "PASS" : "FAIL", check.name.c_str(), check.value,
                    check.tolerance, check.comparator.c_str());
      if (!manifest.error.empty())
        std::fprintf(stderr, "error: %s\n", manifest.error.c_str());
      std::printf("status: %s (manifest: %s)\n", manifest.status.c_str(),
                  (config.output_dir / "manifest.json").string().c_str());
      return fhartree::exit_code(manifest);
    }
  } catch (const fhartree::invalid_input& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 1;
  }
  return 2;
}
