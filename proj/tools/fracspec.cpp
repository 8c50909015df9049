#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "fracspec/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ray-fractional operator toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;

  const std::pair<const char*, const char*> commands[] = {
      {"identities", "pointwise integral/derivative identity checks"},
      {"accretivity", "lower-bound constants and Rayleigh-quotient scan"},
      {"range", "numerical-range sampling and sector fit"},
      {"sandwich", "two-sided eigenvalue bounds"},
      {"report", "all analyses in one pass"},
  };
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "config file (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "seed override");
    sub->add_flag("--quiet", quiet, "suppress per-check output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    fracspec::RunConfig cfg = fracspec::load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (sub->count("--seed") > 0) cfg.seed = seed;
    return fracspec::run_command(sub->get_name(), cfg, quiet);
  } catch (const fracspec::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fracspec::numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
