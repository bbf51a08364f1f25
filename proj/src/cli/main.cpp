#include <iostream>

#include <CLI11.hpp>

#include "zetalab/cli/app.hpp"
#include "zetalab/error.hpp"

namespace zetalab::cli {

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on log-correlated fields built from random Euler products"};
  app.require_subcommand(1, 1);
  Invocation inv;
  std::int64_t seed = 0;
  std::int64_t threads = 0;
  std::string out;
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", inv.config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_option("--out", out, "output root");
    sub->add_option("--override", inv.overrides, "section.key=value, repeatable")->allow_extra_args(false);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  auto* chosen = app.get_subcommands().front();
  inv.subcommand = chosen->get_name();
  if (chosen->count("--seed")) inv.seed = seed;
  if (chosen->count("--threads")) inv.threads = threads;
  if (chosen->count("--out")) inv.out = out;
  try {
    std::cout << run(inv).string() << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "zetalab: error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "zetalab: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace zetalab::cli
