#include <iostream>

#include "CLI11.hpp"
#include "wspin/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Witten spinor identity verification"};
  app.require_subcommand(1, 1);

  wspin::RunOptions opt;
  std::string config, out = "out";
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  int jobs = 1;

  for (const auto& name : wspin::run_commands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration")->required();
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--tol-override", overrides, "tolerance override KEY=VAL");
    sub->add_option("--jobs", jobs, "parallel model runs")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : wspin::kExitInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  opt.config = config;
  opt.out = out;
  if (sub->count("--seed")) opt.seed = seed;
  opt.tol_overrides = overrides;
  opt.jobs = jobs;
  return wspin::run(sub->get_name(), opt, std::cerr);
}
