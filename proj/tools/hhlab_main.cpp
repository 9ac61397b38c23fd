// Command-line driver: every experiment is a subcommand reading a JSON config
// and writing CSV/JSON artifacts into an output directory.

#include "hhlab/experiment.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

struct GlobalOpts {
  std::string config;
  std::string out = "out";
  int threads = 1;
  long long seed = -1;
};

int run_command(const GlobalOpts& opts, const std::string& command) {
  std::ifstream in(opts.config);
  if (!in) {
    std::cerr << "error: cannot read config " << opts.config << "\n";
    return 2;
  }
  hhlab::Json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    std::cerr << "error: config parse: " << e.what() << "\n";
    return 2;
  }
  cfg["command"] = command;  // the subcommand owns the dispatch
  std::optional<unsigned long long> seed;
  if (opts.seed >= 0) seed = static_cast<unsigned long long>(opts.seed);
  auto res = hhlab::run_experiment(cfg, opts.out, opts.threads, seed);
  if (res.exit_code == 0)
    std::cout << res.message << "\n";
  else
    std::cerr << "error: " << res.message << "\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hhlab: numerical laboratory for the weighted Hardy-Henon heat equation"};
  app.require_subcommand(1);

  GlobalOpts opts;
  std::string describe_name;

  const std::vector<std::string> commands = {"region", "smoothing", "solve",    "extend",
                                             "selfsim", "nonexist", "weakcheck"};
  std::string chosen;
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name, hhlab::describe(name).substr(0, 60));
    sub->add_option("--config", opts.config, "JSON experiment config")->required();
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--threads", opts.threads, "worker threads");
    sub->add_option("--seed", opts.seed, "override the config seed");
    sub->callback([&chosen, name]() { chosen = name; });
  }
  auto* desc = app.add_subcommand("describe", "print a condition set or command reference");
  desc->add_option("name", describe_name, "condition set or command name")->required();
  desc->callback([&chosen]() { chosen = "describe"; });

  CLI11_PARSE(app, argc, argv);

  if (chosen == "describe") {
    try {
      std::cout << hhlab::describe(describe_name);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    return 0;
  }
  return run_command(opts, chosen);
}
