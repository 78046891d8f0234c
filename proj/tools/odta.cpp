#include "odta/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Online task allocation for a heterogeneous robot fleet"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int trials = 0;
  std::string out;
  std::vector<std::string> policies;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "base seed (trial t uses seed + t)");
    cmd->add_option("--trials", trials, "trials per scenario")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "output directory (gen: output file)");
    cmd->add_option("--policy", policies, "hmrodta and/or greedy")->delimiter(',');
  };

  std::string path;
  auto* run = app.add_subcommand("run", "run a trial battery from a manifest");
  run->add_option("manifest", path)->required();
  add_common(run);
  auto* gen = app.add_subcommand("gen", "write a request log for replay");
  gen->add_option("config", path)->required();
  add_common(gen);
  auto* report = app.add_subcommand("report", "summarize metrics CSVs in a directory");
  report->add_option("dir", path)->required();
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  odta::Overrides ov;
  try {
    for (auto* cmd : {run, gen, report}) {
      if (!cmd->parsed()) continue;
      if (cmd->count("--seed")) ov.seed = seed;
      if (cmd->count("--trials")) ov.trials = trials;
      if (cmd->count("--out")) ov.out = out;
      if (cmd->count("--policy")) {
        std::vector<odta::Policy> ps;
        for (const auto& p : policies) ps.push_back(odta::parse_policy(p));
        ov.policies = ps;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  if (run->parsed()) return odta::cmd_run(path, ov, std::cout, std::cerr);
  if (gen->parsed()) return odta::cmd_gen(path, ov, std::cout, std::cerr);
  return odta::cmd_report(path, ov, std::cout, std::cerr);
}
