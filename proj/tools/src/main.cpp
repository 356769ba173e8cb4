#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"momentum_lab: SGD-with-momentum rate laboratory"};
  app.require_subcommand(1);
  mlab::cli::Options opt;
  std::string out = ".";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed, overrides the config");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads");
  app.add_flag("--quiet", opt.quiet, "suppress the summary");

  for (const char* name : {"morse", "rates", "simulate", "spectral", "certify"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " pipeline");
    sub->add_option("--config", opt.config_path, "experiment file")->required()->check(CLI::ExistingFile);
    sub->fallthrough();
  }
  auto* rep = app.add_subcommand("reproduce", "reproduce a reference table");
  rep->add_option("target", opt.target, "figure3 | section32 | ratio_demo")->required();
  rep->add_option("--config", opt.config_path, "optional grid overrides")->check(CLI::ExistingFile);
  rep->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  opt.command = app.get_subcommands().front()->get_name();
  opt.out = out;
  if (seed_opt->count()) opt.seed = seed;
  if (threads_opt->count()) opt.threads = threads;
  return mlab::cli::execute(opt, std::cout, std::cerr);
}
