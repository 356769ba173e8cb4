#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace mlab::cli {

struct Options {
  std::string command;  // morse | rates | simulate | spectral | certify | reproduce
  std::string config_path;
  std::string target;  // reproduce only
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool quiet = false;
};

struct Table {
  std::string file;
  CsvTable csv;
};

struct Report {
  std::vector<Table> tables;
  std::vector<std::string> warnings;
  std::vector<std::string> summary;  // human-readable lines for stdout
};

struct Context {
  Config config;
  std::string command;
  std::string target;
  std::string hash;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::filesystem::path out;
};

Report run_morse(const Context& ctx);
Report run_rates(const Context& ctx);
Report run_simulate(const Context& ctx);
Report run_spectral(const Context& ctx);
Report run_certify(const Context& ctx);
Report run_reproduce(const Context& ctx);

/// Resolves config, seed and threads, runs the command, writes CSV files and
/// manifest.json. Returns the process exit status (0, 2 validation, 3 numerical).
int execute(const Options& opt, std::ostream& out, std::ostream& err);

/// Thread count: explicit flag, then MOMENTUM_LAB_THREADS, then config, then 1.
unsigned resolve_threads(const std::optional<unsigned>& flag, const Config& cfg);

}  // namespace mlab::cli
