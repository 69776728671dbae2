#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mw {

/// One mwlab invocation.
struct CommandSpec {
  std::string subcommand;  // young, weights, maximal, luxemburg, decompose, verify, claims
  std::filesystem::path config;
  std::vector<std::string> overrides;  // "mesh.cells=2048"
  std::filesystem::path out = "mwlab-out";
  int verbosity = 0;
  std::optional<std::uint64_t> seed;
  bool resolution_doubling = false;
  int threads = 0;  // 0: hardware concurrency
};

const std::vector<std::string>& subcommands();

/// Exit codes: 0 all checks pass, 1 usage or config error, 2 a property
/// fails, 3 hypothesis refusal.
int run(const CommandSpec& spec, std::ostream& out, std::ostream& err);

/// Parses argv with CLI11 and calls run().
int run_main(int argc, char** argv);

}  // namespace mw
