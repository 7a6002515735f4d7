// Command-line front end: argument parsing and subcommand execution.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chebcon/errors.hpp"
#include "chebcon/noise.hpp"

namespace chebcon {

enum class Subcommand { Run, Convergence, Privacy, Robustness, Oracle, Selftest };

std::string to_string(Subcommand sub);

struct Command {
  Subcommand sub = Subcommand::Run;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = "chebcon_out";
  std::optional<std::uint64_t> seed;
  std::vector<NoiseFamily> families;
  std::vector<double> rates;
  std::vector<double> epsilons;
  std::size_t trials = 1000;
  std::size_t seeds = 10;
  int verbosity = 0;
};

// Carries the exit code: 0 for --help, 2 otherwise.
class UsageError : public Error {
 public:
  UsageError(const std::string& what, int code) : Error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitScenarioFailure = 1;
inline constexpr int kExitConfigError = 2;

Command parse_args(int argc, const char* const* argv);

// 0 on success, 1 on scenario failure, 2 on configuration error.
int execute(const Command& cmd, std::ostream& out, std::ostream& err);

// parse_args + execute with usage errors reported on err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chebcon
