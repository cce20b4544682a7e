#ifndef ERASURE_CLI_HPP
#define ERASURE_CLI_HPP

#include "erasure/quantum_core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace erasure {

// Bad configuration or command line; maps to exit status 2.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum ExitStatus : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitNumeric = 3 };

struct SweepAxis {
  std::string name;  // a config key, e.g. iss.N or model.gamma2
  double start = 0.0;
  double stop = 0.0;
  int points = 1;
  bool log_scale = false;
  // Log sweeps cannot reach 0; a zero start yields 0 followed by points-1
  // log-spaced values from log_floor to stop.
  double log_floor = 1e-4;

  std::vector<double> values() const;
  // Header label: the key with its section prefix dropped.
  std::string column() const;
};

struct RunConfig {
  std::string command;
  std::map<std::string, std::string> values;  // section-prefixed keys, e.g. model.omega
  std::optional<SweepAxis> sweep;
  std::string output;  // empty writes to standard output
  std::uint64_t seed = 12345;
  std::optional<double> tol;
  int jobs = 0;  // 0 = available parallelism
};

// Flat key=value lines; '#' starts a comment. Top-level keys: command, output,
// seed, tol, jobs and sweep.{name,start,stop,points,scale,floor}.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

const std::vector<std::pair<std::string, std::string>>& command_table();
std::string list_commands();
std::size_t edit_distance(const std::string& a, const std::string& b);
// Closest known command, or empty when nothing is within distance 3.
std::string suggest_command(const std::string& name);

// Computes the CSV text for a config. Throws ConfigError or NumericError.
std::string run_to_csv(const RunConfig& config);

// Writes the CSV to config.output (or `out`) and returns the exit status;
// diagnostics go to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace erasure

#endif
