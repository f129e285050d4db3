#pragma once

#include "mhd/scheme.hpp"

#include <filesystem>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mhd::cli
{

enum class Command
{
  Run,
  MmsSpatial,
  MmsTemporal,
  Stability,
  Infsup,
};

std::string command_name(Command c);

/// Initial and source data of the `run` command. Both start from the
/// manufactured solution; `decay` drops every source and boundary datum.
enum class Problem
{
  Mms,
  Decay,
};

struct RunConfig
{
  Command command = Command::Run;
  Problem problem = Problem::Mms;
  double re = 1.0;
  double rm = 1.0;
  double s = 1.0;
  double tau = 0.01;
  double t_final = 0.1;
  int n = 4;
  std::filesystem::path out = "out";
  /// Snapshot every k steps, 0 disables VTK output.
  int vtk_every = 0;
  SolverOptions solver;
  /// Study grids; empty means the study defaults.
  std::vector<int> meshes;
  std::vector<int> step_divisors;

  /// Canonical keys given explicitly by the file or a flag.
  std::set<std::string> explicit_keys;
  std::vector<std::string> warnings;

  bool is_set(const std::string& key) const { return explicit_keys.count(key) != 0; }
  SchemeParams scheme_params() const;
};

/// Malformed or invalid configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key))
  {
  }
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

/// Canonical spelling of a key: lower case, '-' separators, aliases resolved.
/// Unknown keys raise ConfigError.
std::string canonical_key(const std::string& key);

/// Sets one key from its textual value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Reads `key = value` lines; '#' starts a comment.
void read_config(RunConfig& config, std::istream& in);
void read_config_file(RunConfig& config, const std::filesystem::path& path);

/// Checks ranges, records warnings (S = 0) and makes sure the output
/// directory can be written.
void validate(RunConfig& config);

/// Config file (if --config is given) overridden by flags. Throws
/// ConfigError; --help is reported through CLI11's CallForHelp.
RunConfig parse_config(const std::vector<std::string>& args);

/// Executes a validated config. Returns the exit code: 0 success, 1 failed
/// acceptance gate, 3 solver failure.
int run_command(const RunConfig& config, std::ostream& log);

/// Full front end: parse, validate, run. Exit code 2 on configuration errors.
int main_entry(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

/// Legacy VTK 3.0 ASCII unstructured grid of the mesh: u and p sampled at
/// the vertices, cell averages of B and E and the cell divergence of B.
void write_vtu(const MHDState& state, const std::filesystem::path& path);

/// Snapshot file name of a step, e.g. state_000005.vtk.
std::string snapshot_name(int step);

} // namespace mhd::cli
