#pragma once

// Command-line front end. A run is (subcommand, resolved JSON config); the
// resolved config is snapshotted into manifest.json next to the outputs so
// `lagspec replay` can reproduce it exactly.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lagspec/experiments.hpp"

namespace lagspec::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr const char* kEnvPrefix = "LAGSPEC_";

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitAssertion = 2,  // a scientific check failed; outputs are still written
  kExitConfig = 3,
  kExitNumeric = 4,
  kExitIo = 5,
};

using EnvMap = std::map<std::string, std::string>;

const std::vector<std::string>& subcommands();

// LAGSPEC_* variables from the process environment.
EnvMap process_env();

// "a.b=v" -> doc["a"]["b"] = v. v is parsed as JSON when possible and kept
// as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// LAGSPEC_A__B=v behaves like --set a.b=v (names lower-cased).
void apply_env(nlohmann::json& doc, const EnvMap& env);

// Throws ConfigError listing every key the schema does not know.
void check_schema(const nlohmann::json& doc);

// Typed view of the config for the sampling subcommands. Throws ConfigError
// naming missing or mistyped keys.
ExperimentConfig experiment_config(const nlohmann::json& doc, const std::string& subcommand);

struct RunOptions {
  std::string subcommand;
  std::optional<std::filesystem::path> config_file;
  std::vector<std::string> overrides;
  std::optional<std::filesystem::path> output;
  std::optional<unsigned> threads;
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path output_dir;
  std::vector<std::string> outputs;  // file names inside output_dir
};

// Resolves the config (file < environment < --set), runs the subcommand and
// writes outputs plus manifest.json. Throws the lagspec error types.
RunResult run(const RunOptions& options, const EnvMap& env, std::ostream& out, std::ostream& err);

// Re-runs a manifest's subcommand on its config snapshot; the environment is
// ignored so the snapshot is the only input.
RunResult replay(const std::filesystem::path& manifest, std::optional<std::filesystem::path> output,
                 std::optional<unsigned> threads, std::ostream& out, std::ostream& err);

// Full argv handling with exit-code mapping.
int main_entry(int argc, const char* const* argv, const EnvMap& env, std::ostream& out,
               std::ostream& err);

}  // namespace lagspec::cli
