#pragma once

// Config parsing and the command implementations behind the `bdqsd` tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdqsd/model.hpp"

namespace bdqsd {

struct RunConfig {
  ModelSpec spec;              ///< K is the first entry of K_list
  std::vector<double> K_list;  ///< a scalar K gives one entry
  bool K_is_list = false;
  nlohmann::json options = nlohmann::json::object();
  std::string input_sha1;  ///< git blob hash of the config bytes
};

/// Parses and schema-checks a config document.  Throws ConfigError.
RunConfig parse_config(const std::string& text);
nlohmann::json config_to_json(const RunConfig& config);

/// git-style object id: sha1("blob <len>\0" + content).
std::string git_blob_sha1(const std::string& content);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 1;
  bool oracle = false;
  int threads = 1;
};

// Each returns the process exit code: 0 ok, 1 failure, 2 schema error.
int cmd_validate(const RunConfig& config, const RunOptions& options, std::ostream& log);
int cmd_analyze(const RunConfig& config, const RunOptions& options, std::ostream& log);
int cmd_sweep(const RunConfig& config, const RunOptions& options, std::ostream& log);
int cmd_simulate(const RunConfig& config, const RunOptions& options, std::ostream& log);
int cmd_yaglom(const RunConfig& config, const RunOptions& options, std::ostream& log);

/// Reads the config file and dispatches; maps exceptions to exit codes.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const RunOptions& options, std::ostream& log);

/// "{:.17g}" for finite values, "nan"/"inf"/"-inf" otherwise.
std::string format_double(double x);

}  // namespace bdqsd
