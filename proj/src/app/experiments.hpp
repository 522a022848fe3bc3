#pragma once

// Named experiments driven by JSON config documents. Results are computed in
// memory first; files are only written once every sweep point has succeeded.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "app/config.hpp"
#include "core/error.hpp"

namespace oampump::app {

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Header row plus one line per row, 12 significant digits.
  std::string to_csv() const;
};

struct ExperimentOutput {
  json summary;
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
};

const std::vector<std::string>& experiment_names();
bool is_stochastic(const std::string& experiment);
const Schema& experiment_schema(const std::string& experiment);

/// Validates the config and runs every sweep point. `seed` overrides the
/// config's seed. Throws Error.
ExperimentOutput run_experiment(const std::string& experiment, const json& config,
                                std::optional<std::uint64_t> seed = std::nullopt);

/// Creates `dir` if needed and writes all files plus summary.json.
void write_output(const ExperimentOutput& out, const std::string& dir);

/// 0 success, 2 config error, 3 numerical failure.
int exit_code(ErrorCode code);

}  // namespace oampump::app
