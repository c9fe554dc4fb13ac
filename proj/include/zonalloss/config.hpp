#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zonalloss/study.hpp"

namespace zonalloss {

/// Settings shared by the study and rmse commands. Read from a JSON config file;
/// command-line options override file values.
struct RunConfig {
  std::vector<ScenarioId> scenarios{std::begin(kAllScenarios), std::end(kAllScenarios)};
  double segment_mw = 60.0;
  StudyConfig study;
  std::filesystem::path output_dir = "out";
};

/// Keys: scenarios, segment_mw, workers, absolute_gap, integrality_tol, node_limit,
/// output_dir. Unknown keys are rejected. Throws ParseError.
RunConfig read_config(const std::filesystem::path& file);

/// Name of the environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "ZONALLOSS_OUTPUT_DIR";

/// Explicit option, else the environment override, else the configured directory.
std::filesystem::path output_directory(const RunConfig& config, const std::string& explicit_dir = {});

std::vector<ScenarioId> parse_scenario_list(const std::string& csv);
std::vector<double> parse_number_list(const std::string& csv);

}  // namespace zonalloss
