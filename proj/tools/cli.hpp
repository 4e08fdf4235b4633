#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mhc/pipeline.hpp"

namespace mhc::cli {

struct RunConfig {
  std::vector<std::filesystem::path> frames;
  /// Empty entries (or an empty list) fall back to square blocks.
  std::vector<std::filesystem::path> leaves;
  std::vector<std::filesystem::path> hierarchies;
  std::vector<std::filesystem::path> ground_truth;

  int levels = 30;
  double t_max = 0.4;
  double t_min = 0.1;
  double beta = 0.1;
  /// Single level for `cocluster`; the first schedule level otherwise.
  std::optional<Level> level;

  PipelineConfig pipeline;
  std::filesystem::path output = "out";
  std::filesystem::path bundle;
  /// Ground-truth label counted as background; -1 for none.
  int gt_background = 0;
  double boundary_tolerance = 2.0;
  int block = 8;

  std::string fixture = "two_rectangles";
  std::uint32_t seed = 7;
  int frame_count = 6;
};

/// Relative paths are resolved against `base`. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base);
void validate(const RunConfig& config);
std::vector<Level> schedule_of(const RunConfig& config);

/// Leave partition of square `block`-pixel tiles.
LabelMap block_leaves(int width, int height, int block);

/// Runs one command line (without the program name). Returns the exit
/// status and prints errors to stderr.
int run(const std::vector<std::string>& args);

}  // namespace mhc::cli
