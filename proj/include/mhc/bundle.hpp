#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mhc/pipeline.hpp"

namespace mhc {

/// Solution bundle on disk:
///   manifest.json
///   clusters/level_XX/frame_YYY.{csv,png}
///   correspondence.csv   (frame, leaf, cluster, level)
struct Bundle {
  std::vector<Level> schedule;
  int width = 0;
  int height = 0;
  /// labels[frame][level]; an empty grid marks a missing level.
  std::vector<std::vector<LabelGrid>> labels;
  /// leaf_cluster[frame][level][leaf].
  std::vector<std::vector<std::vector<int>>> leaf_cluster;
  std::vector<std::vector<std::string>> notes;
  std::string command;

  int frame_count() const noexcept { return static_cast<int>(labels.size()); }
  int level_count() const noexcept { return static_cast<int>(schedule.size()); }
};

Bundle make_bundle(const VideoSolution& video, std::string command);
Bundle make_bundle(const std::vector<LevelSolution>& levels, int frame_count, std::string command);

/// Records files as they are written and deletes them (and directories it
/// created) on rollback unless committed.
class OutputTracker {
 public:
  OutputTracker() = default;
  OutputTracker(const OutputTracker&) = delete;
  OutputTracker& operator=(const OutputTracker&) = delete;
  ~OutputTracker();

  void file(const std::filesystem::path& p) { files_.push_back(p); }
  /// Creates `dir` (and parents), remembering which ones are new.
  void directory(const std::filesystem::path& dir);
  void commit() noexcept { committed_ = true; }
  void rollback() noexcept;

 private:
  std::vector<std::filesystem::path> files_;
  std::vector<std::filesystem::path> dirs_;
  bool committed_ = false;
};

void write_bundle(const Bundle& bundle, const std::filesystem::path& dir, OutputTracker& out);
Bundle read_bundle(const std::filesystem::path& dir);

std::filesystem::path level_dir(const std::filesystem::path& dir, int level);
std::filesystem::path frame_stem(const std::filesystem::path& dir, int level, int frame);

/// Stable color for a cluster id.
Rgb palette(int cluster);
Image render_fill(const LabelGrid& labels);
/// `image` with cluster boundaries painted white.
Image render_overlay(const Image& image, const LabelGrid& labels);

}  // namespace mhc
