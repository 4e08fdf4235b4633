#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mhc/constraints.hpp"
#include "mhc/descriptors.hpp"
#include "mhc/hierarchy.hpp"
#include "mhc/solver.hpp"

namespace mhc {

struct FrameInput {
  Image image;
  LabelMap leaves;
  /// Built with build_bpt when absent.
  std::optional<Hierarchy> hierarchy;
};

struct PipelineConfig {
  DescriptorConfig descriptors;
  BandWeighting weighting = BandWeighting::length;
  SolverConfig solver;
};

struct Level {
  double t = 1.0;
  double beta = 1.0;
};

/// `levels` values of T linear from t_max down to t_min, shared beta.
std::vector<Level> linear_schedule(int levels, double t_max, double t_min, double beta);

/// Cluster id of every leaf, per image.
using LeafClusters = std::vector<std::vector<int>>;

/// Connected components of the b = 0 graph, ids ranked by the smallest
/// (image, leaf) they contain.
LeafClusters extract_clusters(const BoundaryVariableSet& vars, std::span<const std::uint8_t> assignment);

/// Paints leaf cluster ids onto the pixel grid.
LabelGrid paint(const LabelMap& leaves, std::span<const int> leaf_cluster);

/// One solved level over a set of images.
struct LevelSolution {
  Level level;
  /// False when the band admits no tree cut (or the solver gave up); the
  /// remaining fields are then empty.
  bool feasible = false;
  bool optimal = false;
  std::string note;
  LeafClusters leaf_cluster;
  std::vector<LabelGrid> labels;
  std::vector<std::uint8_t> assignment;
  double objective = 0.0;
  std::vector<Band> bands;
  /// Branch-and-bound nodes over all cycle-cut rounds.
  long nodes = 0;
  int cut_rounds = 0;
};

/// Variables, affinities and the level-independent constraints of a joint
/// problem over several images.
class CoClusterProblem {
 public:
  /// `hierarchies[i]` null skips intra constraints of image i.
  CoClusterProblem(std::span<const Image* const> images, std::span<const LabelMap* const> leaves,
                   std::span<const Hierarchy* const> hierarchies, const PipelineConfig& config);

  const BoundaryVariableSet& variables() const noexcept { return vars_; }
  const AffinityMatrix& affinity() const noexcept { return affinity_; }
  const std::vector<LinearConstraint>& base_constraints() const noexcept { return base_; }
  const std::vector<RegionGraph>& graphs() const noexcept { return graphs_; }

  void add_constraints(std::span<const LinearConstraint> extra);

  /// Solves with band constraints at `level` on `band_images` (all images
  /// when empty).
  LevelSolution solve(const Level& level, std::span<const int> band_images = {}) const;

  /// LP for one level, without the lazily added cycle cuts.
  LpProblem problem(const Level& level, std::span<const int> band_images = {}) const;

 private:
  const PipelineConfig config_;
  std::vector<const LabelMap*> leaves_;
  std::vector<const Hierarchy*> hierarchies_;
  std::vector<RegionGraph> graphs_;
  BoundaryVariableSet vars_;
  AffinityMatrix affinity_;
  std::vector<LinearConstraint> base_;
};

LevelSolution cocluster(std::span<const FrameInput> frames, const Level& level, const PipelineConfig& config);
std::vector<LevelSolution> multiresolution(std::span<const FrameInput> frames, std::span<const Level> schedule,
                                           const PipelineConfig& config);

/// Per frame, per level cluster maps with temporally persistent ids.
struct VideoSolution {
  std::vector<Level> schedule;
  /// labels[frame][level]; empty grid when the level is missing.
  std::vector<std::vector<LabelGrid>> labels;
  /// leaf_cluster[frame][level][leaf].
  std::vector<std::vector<std::vector<int>>> leaf_cluster;
  std::vector<std::vector<std::string>> notes;
};

/// Hooks into the video loop. `published` fires once frame `frame` is
/// final; `solved` fires after every per-level solve of the step that
/// publishes `frame`.
struct VideoObserver {
  std::function<void(int frame, const VideoSolution&)> published;
  std::function<void(int frame, int level, const CoClusterProblem&, const LevelSolution&)> solved;
};

VideoSolution video_segment(std::span<const FrameInput> frames, std::span<const Level> schedule,
                            const PipelineConfig& config, const VideoObserver& observer = {});

}  // namespace mhc
