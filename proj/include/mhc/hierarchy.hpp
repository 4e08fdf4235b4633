#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"

#include "mhc/adjacency.hpp"
#include "mhc/raster.hpp"

namespace mhc {

struct Merge {
  int child_a = 0;
  int child_b = 0;
  int parent = 0;
  friend bool operator==(const Merge&, const Merge&) = default;
};

/// Binary partition tree over a leave partition. Leaves are nodes
/// 0..leaf_count-1; the k-th merge creates node leaf_count + k.
class Hierarchy {
 public:
  Hierarchy(int leaf_count, std::vector<Merge> merges);

  int leaf_count() const noexcept { return leaf_count_; }
  int node_count() const noexcept { return leaf_count_ + static_cast<int>(merges_.size()); }
  int root() const noexcept { return node_count() - 1; }
  std::span<const Merge> merges() const noexcept { return merges_; }
  bool is_leaf(int node) const noexcept { return node < leaf_count_; }
  int parent(int node) const { return parent_[static_cast<std::size_t>(node)]; }
  /// Children of an internal node.
  std::array<int, 2> children(int node) const;
  /// Leaves below `node`, ascending.
  const std::vector<int>& leaves_under(int node) const { return leaves_[static_cast<std::size_t>(node)]; }

  friend bool operator==(const Hierarchy& a, const Hierarchy& b) {
    return a.leaf_count_ == b.leaf_count_ && a.merges_ == b.merges_;
  }

 private:
  int leaf_count_;
  std::vector<Merge> merges_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> leaves_;
};

/// Set of nodes whose leaf sets partition the leaves, ascending.
struct TreeCut {
  std::vector<int> nodes;
  friend bool operator==(const TreeCut&, const TreeCut&) = default;
};

using Encoding = std::vector<std::uint8_t>;

/// Greedy merging of the adjacent pair with maximal Bhattacharyya
/// coefficient of 8-bin-per-channel RGB histograms; ties go to the smallest
/// (min id, max id) pair.
Hierarchy build_bpt(const Image& image, const LabelMap& leaves);

/// Intra assignment of `image` after `step` merges of the merging sequence,
/// ordered as vars.intra_ids(image).
Encoding merging_step_encoding(const Hierarchy& h, const BoundaryVariableSet& vars, int image, int step);

Encoding cut_to_encoding(const Hierarchy& h, const BoundaryVariableSet& vars, int image, const TreeCut& cut);

struct CutDecoding {
  bool accepted = false;
  TreeCut cut;
  /// Lowest node whose sibling constraints are violated when rejected.
  int witness = -1;
};

/// Inverse of cut_to_encoding; rejects assignments that are not tree cuts.
CutDecoding encoding_to_cut(const Hierarchy& h, const BoundaryVariableSet& vars, int image,
                            std::span<const std::uint8_t> assignment);

/// True if `cut` satisfies the TreeCut invariants for `h`.
bool is_valid_cut(const Hierarchy& h, const TreeCut& cut);

// {"leaf_count": N, "merges": [[a, b, p], ...]}. On import an entry may
// list more than two children before the parent; those are binarized by a
// left fold in listed order and nodes are renumbered consecutively.
nlohmann::json hierarchy_to_json(const Hierarchy& h);
Hierarchy hierarchy_from_json(const nlohmann::json& j);
Hierarchy load_hierarchy(const std::filesystem::path& path);
void save_hierarchy(const Hierarchy& h, const std::filesystem::path& path);

}  // namespace mhc
