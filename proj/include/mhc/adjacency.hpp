#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mhc/raster.hpp"

namespace mhc {

/// One pixel-edge unit of boundary between two 4-adjacent regions.
///
/// Pixel (x, y) has its center at (x, y); the element between (x, y) and
/// (x + 1, y) sits at (x + 0.5, y). `theta` is the normal pointing from
/// `region_a` into `region_b` (a < b) in image coordinates, x right and
/// y down, quantized to multiples of pi/4 in [0, 2pi).
struct ContourElement {
  int image = 0;
  double x = 0.0;
  double y = 0.0;
  int region_a = 0;
  int region_b = 0;
  double theta = 0.0;
};

struct RegionEdge {
  int a = 0;
  int b = 0;
  /// Shared boundary length in pixel edges.
  int length = 0;
  std::vector<int> elements;
};

/// Region adjacency graph of one leave partition plus its contour elements.
struct RegionGraph {
  int image = 0;
  int region_count = 0;
  std::vector<RegionEdge> edges;  // sorted by (a, b)
  std::vector<ContourElement> elements;  // row-major scan order

  std::optional<int> edge_index(int a, int b) const;
};

RegionGraph build_graph(const LabelMap& leaves, int image = 0);

/// Quantized outward normal direction used for element orientation.
double quantize_angle(double theta);

struct NodeRef {
  int image = 0;
  int region = 0;
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

enum class VarKind : std::uint8_t { intra, inter };

/// b_{m,n}: 1 keeps the boundary between two leaves active, 0 merges them.
struct BoundaryVariable {
  NodeRef a;  // a < b
  NodeRef b;
  VarKind kind = VarKind::intra;
  /// Shared boundary length for intra variables, 0 for inter.
  int alpha = 0;
};

/// Dense, deterministic indexing of all intra and inter boundary variables
/// of an image collection. Intra variables come first, image by image and
/// pair-lexicographic; then inter variables ordered by (image pair, pair).
class BoundaryVariableSet {
 public:
  BoundaryVariableSet() = default;
  BoundaryVariableSet(std::vector<int> region_counts, std::vector<BoundaryVariable> variables);

  int size() const noexcept { return static_cast<int>(vars_.size()); }
  const BoundaryVariable& operator[](int id) const { return vars_[static_cast<std::size_t>(id)]; }
  std::span<const BoundaryVariable> variables() const noexcept { return vars_; }

  int image_count() const noexcept { return static_cast<int>(region_counts_.size()); }
  int region_count(int image) const { return region_counts_[static_cast<std::size_t>(image)]; }
  int node_count() const noexcept { return node_offsets_.empty() ? 0 : node_offsets_.back(); }
  int global_node(NodeRef n) const { return node_offsets_[static_cast<std::size_t>(n.image)] + n.region; }
  NodeRef node(int global) const;

  std::optional<int> find(NodeRef u, NodeRef v) const;
  /// Ids of the intra variables of one image (contiguous, ascending).
  std::span<const int> intra_ids(int image) const { return intra_ids_[static_cast<std::size_t>(image)]; }
  std::span<const int> inter_ids() const noexcept { return inter_ids_; }

 private:
  static std::uint64_t key(int u, int v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) | static_cast<std::uint32_t>(v);
  }
  std::vector<int> region_counts_;
  std::vector<int> node_offsets_;
  std::vector<BoundaryVariable> vars_;
  std::unordered_map<std::uint64_t, int> index_;
  std::vector<std::vector<int>> intra_ids_;
  std::vector<int> inter_ids_;
};

/// Enumerates variables over per-image graphs. An inter variable links
/// (i, m) and (j, n), i != j, iff some element of m and some element of n
/// are strictly closer than `window` pixels.
BoundaryVariableSet enumerate_variables(std::span<const RegionGraph> graphs, double window);

/// Visits every element pair (u in gi, v in gj) with Euclidean distance
/// strictly below `window`, u ascending and v ascending within each u.
template <typename Visitor>
void for_each_close_element_pair(const RegionGraph& gi, const RegionGraph& gj, double window,
                                 Visitor&& visit);

}  // namespace mhc

#include "mhc/adjacency_inl.hpp"
