#include "mhc/adjacency.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Normal from region a into region b fitted on the pixel block straddling
// the edge between pixels p (label a or b) and q = p + step.
double fit_normal(const LabelGrid& labels, int px, int py, int sx, int sy, int a, int b) {
  const double cx = px + 0.5 * sx;
  const double cy = py + 0.5 * sy;
  const int x0 = px - 1, x1 = px + 1 + sx;
  const int y0 = py - 1, y1 = py + 1 + sy;
  double vx = 0.0, vy = 0.0;
  for (int y = std::max(y0, 0); y <= std::min<int>(y1, static_cast<int>(labels.rows()) - 1); ++y)
    for (int x = std::max(x0, 0); x <= std::min<int>(x1, static_cast<int>(labels.cols()) - 1); ++x) {
      const int l = labels(y, x);
      const double s = l == b ? 1.0 : (l == a ? -1.0 : 0.0);
      vx += s * (x - cx);
      vy += s * (y - cy);
    }
  // Axis normal from the pixel labelled a to the one labelled b.
  const double sign = labels(py, px) == a ? 1.0 : -1.0;
  const double ax = sign * sx, ay = sign * sy;
  if (vx * ax + vy * ay <= 0.0) {
    vx = ax;
    vy = ay;
  }
  return quantize_angle(std::atan2(vy, vx));
}

}  // namespace

double quantize_angle(double theta) {
  constexpr double step = std::numbers::pi / 4.0;
  long k = std::lround(theta / step) % 8;
  if (k < 0) k += 8;
  return static_cast<double>(k) * step;
}

std::optional<int> RegionGraph::edge_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  const auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{a, b},
                                   [](const RegionEdge& e, const std::pair<int, int>& k) {
                                     return std::pair{e.a, e.b} < k;
                                   });
  if (it == edges.end() || it->a != a || it->b != b) return std::nullopt;
  return static_cast<int>(it - edges.begin());
}

RegionGraph build_graph(const LabelMap& leaves, int image) {
  RegionGraph g;
  g.image = image;
  g.region_count = leaves.region_count();
  const LabelGrid& labels = leaves.grid();
  const int w = leaves.width();
  const int h = leaves.height();
  std::map<std::pair<int, int>, std::vector<int>> by_pair;
  auto add = [&](int px, int py, int sx, int sy) {
    const int l0 = labels(py, px);
    const int l1 = labels(py + sy, px + sx);
    if (l0 == l1) return;
    const int a = std::min(l0, l1), b = std::max(l0, l1);
    ContourElement e;
    e.image = image;
    e.x = px + 0.5 * sx;
    e.y = py + 0.5 * sy;
    e.region_a = a;
    e.region_b = b;
    e.theta = fit_normal(labels, px, py, sx, sy, a, b);
    by_pair[{a, b}].push_back(static_cast<int>(g.elements.size()));
    g.elements.push_back(e);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) add(x, y, 1, 0);
      if (y + 1 < h) add(x, y, 0, 1);
    }
  g.edges.reserve(by_pair.size());
  for (auto& [key, elems] : by_pair) {
    RegionEdge e;
    e.a = key.first;
    e.b = key.second;
    e.length = static_cast<int>(elems.size());
    e.elements = std::move(elems);
    g.edges.push_back(std::move(e));
  }
  return g;
}

BoundaryVariableSet::BoundaryVariableSet(std::vector<int> region_counts, std::vector<BoundaryVariable> variables)
    : region_counts_(std::move(region_counts)), vars_(std::move(variables)) {
  node_offsets_.assign(region_counts_.size() + 1, 0);
  for (std::size_t i = 0; i < region_counts_.size(); ++i)
    node_offsets_[i + 1] = node_offsets_[i] + region_counts_[i];
  intra_ids_.assign(region_counts_.size(), {});
  index_.reserve(vars_.size());
  for (int id = 0; id < size(); ++id) {
    const auto& v = vars_[static_cast<std::size_t>(id)];
    if (!(v.a < v.b))
      throw Error(ErrorKind::internal, "adjacency", "variable_set", "variable endpoints not ordered");
    const bool fresh = index_.emplace(key(global_node(v.a), global_node(v.b)), id).second;
    if (!fresh) throw Error(ErrorKind::internal, "adjacency", "variable_set", "duplicate variable");
    if (v.kind == VarKind::intra)
      intra_ids_[static_cast<std::size_t>(v.a.image)].push_back(id);
    else
      inter_ids_.push_back(id);
  }
}

NodeRef BoundaryVariableSet::node(int global) const {
  const auto it = std::upper_bound(node_offsets_.begin(), node_offsets_.end(), global);
  const int image = static_cast<int>(it - node_offsets_.begin()) - 1;
  return {image, global - node_offsets_[static_cast<std::size_t>(image)]};
}

std::optional<int> BoundaryVariableSet::find(NodeRef u, NodeRef v) const {
  if (v < u) std::swap(u, v);
  if (u.image < 0 || v.image >= image_count()) return std::nullopt;
  const auto it = index_.find(key(global_node(u), global_node(v)));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

BoundaryVariableSet enumerate_variables(std::span<const RegionGraph> graphs, double window) {
  if (graphs.empty())
    throw Error(ErrorKind::input, "adjacency", "enumerate_variables", "no images");
  if (!(window > 0.0))
    throw Error(ErrorKind::config, "adjacency", "enumerate_variables", "window must be positive");
  std::vector<int> counts;
  std::vector<BoundaryVariable> vars;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    counts.push_back(graphs[i].region_count);
    for (const auto& e : graphs[i].edges) {
      BoundaryVariable v;
      v.a = {static_cast<int>(i), e.a};
      v.b = {static_cast<int>(i), e.b};
      v.kind = VarKind::intra;
      v.alpha = e.length;
      vars.push_back(v);
    }
  }
  for (std::size_t i = 0; i < graphs.size(); ++i)
    for (std::size_t j = i + 1; j < graphs.size(); ++j) {
      const auto& gi = graphs[i];
      const auto& gj = graphs[j];
      std::vector<char> pairs(static_cast<std::size_t>(gi.region_count) * gj.region_count, 0);
      for_each_close_element_pair(gi, gj, window, [&](int u, int v, double) {
        const auto& eu = gi.elements[static_cast<std::size_t>(u)];
        const auto& ev = gj.elements[static_cast<std::size_t>(v)];
        for (const int m : {eu.region_a, eu.region_b})
          for (const int n : {ev.region_a, ev.region_b})
            pairs[static_cast<std::size_t>(m) * gj.region_count + n] = 1;
      });
      for (int m = 0; m < gi.region_count; ++m)
        for (int n = 0; n < gj.region_count; ++n)
          if (pairs[static_cast<std::size_t>(m) * gj.region_count + n]) {
            BoundaryVariable v;
            v.a = {static_cast<int>(i), m};
            v.b = {static_cast<int>(j), n};
            v.kind = VarKind::inter;
            vars.push_back(v);
          }
    }
  return BoundaryVariableSet(std::move(counts), std::move(vars));
}

}  // namespace mhc
