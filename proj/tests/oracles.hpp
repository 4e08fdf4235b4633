#pragma once

// Test fixtures and independent reference computations. Nothing here calls
// into the code under test except for plain data types.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "mhc/adjacency.hpp"
#include "mhc/hierarchy.hpp"
#include "mhc/raster.hpp"

namespace oracle {

using mhc::Hierarchy;
using mhc::LabelGrid;
using mhc::LabelMap;
using mhc::Merge;

// Four regions laid out so that their adjacency is 1-2, 1-3, 2-3, 2-4, 3-4
// (labels 0..3 here):
//   0 0 1 1
//   0 0 1 1
//   2 2 2 3
//   2 2 2 3
inline LabelGrid four_region_grid() {
  LabelGrid g(4, 4);
  g << 0, 0, 1, 1,
       0, 0, 1, 1,
       2, 2, 2, 3,
       2, 2, 2, 3;
  return g;
}

inline LabelMap four_region_leaves() { return LabelMap::from_grid(four_region_grid()); }

// (0,1) -> 4, (2,3) -> 5, (4,5) -> 6.
inline Hierarchy four_region_hierarchy() { return Hierarchy(4, {{0, 1, 4}, {2, 3, 5}, {4, 5, 6}}); }

// Image where leaves {0,1} share one color and {2,3} another.
inline mhc::Image four_region_image() {
  const LabelGrid g = four_region_grid();
  mhc::Image img(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img.set(x, y, g(y, x) < 2 ? mhc::Rgb{200, 40, 40} : mhc::Rgb{40, 40, 200});
  return img;
}

// Every tree cut of `h`, as sets of node ids.
inline std::vector<std::vector<int>> all_cuts(const Hierarchy& h, int node) {
  if (h.is_leaf(node)) return {{node}};
  int a = -1, b = -1;
  for (const auto& m : h.merges())
    if (m.parent == node) {
      a = m.child_a;
      b = m.child_b;
    }
  std::vector<std::vector<int>> out{{node}};
  for (const auto& ca : all_cuts(h, a))
    for (const auto& cb : all_cuts(h, b)) {
      auto u = ca;
      u.insert(u.end(), cb.begin(), cb.end());
      std::sort(u.begin(), u.end());
      out.push_back(u);
    }
  return out;
}

// Leaf -> owning node of `cut`.
inline std::vector<int> owner(const Hierarchy& h, const std::vector<int>& cut) {
  std::vector<int> own(static_cast<std::size_t>(h.leaf_count()), -1);
  std::vector<std::vector<int>> below(static_cast<std::size_t>(h.node_count()));
  for (int l = 0; l < h.leaf_count(); ++l) below[static_cast<std::size_t>(l)] = {l};
  for (const auto& m : h.merges()) {
    auto& p = below[static_cast<std::size_t>(m.parent)];
    p = below[static_cast<std::size_t>(m.child_a)];
    p.insert(p.end(), below[static_cast<std::size_t>(m.child_b)].begin(), below[static_cast<std::size_t>(m.child_b)].end());
  }
  for (const int n : cut)
    for (const int l : below[static_cast<std::size_t>(n)]) own[static_cast<std::size_t>(l)] = n;
  return own;
}

// Intra encoding of a cut over the intra variables of `image`, in id order.
inline std::vector<std::uint8_t> encode(const Hierarchy& h, const mhc::BoundaryVariableSet& vars, int image,
                                        const std::vector<int>& cut) {
  const auto own = owner(h, cut);
  std::vector<std::uint8_t> out;
  for (const int id : vars.intra_ids(image))
    out.push_back(own[static_cast<std::size_t>(vars[id].a.region)] != own[static_cast<std::size_t>(vars[id].b.region)]);
  return out;
}

// Random grid partition with exactly `regions` 4-connected regions grown
// from random seeds, then a random binary tree merging adjacent regions.
struct RandomTree {
  LabelMap leaves;
  Hierarchy h;
};

inline RandomTree random_tree(std::mt19937& rng, int regions, int size = 6) {
  for (;;) {
    LabelGrid g = LabelGrid::Constant(size, size, -1);
    std::vector<std::pair<int, int>> frontier;
    for (int r = 0; r < regions; ++r) {
      int x, y;
      do {
        x = static_cast<int>(rng() % static_cast<unsigned>(size));
        y = static_cast<int>(rng() % static_cast<unsigned>(size));
      } while (g(y, x) >= 0);
      g(y, x) = r;
      frontier.push_back({x, y});
    }
    while (!frontier.empty()) {
      const auto k = rng() % frontier.size();
      const auto [x, y] = frontier[k];
      const std::array<std::pair<int, int>, 4> nb{{{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}}};
      bool grew = false;
      for (const auto& [nx, ny] : nb)
        if (nx >= 0 && ny >= 0 && nx < size && ny < size && g(ny, nx) < 0) {
          g(ny, nx) = g(y, x);
          frontier.push_back({nx, ny});
          grew = true;
          break;
        }
      if (!grew) frontier.erase(frontier.begin() + static_cast<long>(k));
    }
    LabelMap leaves = LabelMap::from_grid(g);
    if (leaves.region_count() != regions) continue;

    // Leaf adjacency, then random merges of adjacent current nodes.
    std::set<std::pair<int, int>> adj;
    const auto& lg = leaves.grid();
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        if (x + 1 < size && lg(y, x) != lg(y, x + 1)) adj.insert(std::minmax(lg(y, x), lg(y, x + 1)));
        if (y + 1 < size && lg(y, x) != lg(y + 1, x)) adj.insert(std::minmax(lg(y, x), lg(y + 1, x)));
      }
    std::vector<int> node_of(static_cast<std::size_t>(regions));
    for (int l = 0; l < regions; ++l) node_of[static_cast<std::size_t>(l)] = l;
    std::vector<Merge> merges;
    int next = regions;
    while (next < 2 * regions - 1) {
      std::vector<std::pair<int, int>> cand;
      for (const auto& [a, b] : adj) {
        const int na = node_of[static_cast<std::size_t>(a)], nb = node_of[static_cast<std::size_t>(b)];
        if (na != nb) cand.push_back(std::minmax(na, nb));
      }
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      const auto [a, b] = cand[rng() % cand.size()];
      merges.push_back({a, b, next});
      for (auto& n : node_of)
        if (n == a || n == b) n = next;
      ++next;
    }
    return {std::move(leaves), Hierarchy(regions, merges)};
  }
}

// 3-cliques of the variable graph with at least two images involved, as
// sorted triples of global node ids.
inline std::set<std::array<int, 3>> mixed_cliques(const mhc::BoundaryVariableSet& vars) {
  std::set<std::array<int, 3>> out;
  const int n = vars.node_count();
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  for (const auto& v : vars.variables()) {
    const int a = vars.global_node(v.a), b = vars.global_node(v.b);
    adj[static_cast<std::size_t>(a)].insert(b);
    adj[static_cast<std::size_t>(b)].insert(a);
  }
  for (int a = 0; a < n; ++a)
    for (const int b : adj[static_cast<std::size_t>(a)]) {
      if (b <= a) continue;
      for (const int c : adj[static_cast<std::size_t>(b)]) {
        if (c <= b || !adj[static_cast<std::size_t>(a)].count(c)) continue;
        const int ia = vars.node(a).image, ib = vars.node(b).image, ic = vars.node(c).image;
        if (ia == ib && ib == ic) continue;
        out.insert({a, b, c});
      }
    }
  return out;
}

// Direct 2D Gaussian convolution with clamped borders (radius ceil(3 sigma)).
inline mhc::Plane smooth_2d(const mhc::Plane& p, double sigma) {
  if (sigma <= 0.0) return p;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  const auto h = static_cast<int>(p.rows()), w = static_cast<int>(p.cols());
  double norm = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) norm += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  mhc::Plane out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = std::clamp(y + dy, 0, h - 1), xx = std::clamp(x + dx, 0, w - 1);
          s += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) * p(yy, xx);
        }
      out(y, x) = s / norm;
    }
  return out;
}

// Centered finite differences with clamped borders.
inline std::pair<mhc::Plane, mhc::Plane> finite_differences(const mhc::Plane& p) {
  const auto h = static_cast<int>(p.rows()), w = static_cast<int>(p.cols());
  mhc::Plane gx(h, w), gy(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      gx(y, x) = (p(y, std::min(x + 1, w - 1)) - p(y, std::max(x - 1, 0))) / 2.0;
      gy(y, x) = (p(std::min(y + 1, h - 1), x) - p(std::max(y - 1, 0), x)) / 2.0;
    }
  return {gx, gy};
}

// Distance from (x, y) to the nearest set pixel of `m`; infinity if none.
inline double nearest(const mhc::Mask& m, int x, int y) {
  double best = INFINITY;
  for (int yy = 0; yy < m.rows(); ++yy)
    for (int xx = 0; xx < m.cols(); ++xx)
      if (m(yy, xx)) best = std::min(best, std::hypot(xx - x, yy - y));
  return best;
}

inline mhc::Image random_image(std::mt19937& rng, int w, int h) {
  mhc::Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set(x, y, {static_cast<std::uint8_t>(rng() & 255), static_cast<std::uint8_t>(rng() & 255),
                     static_cast<std::uint8_t>(rng() & 255)});
  return img;
}

}  // namespace oracle
