#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "mhc/adjacency.hpp"
#include "oracles.hpp"

using namespace mhc;

namespace {

constexpr double kPi = std::numbers::pi;

LabelMap random_map(std::mt19937& rng, int w, int h, int labels) {
  LabelGrid g(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) g(y, x) = static_cast<int>(rng() % static_cast<unsigned>(labels));
  return LabelMap::from_grid(g);
}

// Leaves with their region ids shifted by (dx, dy) pixels on a larger grid.
LabelMap shifted(const LabelMap& m, int dx, int dy, int w, int h) {
  LabelGrid g = LabelGrid::Constant(h, w, 0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) g(y + dy, x + dx) = m(x, y) + 1;
  return LabelMap::from_grid(g);
}

}  // namespace

TEST_SUITE("adjacency") {

TEST_CASE("two horizontal bands") {
  LabelGrid g(2, 2);
  g << 0, 0,
       1, 1;
  const auto graph = build_graph(LabelMap::from_grid(g));
  REQUIRE(graph.edges.size() == 1);
  CHECK(graph.edges[0].a == 0);
  CHECK(graph.edges[0].b == 1);
  CHECK(graph.edges[0].length == 2);
  REQUIRE(graph.elements.size() == 2);
  for (const auto& e : graph.elements) CHECK(e.theta == doctest::Approx(kPi / 2));
  CHECK(graph.elements[0].x == 0.0);
  CHECK(graph.elements[0].y == 0.5);
}

TEST_CASE("normal points from lower into higher id") {
  LabelGrid g(2, 2);
  g << 1, 0,
       1, 0;
  // Relabeled in scan order: left column 0, right column 1.
  const auto graph = build_graph(LabelMap::from_grid(g));
  REQUIRE(graph.elements.size() == 2);
  for (const auto& e : graph.elements) CHECK(e.theta == doctest::Approx(0.0));

  LabelGrid v(1, 3);
  v << 0, 1, 0;
  const auto m = LabelMap::from_grid(v);  // 0, 1, 2
  const auto gv = build_graph(m);
  REQUIRE(gv.elements.size() == 2);
  CHECK(gv.elements[0].theta == doctest::Approx(0.0));
  // Between regions 1 (left) and 2 (right): still 0 as 1 < 2.
  CHECK(gv.elements[1].theta == doctest::Approx(0.0));
}

TEST_CASE("single region has no edges") {
  const auto graph = build_graph(LabelMap::from_grid(LabelGrid::Zero(4, 5)));
  CHECK(graph.edges.empty());
  CHECK(graph.elements.empty());
}

TEST_CASE("four-region layout edge set") {
  const auto graph = build_graph(oracle::four_region_leaves());
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : graph.edges) edges.push_back({e.a, e.b});
  CHECK(edges == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
  CHECK(graph.edge_index(2, 1) == 2);
  CHECK_FALSE(graph.edge_index(0, 3).has_value());
}

TEST_CASE("quantize_angle wraps into [0, 2pi)") {
  CHECK(quantize_angle(-kPi / 2) == doctest::Approx(3 * kPi / 2));
  CHECK(quantize_angle(2 * kPi) == doctest::Approx(0.0));
  CHECK(quantize_angle(0.5) == doctest::Approx(kPi / 4));
  CHECK(quantize_angle(0.1) == doctest::Approx(0.0));
}

TEST_CASE("elements equal differing neighbor pairs, lengths add up") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 2 + static_cast<int>(rng() % 10), h = 2 + static_cast<int>(rng() % 10);
    const auto m = random_map(rng, w, h, 2 + static_cast<int>(rng() % 4));
    int differing = 0;
    std::set<std::pair<int, int>> pairs;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (x + 1 < w && m(x, y) != m(x + 1, y)) {
          ++differing;
          pairs.insert(std::minmax(m(x, y), m(x + 1, y)));
        }
        if (y + 1 < h && m(x, y) != m(x, y + 1)) {
          ++differing;
          pairs.insert(std::minmax(m(x, y), m(x, y + 1)));
        }
      }
    const auto g = build_graph(m);
    CHECK(static_cast<int>(g.elements.size()) == differing);
    CHECK(g.edges.size() == pairs.size());
    int total = 0;
    for (const auto& e : g.edges) {
      total += e.length;
      CHECK(e.length == static_cast<int>(e.elements.size()));
      for (const int id : e.elements) {
        const auto& el = g.elements[static_cast<std::size_t>(id)];
        CHECK(el.region_a == e.a);
        CHECK(el.region_b == e.b);
        CHECK(el.theta >= 0.0);
        CHECK(el.theta < 2 * kPi);
      }
    }
    CHECK(total == differing);

    const std::vector<RegionGraph> gs{g};
    const auto vars = enumerate_variables(gs, 20.0);
    CHECK(vars.inter_ids().empty());
    CHECK(vars.size() == static_cast<int>(pairs.size()));
    CHECK(vars.size() <= 3 * m.region_count());
    int alpha = 0;
    for (const auto& v : vars.variables()) alpha += v.alpha;
    CHECK(alpha == differing);
  }
}

TEST_CASE("inter candidacy matches brute-force element distances") {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m0 = random_map(rng, 9, 9, 3);
    const auto m1 = random_map(rng, 9, 9, 3);
    const std::vector<RegionGraph> gs{build_graph(m0, 0), build_graph(m1, 1)};
    const double window = 1.0 + static_cast<double>(rng() % 6);
    const auto vars = enumerate_variables(gs, window);

    std::set<std::pair<int, int>> expect;
    for (const auto& u : gs[0].elements)
      for (const auto& v : gs[1].elements)
        if (std::hypot(u.x - v.x, u.y - v.y) < window) {
          expect.insert({u.region_a, v.region_a});
          expect.insert({u.region_a, v.region_b});
          expect.insert({u.region_b, v.region_a});
          expect.insert({u.region_b, v.region_b});
        }
    std::set<std::pair<int, int>> got;
    for (const int id : vars.inter_ids()) {
      const auto& v = vars[id];
      CHECK(v.kind == VarKind::inter);
      CHECK(v.alpha == 0);
      CHECK(v.a.image == 0);
      CHECK(v.b.image == 1);
      got.insert({v.a.region, v.b.region});
    }
    CHECK(got == expect);

    // Visitor sees exactly the close pairs, in ascending order.
    std::vector<std::pair<int, int>> visited;
    for_each_close_element_pair(gs[0], gs[1], window, [&](int u, int v, double) { visited.push_back({u, v}); });
    std::vector<std::pair<int, int>> brute;
    for (int u = 0; u < static_cast<int>(gs[0].elements.size()); ++u)
      for (int v = 0; v < static_cast<int>(gs[1].elements.size()); ++v) {
        const auto& a = gs[0].elements[static_cast<std::size_t>(u)];
        const auto& b = gs[1].elements[static_cast<std::size_t>(v)];
        if (std::hypot(a.x - b.x, a.y - b.y) < window) brute.push_back({u, v});
      }
    CHECK(visited == brute);
  }
}

TEST_CASE("find is a bijection onto ids and order is intra first") {
  std::mt19937 rng(23);
  const auto m0 = random_map(rng, 8, 8, 3);
  const auto m1 = random_map(rng, 8, 8, 3);
  const std::vector<RegionGraph> gs{build_graph(m0, 0), build_graph(m1, 1)};
  const auto vars = enumerate_variables(gs, 4.0);
  bool seen_inter = false;
  for (int id = 0; id < vars.size(); ++id) {
    const auto& v = vars[id];
    CHECK(v.a < v.b);
    CHECK(vars.find(v.a, v.b) == id);
    CHECK(vars.find(v.b, v.a) == id);
    if (v.kind == VarKind::inter) seen_inter = true;
    else CHECK_FALSE(seen_inter);
    if (id > 0 && vars[id - 1].kind == v.kind && vars[id - 1].a.image == v.a.image &&
        vars[id - 1].b.image == v.b.image)
      CHECK(std::pair{vars[id - 1].a, vars[id - 1].b} < std::pair{v.a, v.b});
  }
  CHECK_FALSE(vars.find({0, 0}, {0, 0}).has_value());
  for (int g = 0; g < vars.node_count(); ++g) CHECK(vars.global_node(vars.node(g)) == g);
}

TEST_CASE("two copies of the four-region layout pair every region with its copy") {
  const auto leaves = oracle::four_region_leaves();
  const std::vector<RegionGraph> gs{build_graph(leaves, 0), build_graph(leaves, 1)};
  const auto vars = enumerate_variables(gs, 20.0);
  for (int r = 0; r < 4; ++r) CHECK(vars.find({0, r}, {1, r}).has_value());
  // A 4x4 grid lies well inside the window: every cross pair is a candidate.
  CHECK(vars.inter_ids().size() == 16);
  const auto again = enumerate_variables(gs, 20.0);
  for (int id = 0; id < vars.size(); ++id) {
    CHECK(vars[id].a == again[id].a);
    CHECK(vars[id].b == again[id].b);
  }
}

TEST_CASE("images farther apart than the window decouple") {
  const auto base = oracle::four_region_leaves();
  const auto far = shifted(base, 40, 40, 44, 44);
  const std::vector<RegionGraph> gs{build_graph(base, 0), build_graph(far, 1)};
  CHECK(enumerate_variables(gs, 20.0).inter_ids().empty());
}

}  // TEST_SUITE
