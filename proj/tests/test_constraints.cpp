#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "mhc/constraints.hpp"
#include "mhc/error.hpp"
#include "oracles.hpp"

using namespace mhc;

namespace {

BoundaryVariableSet single(const LabelMap& leaves) {
  const std::vector<RegionGraph> gs{build_graph(leaves)};
  return enumerate_variables(gs, 20.0);
}

bool all_satisfied(const std::vector<LinearConstraint>& cs, const std::vector<std::uint8_t>& b) {
  return std::all_of(cs.begin(), cs.end(), [&](const LinearConstraint& c) { return c.satisfied(b); });
}

std::vector<std::uint8_t> from_mask(int mask, int n) {
  std::vector<std::uint8_t> b(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) b[static_cast<std::size_t>(k)] = (mask >> k) & 1;
  return b;
}

LabelMap two_bands(int length) {
  LabelGrid g(2, length);
  g.row(0).setZero();
  g.row(1).setOnes();
  return LabelMap::from_grid(g);
}

}  // namespace

TEST_SUITE("constraints") {

TEST_CASE("root of the four-region layout") {
  const auto h = oracle::four_region_hierarchy();
  const auto vars = single(oracle::four_region_leaves());
  const auto cs = intra_constraints(h, vars, 0);
  REQUIRE(cs.size() == 3);
  // b13 = b23, b23 = b24
  CHECK(cs[0] == LinearConstraint{ConstraintKind::equal, {{1, 1}, {2, -1}}, 0, Provenance::intra_equal});
  CHECK(cs[1] == LinearConstraint{ConstraintKind::equal, {{2, 1}, {3, -1}}, 0, Provenance::intra_equal});
  // b12 + b34 <= 2 b13
  CHECK(cs[2] == LinearConstraint{ConstraintKind::less_equal, {{0, 1}, {4, 1}, {1, -2}}, 0, Provenance::intra_subtree});

  CHECK_FALSE(cs[0].satisfied(std::vector<std::uint8_t>{1, 1, 0, 0, 1}));
  CHECK_FALSE(cs[2].satisfied(std::vector<std::uint8_t>{1, 0, 0, 0, 0}));
}

TEST_CASE("two-leaf merge without inner boundaries emits nothing") {
  LabelGrid g(1, 2);
  g << 0, 1;
  const auto vars = single(LabelMap::from_grid(g));
  CHECK(intra_constraints(Hierarchy(2, {{0, 1, 2}}), vars, 0).empty());
}

TEST_CASE("all 32 assignments on the four-region layout: feasible iff tree cut") {
  const auto h = oracle::four_region_hierarchy();
  const auto vars = single(oracle::four_region_leaves());
  const auto cs = intra_constraints(h, vars, 0);
  std::set<std::vector<std::uint8_t>> cuts;
  for (const auto& c : oracle::all_cuts(h, h.root())) cuts.insert(oracle::encode(h, vars, 0, c));
  int feasible = 0;
  for (int mask = 0; mask < 32; ++mask) {
    const auto b = from_mask(mask, 5);
    const bool ok = all_satisfied(cs, b);
    CHECK(ok == (cuts.count(b) == 1));
    feasible += ok;
  }
  CHECK(feasible == 5);
}

TEST_CASE("chained equalities and the all-pairs form have the same solutions") {
  const auto h = oracle::four_region_hierarchy();
  const auto vars = single(oracle::four_region_leaves());
  const auto chain = intra_constraints(h, vars, 0);
  for (int mask = 0; mask < 32; ++mask) {
    const auto b = from_mask(mask, 5);
    const bool all_pairs = b[1] == b[2] && b[2] == b[3] && b[1] == b[3] && b[0] + b[4] <= 2 * b[1];
    CHECK(all_satisfied(chain, b) == all_pairs);
  }
}

TEST_CASE("random hierarchies: intra feasible set equals tree-cut encodings") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = oracle::random_tree(rng, 4 + trial % 3);
    const auto vars = single(t.leaves);
    const auto cs = intra_constraints(t.h, vars, 0);
    for (const auto& c : cs) {
      std::set<int> seen;
      for (const auto& term : c.terms) {
        CHECK(term.coef != 0);
        CHECK(seen.insert(term.var).second);
      }
    }
    std::set<std::vector<std::uint8_t>> cuts;
    for (const auto& c : oracle::all_cuts(t.h, t.h.root())) cuts.insert(oracle::encode(t.h, vars, 0, c));
    for (int mask = 0; mask < (1 << vars.size()); ++mask) {
      const auto b = from_mask(mask, vars.size());
      REQUIRE(all_satisfied(cs, b) == (cuts.count(b) == 1));
    }
  }
}

TEST_CASE("triangle rows equal three per mixed clique") {
  const auto leaves = oracle::four_region_leaves();
  const std::vector<RegionGraph> gs{build_graph(leaves, 0), build_graph(leaves, 1)};
  const auto vars = enumerate_variables(gs, 20.0);
  const auto tri = triangle_constraints(vars);
  const auto cliques = oracle::mixed_cliques(vars);
  CHECK(tri.size() == 3 * cliques.size());
  CHECK(!cliques.empty());
  std::set<std::array<int, 3>> covered;
  for (const auto& c : tri) {
    CHECK(c.tag == Provenance::triangle);
    REQUIRE(c.terms.size() == 3);
    std::set<int> nodes;
    for (const auto& term : c.terms) {
      nodes.insert(vars.global_node(vars[term.var].a));
      nodes.insert(vars.global_node(vars[term.var].b));
    }
    REQUIRE(nodes.size() == 3);
    std::array<int, 3> key{};
    std::copy(nodes.begin(), nodes.end(), key.begin());
    covered.insert(key);
  }
  CHECK(covered == cliques);
}

TEST_CASE("triangle patterns") {
  // Three single-region images, all pairwise inter.
  const BoundaryVariableSet vars({1, 1, 1}, {{{0, 0}, {1, 0}, VarKind::inter, 0},
                                             {{0, 0}, {2, 0}, VarKind::inter, 0},
                                             {{1, 0}, {2, 0}, VarKind::inter, 0}});
  const auto tri = triangle_constraints(vars);
  REQUIRE(tri.size() == 3);
  for (int mask = 0; mask < 8; ++mask) {
    const auto b = from_mask(mask, 3);
    const int ones = b[0] + b[1] + b[2];
    CHECK(all_satisfied(tri, b) == (ones != 1));
  }
}

TEST_CASE("triangle rows never cut a consistent labeling") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<RegionGraph> gs;
    std::vector<LabelMap> maps;
    for (int i = 0; i < 3; ++i) {
      LabelGrid g(6, 6);
      for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) g(y, x) = static_cast<int>(rng() % 3);
      maps.push_back(LabelMap::from_grid(g));
    }
    for (int i = 0; i < 3; ++i) gs.push_back(build_graph(maps[static_cast<std::size_t>(i)], i));
    const auto vars = enumerate_variables(gs, 3.0);
    const auto tri = triangle_constraints(vars);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<int> label(static_cast<std::size_t>(vars.node_count()));
      for (auto& l : label) l = static_cast<int>(rng() % 3);
      std::vector<std::uint8_t> b(static_cast<std::size_t>(vars.size()));
      for (int id = 0; id < vars.size(); ++id)
        b[static_cast<std::size_t>(id)] = label[static_cast<std::size_t>(vars.global_node(vars[id].a))] !=
                                          label[static_cast<std::size_t>(vars.global_node(vars[id].b))];
      CHECK(all_satisfied(tri, b));
    }
  }
}

TEST_CASE("band limits") {
  const auto vars = single(two_bands(100));
  const auto band = band_limits(vars, 0, 0.4, 0.1);
  CHECK(band.total == 100);
  CHECK(band.lo == 30);
  CHECK(band.hi == 40);
  const auto vacuous = band_limits(vars, 0, 1.0, 1.0);
  CHECK(vacuous.lo == 0);
  CHECK(vacuous.hi == 100);
  CHECK(band_limits(vars, 0, 0.4, 0.1, BandWeighting::count).total == 1);

  const auto cs = band_constraints(vars, 0, 0.4, 0.1);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0] == LinearConstraint{ConstraintKind::less_equal, {{0, -100}}, -30, Provenance::band_lo});
  CHECK(cs[1] == LinearConstraint{ConstraintKind::less_equal, {{0, 100}}, 40, Provenance::band_hi});

  CHECK_THROWS_AS(band_limits(vars, 0, 0.0, 0.0), Error);
  CHECK_THROWS_AS(band_limits(vars, 0, 0.3, 0.4), Error);
  CHECK_THROWS_AS(band_limits(single(LabelMap::from_grid(LabelGrid::Zero(2, 2))), 0, 0.5, 0.1), Error);
}

TEST_CASE("beta equal to the step tiles the mass range, smaller beta leaves gaps") {
  const auto vars = single(two_bands(100));
  auto covered = [&](double beta, double step) {
    std::set<std::int64_t> in;
    for (int r = 0; r < 4; ++r) {
      const auto b = band_limits(vars, 0, (4 - r) * step, beta);
      for (auto v = b.lo; v <= b.hi; ++v) in.insert(v);
    }
    return in;
  };
  const auto tiled = covered(0.1, 0.1);
  for (std::int64_t v = 0; v <= 40; ++v) CHECK(tiled.count(v) == 1);
  const auto sparse = covered(0.05, 0.1);
  CHECK(sparse.count(33) == 0);
  CHECK(sparse.count(37) == 1);
}

TEST_CASE("freeze fixings follow previous labels") {
  // Image 0: A | B. Image 1: one leaf that previously joined A.
  LabelGrid g0(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) g0(y, x) = x >= 2;
  LabelGrid g1(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) g1(y, x) = x >= 3;
  const std::vector<RegionGraph> gs{build_graph(LabelMap::from_grid(g0), 0), build_graph(LabelMap::from_grid(g1), 1)};
  const auto vars = enumerate_variables(gs, 20.0);
  const std::vector<FrozenImage> frozen{{0, {10, 11}}, {1, {10, 10}}};
  const auto cs = freeze_constraints(vars, frozen);
  CHECK(static_cast<int>(cs.size()) == vars.size());
  auto fixed = [&](NodeRef a, NodeRef b) {
    const int id = *vars.find(a, b);
    for (const auto& c : cs)
      if (c.terms.size() == 1 && c.terms[0].var == id) return c.rhs;
    return std::int64_t{-1};
  };
  CHECK(fixed({0, 0}, {1, 0}) == 0);
  CHECK(fixed({0, 1}, {1, 0}) == 1);
  CHECK(fixed({0, 0}, {0, 1}) == 1);
  // All leaves of image 1 in one cluster: their intra variable fixed to 0.
  CHECK(fixed({1, 0}, {1, 1}) == 0);
  for (const auto& c : cs) {
    CHECK(c.kind == ConstraintKind::equal);
    CHECK(c.tag == (c.rhs == 1 ? Provenance::freeze_sep : Provenance::freeze_merge));
  }

  const std::vector<FrozenImage> short_labels{{0, {10}}};
  CHECK_THROWS_AS(freeze_constraints(vars, short_labels), Error);
  const std::vector<FrozenImage> only_first{{0, {10, 11}}};
  CHECK(freeze_constraints(vars, only_first).size() == 1);
}

TEST_CASE("sort by provenance is stable") {
  std::vector<LinearConstraint> cs{
      {ConstraintKind::less_equal, {{0, 1}}, 1, Provenance::band_hi},
      {ConstraintKind::less_equal, {{1, 1}}, 1, Provenance::triangle},
      {ConstraintKind::equal, {{2, 1}}, 0, Provenance::intra_equal},
      {ConstraintKind::less_equal, {{3, 1}}, 1, Provenance::triangle},
  };
  sort_by_provenance(cs);
  CHECK(cs[0].terms[0].var == 2);
  CHECK(cs[1].terms[0].var == 1);
  CHECK(cs[2].terms[0].var == 3);
  CHECK(cs[3].terms[0].var == 0);
  CHECK(to_string(Provenance::band_lo) == "band-lo");
}

}  // TEST_SUITE
