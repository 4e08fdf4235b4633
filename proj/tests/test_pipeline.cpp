#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "mhc/error.hpp"
#include "mhc/pipeline.hpp"
#include "mhc/synth.hpp"
#include "oracles.hpp"

using namespace mhc;

namespace {

FrameInput frame_of(const SynthFrame& f) { return {f.image, f.leaves, std::nullopt}; }

// Two flat halves, left and right.
FrameInput halves(Rgb left, Rgb right, int w = 8, int h = 8) {
  Image img(w, h);
  LabelGrid g(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      g(y, x) = x >= w / 2;
      img.set(x, y, x >= w / 2 ? right : left);
    }
  return {img, LabelMap::from_grid(g), std::nullopt};
}

// Two flat halves, top and bottom.
FrameInput top_bottom(Rgb top, Rgb bottom, int w = 8, int h = 8) {
  Image img(w, h);
  LabelGrid g(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      g(y, x) = y >= h / 2;
      img.set(x, y, y >= h / 2 ? bottom : top);
    }
  return {img, LabelMap::from_grid(g), std::nullopt};
}

// Every realized assignment: intra part decodes as a tree cut, band holds,
// no (1,0,0) triangle, objective is q.b.
void check_solution(const CoClusterProblem& prob, const LevelSolution& sol, const std::vector<Hierarchy>& hs,
                    const Level& level) {
  REQUIRE(sol.feasible);
  const auto& vars = prob.variables();
  for (int i = 0; i < vars.image_count(); ++i) {
    std::vector<std::uint8_t> intra;
    std::int64_t mass = 0;
    for (const int id : vars.intra_ids(i)) {
      intra.push_back(sol.assignment[static_cast<std::size_t>(id)]);
      mass += vars[id].alpha * sol.assignment[static_cast<std::size_t>(id)];
    }
    const auto d = encoding_to_cut(hs[static_cast<std::size_t>(i)], vars, i, intra);
    CHECK(d.accepted);
    const auto band = band_limits(vars, i, level.t, level.beta);
    CHECK(mass >= band.lo);
    CHECK(mass <= band.hi);
  }
  for (const auto& c : triangle_constraints(vars)) CHECK(c.satisfied(sol.assignment));
  double obj = 0.0;
  for (int id = 0; id < vars.size(); ++id)
    obj += prob.affinity().q[static_cast<std::size_t>(id)] * sol.assignment[static_cast<std::size_t>(id)];
  CHECK(sol.objective == doctest::Approx(obj).epsilon(1e-9));
  // Leaves share an id iff they are joined by a path of zero variables.
  const auto again = extract_clusters(vars, sol.assignment);
  CHECK(again == sol.leaf_cluster);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("linear schedule") {
  const auto s = linear_schedule(30, 0.4, 0.1, 0.1);
  REQUIRE(s.size() == 30);
  CHECK(s.front().t == 0.4);
  CHECK(s.back().t == 0.1);
  for (std::size_t r = 1; r < s.size(); ++r) CHECK(s[r].t < s[r - 1].t);
  for (const auto& l : s) CHECK(l.beta == 0.1);
  CHECK(linear_schedule(1, 1.0, 1.0, 1.0).size() == 1);
  CHECK_THROWS_AS(linear_schedule(0, 0.4, 0.1, 0.1), Error);
  CHECK_THROWS_AS(linear_schedule(3, 0.1, 0.4, 0.1), Error);
  CHECK_THROWS_AS(linear_schedule(3, 0.4, 0.1, 0.5), Error);
}

TEST_CASE("extract_clusters examples") {
  const auto leaves = oracle::four_region_leaves();
  const std::vector<RegionGraph> gs{build_graph(leaves)};
  const auto vars = enumerate_variables(gs, 20.0);
  CHECK(extract_clusters(vars, std::vector<std::uint8_t>{1, 1, 1, 1, 1}) == LeafClusters{{0, 1, 2, 3}});
  CHECK(extract_clusters(vars, std::vector<std::uint8_t>{0, 0, 0, 0, 0}) == LeafClusters{{0, 0, 0, 0}});
  CHECK(extract_clusters(vars, std::vector<std::uint8_t>{1, 1, 1, 1, 0}) == LeafClusters{{0, 1, 2, 2}});

  // A split between columns 0 and 1 has no element within 0.25 of the
  // four-region layout's elements.
  LabelGrid split(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) split(y, x) = x >= 1;
  const auto other = LabelMap::from_grid(split);
  const std::vector<RegionGraph> two{build_graph(leaves, 0), build_graph(other, 1)};
  const auto v2 = enumerate_variables(two, 0.25);
  REQUIRE(v2.inter_ids().empty());
  REQUIRE(v2.size() == 6);
  CHECK(extract_clusters(v2, std::vector<std::uint8_t>(6, 0)) == LeafClusters{{0, 0, 0, 0}, {1, 1}});
  CHECK(extract_clusters(v2, std::vector<std::uint8_t>{1, 1, 1, 1, 1, 1}) == LeafClusters{{0, 1, 2, 3}, {4, 5}});
  CHECK_THROWS_AS(extract_clusters(v2, std::vector<std::uint8_t>(3, 0)), Error);
}

TEST_CASE("paint") {
  const auto leaves = oracle::four_region_leaves();
  const std::vector<int> lc{5, 5, 7, 9};
  const auto g = paint(leaves, lc);
  CHECK(g(0, 0) == 5);
  CHECK(g(0, 3) == 5);
  CHECK(g(3, 0) == 7);
  CHECK(g(3, 3) == 9);
}

TEST_CASE("single image, vacuous band and tight band") {
  // Four distinct colors on the four-region layout.
  Image img(4, 4);
  const Rgb colors[4] = {{250, 0, 0}, {0, 250, 0}, {0, 0, 250}, {250, 250, 0}};
  const auto leaves = oracle::four_region_leaves();
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img.set(x, y, colors[leaves(x, y)]);
  const std::vector<FrameInput> frames{{img, leaves, oracle::four_region_hierarchy()}};
  const std::vector<Hierarchy> hs{oracle::four_region_hierarchy()};
  const PipelineConfig cfg;
  const std::array<const Image*, 1> imgs{&img};
  const std::array<const LabelMap*, 1> ls{&leaves};
  const std::array<const Hierarchy*, 1> hp{&hs[0]};
  const CoClusterProblem prob(imgs, ls, hp, cfg);

  // Vacuous band: every boundary is dissimilar (q < 0), so all stay.
  const Level free{1.0, 1.0};
  const auto a = cocluster(frames, free, cfg);
  check_solution(prob, a, hs, free);
  CHECK(a.leaf_cluster == LeafClusters{{0, 1, 2, 3}});

  // Tight band: at most half the contour may stay active.
  for (const double t : {0.5, 0.4, 0.3}) {
    const Level tight{t, 0.2};
    const auto b = cocluster(frames, tight, cfg);
    if (!b.feasible) {
      CHECK(b.note.find("band") != std::string::npos);
      continue;
    }
    check_solution(prob, b, hs, tight);
  }
}

TEST_CASE("two identical images: halves correspond across images") {
  const auto f = halves({200, 30, 30}, {30, 30, 200});
  const std::vector<FrameInput> frames{f, f};
  const PipelineConfig cfg;
  const auto sol = cocluster(frames, Level{1.0, 1.0}, cfg);
  REQUIRE(sol.feasible);
  REQUIRE(sol.leaf_cluster.size() == 2);
  CHECK(sol.leaf_cluster[0] == sol.leaf_cluster[1]);
  CHECK(sol.leaf_cluster[0][0] != sol.leaf_cluster[0][1]);
  std::set<int> ids(sol.leaf_cluster[0].begin(), sol.leaf_cluster[0].end());
  CHECK(ids.size() == 2);

  // Same optimum as enumeration over the full problem.
  const std::array<const Image*, 2> imgs{&frames[0].image, &frames[1].image};
  const std::array<const LabelMap*, 2> ls{&frames[0].leaves, &frames[1].leaves};
  const auto h = build_bpt(f.image, f.leaves);
  const std::array<const Hierarchy*, 2> hp{&h, &h};
  const CoClusterProblem prob(imgs, ls, hp, cfg);
  const auto lp = prob.problem(Level{1.0, 1.0});
  REQUIRE(lp.size() <= 12);
  const auto bf = brute_force(lp);
  CHECK(sol.objective == doctest::Approx(bf.objective).epsilon(1e-12));
  check_solution(prob, sol, {h, h}, Level{1.0, 1.0});
}

TEST_CASE("images without inter candidates decompose") {
  PipelineConfig cfg;
  cfg.descriptors.window = 0.25;
  const auto a = halves({200, 30, 30}, {30, 200, 30});
  const auto b = top_bottom({10, 10, 10}, {240, 240, 240});
  const std::vector<FrameInput> both{a, b}, only_a{a}, only_b{b};
  const Level level{1.0, 1.0};
  const auto joint = cocluster(both, level, cfg);
  const auto sa = cocluster(only_a, level, cfg);
  const auto sb = cocluster(only_b, level, cfg);
  REQUIRE(joint.feasible);
  CHECK(joint.objective == sa.objective + sb.objective);
}

TEST_CASE("multiresolution on the two-rectangle fixture") {
  const auto synth = two_rectangles(7);
  const std::vector<FrameInput> frames{frame_of(synth[0]), frame_of(synth[1])};
  PipelineConfig cfg;
  cfg.descriptors.mu = 0.01;
  const auto schedule = linear_schedule(3, 0.4, 0.2, 0.1);
  const auto levels = multiresolution(frames, schedule, cfg);
  REQUIRE(levels.size() == 3);

  const std::vector<Hierarchy> hs{build_bpt(frames[0].image, frames[0].leaves),
                                  build_bpt(frames[1].image, frames[1].leaves)};
  const std::array<const Image*, 2> imgs{&frames[0].image, &frames[1].image};
  const std::array<const LabelMap*, 2> ls{&frames[0].leaves, &frames[1].leaves};
  const std::array<const Hierarchy*, 2> hp{&hs[0], &hs[1]};
  const CoClusterProblem prob(imgs, ls, hp, cfg);
  for (std::size_t r = 0; r < levels.size(); ++r) {
    CAPTURE(r);
    check_solution(prob, levels[r], hs, schedule[r]);
    REQUIRE(levels[r].labels.size() == 2);
    CHECK(levels[r].labels[0].rows() == 128);
  }
  CHECK_THROWS_AS(multiresolution(frames, std::vector<Level>{{0.2, 0.1}, {0.3, 0.1}}, cfg), Error);
}

TEST_CASE("unconstrained single-level schedule") {
  const auto f = halves({200, 30, 30}, {30, 30, 200});
  const std::vector<FrameInput> frames{f, f};
  const auto out = multiresolution(frames, std::vector<Level>{{1.0, 1.0}}, PipelineConfig{});
  REQUIRE(out.size() == 1);
  CHECK(out[0].feasible);
  CHECK(out[0].bands[0].lo == 0);
  CHECK(out[0].bands[0].hi == out[0].bands[0].total);
}

TEST_CASE("static sequence: same partition everywhere, ids repeat two frames on, old frames untouched") {
  const auto synth = static_sequence(7, 3);
  std::vector<FrameInput> frames;
  for (const auto& s : synth) frames.push_back(frame_of(s));
  PipelineConfig cfg;
  cfg.descriptors.mu = 0.01;
  const auto schedule = linear_schedule(2, 0.4, 0.3, 0.1);
  std::vector<std::vector<LabelGrid>> published(3);
  VideoObserver obs;
  obs.published = [&](int frame, const VideoSolution& v) {
    published[static_cast<std::size_t>(frame)] = v.labels[static_cast<std::size_t>(frame)];
    for (int older = 0; older < frame; ++older)
      for (std::size_t r = 0; r < schedule.size(); ++r)
        CHECK((v.labels[static_cast<std::size_t>(older)][r] == published[static_cast<std::size_t>(older)][r]).all());
  };
  const auto v = video_segment(frames, schedule, cfg, obs);
  for (std::size_t r = 0; r < schedule.size(); ++r) {
    CAPTURE(r);
    const auto& first = v.leaf_cluster[0][r];
    REQUIRE(!first.empty());
    for (std::size_t f = 1; f < 3; ++f) {
      // Leaves share a cluster in frame f exactly when they do in frame 0.
      const auto& lc = v.leaf_cluster[f][r];
      REQUIRE(lc.size() == first.size());
      std::map<int, int> fwd, bwd;
      bool bijective = true;
      for (std::size_t k = 0; k < lc.size(); ++k) {
        bijective = bijective && fwd.try_emplace(first[k], lc[k]).first->second == lc[k];
        bijective = bijective && bwd.try_emplace(lc[k], first[k]).first->second == first[k];
      }
      CHECK(bijective);
    }
    CHECK((v.labels[2][r] == v.labels[0][r]).all());
  }
  CHECK_THROWS_AS(video_segment(std::span(frames).first(1), schedule, cfg), Error);
}

}  // TEST_SUITE
