#include "mhc/pipeline.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <numeric>

#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr const char* kModule = "pipeline";

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

// One cycle cut per variable that is 1 while its endpoints are joined by a
// path of 0 variables; the path is a shortest one in the 0-graph.
std::vector<LinearConstraint> cycle_cuts(const BoundaryVariableSet& vars, std::span<const std::uint8_t> b) {
  const int n = vars.node_count();
  UnionFind uf(n);
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(n));
  for (int id = 0; id < vars.size(); ++id) {
    if (b[static_cast<std::size_t>(id)]) continue;
    const int u = vars.global_node(vars[id].a), v = vars.global_node(vars[id].b);
    uf.unite(u, v);
    adj[static_cast<std::size_t>(u)].push_back({v, id});
    adj[static_cast<std::size_t>(v)].push_back({u, id});
  }
  std::vector<LinearConstraint> cuts;
  std::vector<int> via(static_cast<std::size_t>(n));
  for (int id = 0; id < vars.size(); ++id) {
    if (!b[static_cast<std::size_t>(id)]) continue;
    const int s = vars.global_node(vars[id].a), t = vars.global_node(vars[id].b);
    if (uf.find(s) != uf.find(t)) continue;
    std::fill(via.begin(), via.end(), -2);
    via[static_cast<std::size_t>(s)] = -1;
    std::deque<int> queue{s};
    while (!queue.empty() && via[static_cast<std::size_t>(t)] == -2) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto& [w, e] : adj[static_cast<std::size_t>(u)])
        if (via[static_cast<std::size_t>(w)] == -2) {
          via[static_cast<std::size_t>(w)] = e;
          queue.push_back(w);
        }
    }
    LinearConstraint c;
    c.tag = Provenance::cycle;
    c.terms.push_back({id, 1});
    for (int w = t; w != s;) {
      const int e = via[static_cast<std::size_t>(w)];
      c.terms.push_back({e, -1});
      const int a = vars.global_node(vars[e].a);
      w = a == w ? vars.global_node(vars[e].b) : a;
    }
    std::sort(c.terms.begin() + 1, c.terms.end(), [](const Term& x, const Term& y) { return x.var < y.var; });
    cuts.push_back(std::move(c));
  }
  return cuts;
}

std::vector<Hierarchy> hierarchies_of(std::span<const FrameInput> frames) {
  std::vector<Hierarchy> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    if (f.image.width() != f.leaves.width() || f.image.height() != f.leaves.height())
      throw Error(ErrorKind::input, kModule, "prepare", "frame and leave partition sizes differ");
    if (f.hierarchy) {
      if (f.hierarchy->leaf_count() != f.leaves.region_count())
        throw Error(ErrorKind::input, kModule, "prepare", "hierarchy does not match its leave partition");
      out.push_back(*f.hierarchy);
    } else {
      out.push_back(build_bpt(f.image, f.leaves));
    }
  }
  return out;
}

// Whether some tree cut of `h` has boundary mass inside `band`. Masses above
// band.hi are never tracked.
bool band_reachable(const Hierarchy& h, const BoundaryVariableSet& vars, int image, BandWeighting weighting,
                    const Band& band) {
  if (band.hi < band.lo || band.hi < 0) return false;
  const int n = h.node_count();
  std::vector<int> depth(static_cast<std::size_t>(n), 0);
  const auto merges = h.merges();
  for (auto it = merges.rbegin(); it != merges.rend(); ++it) {
    depth[static_cast<std::size_t>(it->child_a)] = depth[static_cast<std::size_t>(it->parent)] + 1;
    depth[static_cast<std::size_t>(it->child_b)] = depth[static_cast<std::size_t>(it->parent)] + 1;
  }
  std::vector<std::int64_t> cross(static_cast<std::size_t>(n), 0);
  for (const int id : vars.intra_ids(image)) {
    int a = vars[id].a.region, b = vars[id].b.region;
    while (a != b) {
      if (depth[static_cast<std::size_t>(a)] >= depth[static_cast<std::size_t>(b)])
        a = h.parent(a);
      else
        b = h.parent(b);
    }
    cross[static_cast<std::size_t>(a)] += weighting == BandWeighting::length ? vars[id].alpha : 1;
  }
  const auto width = static_cast<std::size_t>(band.hi) + 1;
  std::vector<std::vector<bool>> reach(static_cast<std::size_t>(n));
  for (int l = 0; l < h.leaf_count(); ++l) {
    reach[static_cast<std::size_t>(l)].assign(width, false);
    reach[static_cast<std::size_t>(l)][0] = true;
  }
  for (const auto& m : merges) {
    auto& a = reach[static_cast<std::size_t>(m.child_a)];
    auto& b = reach[static_cast<std::size_t>(m.child_b)];
    const auto shift = static_cast<std::size_t>(cross[static_cast<std::size_t>(m.parent)]);
    std::vector<bool> r(width, false);
    r[0] = true;
    for (std::size_t i = 0; i + shift < width; ++i) {
      if (!a[i]) continue;
      for (std::size_t j = 0; i + j + shift < width; ++j)
        if (b[j]) r[i + j + shift] = true;
    }
    reach[static_cast<std::size_t>(m.parent)] = std::move(r);
    std::vector<bool>().swap(a);
    std::vector<bool>().swap(b);
  }
  const auto& root = reach[static_cast<std::size_t>(h.root())];
  for (auto k = static_cast<std::size_t>(std::max<std::int64_t>(band.lo, 0)); k < width; ++k)
    if (root[k]) return true;
  return false;
}

}  // namespace

std::vector<Level> linear_schedule(int levels, double t_max, double t_min, double beta) {
  if (levels < 1) throw Error(ErrorKind::config, kModule, "schedule", "levels must be >= 1");
  if (!(t_max >= t_min && t_min > 0.0 && t_max <= 1.0))
    throw Error(ErrorKind::config, kModule, "schedule", "require 1 >= t_max >= t_min > 0");
  if (!(beta >= 0.0 && beta <= t_max)) throw Error(ErrorKind::config, kModule, "schedule", "require 0 <= beta <= t_max");
  if (levels > 1 && !(t_max > t_min))
    throw Error(ErrorKind::config, kModule, "schedule", "schedule must be strictly decreasing");
  std::vector<Level> out;
  for (int r = 0; r < levels; ++r) {
    double t = t_max + (t_min - t_max) * r / (levels - 1);
    if (r == 0) t = t_max;
    if (r == levels - 1 && levels > 1) t = t_min;
    out.push_back({t, std::min(beta, t)});
  }
  return out;
}

LeafClusters extract_clusters(const BoundaryVariableSet& vars, std::span<const std::uint8_t> assignment) {
  if (static_cast<int>(assignment.size()) != vars.size())
    throw Error(ErrorKind::internal, kModule, "extract_clusters", "assignment size mismatch");
  const int n = vars.node_count();
  UnionFind uf(n);
  for (int id = 0; id < vars.size(); ++id)
    if (assignment[static_cast<std::size_t>(id)] == 0) uf.unite(vars.global_node(vars[id].a), vars.global_node(vars[id].b));
  // Roots are the smallest member since unite keeps the minimum.
  std::vector<int> rank(static_cast<std::size_t>(n), -1);
  int next = 0;
  LeafClusters out(static_cast<std::size_t>(vars.image_count()));
  for (int g = 0; g < n; ++g) {
    const int r = uf.find(g);
    if (rank[static_cast<std::size_t>(r)] < 0) rank[static_cast<std::size_t>(r)] = next++;
    const NodeRef node = vars.node(g);
    auto& img = out[static_cast<std::size_t>(node.image)];
    if (img.empty()) img.resize(static_cast<std::size_t>(vars.region_count(node.image)));
    img[static_cast<std::size_t>(node.region)] = rank[static_cast<std::size_t>(r)];
  }
  return out;
}

LabelGrid paint(const LabelMap& leaves, std::span<const int> leaf_cluster) {
  LabelGrid out(leaves.height(), leaves.width());
  for (int y = 0; y < leaves.height(); ++y)
    for (int x = 0; x < leaves.width(); ++x) out(y, x) = leaf_cluster[static_cast<std::size_t>(leaves(x, y))];
  return out;
}

CoClusterProblem::CoClusterProblem(std::span<const Image* const> images, std::span<const LabelMap* const> leaves,
                                   std::span<const Hierarchy* const> hierarchies, const PipelineConfig& config)
    : config_(config), leaves_(leaves.begin(), leaves.end()), hierarchies_(hierarchies.begin(), hierarchies.end()) {
  if (images.empty()) throw Error(ErrorKind::input, kModule, "cocluster", "no images");
  if (leaves.size() != images.size() || hierarchies.size() != images.size())
    throw Error(ErrorKind::internal, kModule, "cocluster", "per-image inputs differ in length");
  std::vector<std::vector<ElementFeature>> features;
  for (std::size_t i = 0; i < images.size(); ++i) {
    graphs_.push_back(build_graph(*leaves[i], static_cast<int>(i)));
    const auto grad = compute_gradients(*images[i], config.descriptors.smoothing_sigma);
    features.push_back(element_features(*images[i], grad, graphs_.back(), config.descriptors));
  }
  vars_ = enumerate_variables(graphs_, config.descriptors.window);
  std::vector<PartitionView> parts;
  for (std::size_t i = 0; i < images.size(); ++i) parts.push_back({images[i], leaves[i], &graphs_[i], &features[i]});
  affinity_ = assemble_affinity(vars_, parts, config.descriptors);
  for (std::size_t i = 0; i < images.size(); ++i)
    if (hierarchies[i]) {
      auto c = intra_constraints(*hierarchies[i], vars_, static_cast<int>(i));
      base_.insert(base_.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
    }
  auto tri = triangle_constraints(vars_);
  base_.insert(base_.end(), std::make_move_iterator(tri.begin()), std::make_move_iterator(tri.end()));
}

void CoClusterProblem::add_constraints(std::span<const LinearConstraint> extra) {
  base_.insert(base_.end(), extra.begin(), extra.end());
  sort_by_provenance(base_);
}

LpProblem CoClusterProblem::problem(const Level& level, std::span<const int> band_images) const {
  LpProblem p(affinity_.q);
  p.constraints = base_;
  std::vector<int> images(band_images.begin(), band_images.end());
  if (images.empty()) {
    images.resize(static_cast<std::size_t>(vars_.image_count()));
    std::iota(images.begin(), images.end(), 0);
  }
  for (const int i : images) {
    if (vars_.intra_ids(i).empty()) continue;
    auto band = band_constraints(vars_, i, level.t, level.beta, config_.weighting);
    p.constraints.insert(p.constraints.end(), band.begin(), band.end());
  }
  sort_by_provenance(p.constraints);
  return p;
}

LevelSolution CoClusterProblem::solve(const Level& level, std::span<const int> band_images) const {
  LevelSolution out;
  out.level = level;
  LpProblem p = problem(level, band_images);
  std::vector<int> images(band_images.begin(), band_images.end());
  if (images.empty()) {
    images.resize(static_cast<std::size_t>(vars_.image_count()));
    std::iota(images.begin(), images.end(), 0);
  }
  std::vector<bool> touched(static_cast<std::size_t>(vars_.size()), false);
  for (const auto& c : base_)
    if (c.tag != Provenance::intra_equal && c.tag != Provenance::intra_subtree && c.tag != Provenance::triangle)
      for (const auto& t : c.terms) touched[static_cast<std::size_t>(t.var)] = true;
  for (const int i : images)
    if (!vars_.intra_ids(i).empty()) out.bands.push_back(band_limits(vars_, i, level.t, level.beta, config_.weighting));
  std::size_t k = 0;
  for (const int i : images) {
    if (vars_.intra_ids(i).empty()) continue;
    const Band& band = out.bands[k++];
    const Hierarchy* h = hierarchies_[static_cast<std::size_t>(i)];
    if (!h || h->node_count() != 2 * h->leaf_count() - 1) continue;
    const auto ids = vars_.intra_ids(i);
    if (std::any_of(ids.begin(), ids.end(), [&](int id) { return touched[static_cast<std::size_t>(id)]; })) continue;
    if (!band_reachable(*h, vars_, i, config_.weighting, band)) {
      std::string bands;
      for (const auto& b : out.bands) bands += " [" + std::to_string(b.lo) + "," + std::to_string(b.hi) + "]";
      out.note = "band infeasible:" + bands;
      return out;
    }
  }

  for (;;) {
    Solution s = solve_binary(p, config_.solver);
    out.nodes += s.nodes;
    if (s.status == SolveStatus::infeasible || s.values.empty()) {
      // Without the band every leaf on its own is feasible unless the fixed
      // part is inconsistent, which would be a bug upstream.
      LpProblem bare = p;
      std::erase_if(bare.constraints, [](const LinearConstraint& c) {
        return c.tag == Provenance::band_lo || c.tag == Provenance::band_hi;
      });
      std::vector<std::uint8_t> ones(static_cast<std::size_t>(bare.size()), 1);
      for (int v = 0; v < bare.size(); ++v)
        if (bare.fixed[static_cast<std::size_t>(v)] >= 0) ones[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(bare.fixed[static_cast<std::size_t>(v)]);
      if (!is_feasible(bare, ones))
        throw Error(ErrorKind::infeasible, kModule, "cocluster", "constraint system infeasible without the band");
      std::string bands;
      for (const auto& b : out.bands) bands += " [" + std::to_string(b.lo) + "," + std::to_string(b.hi) + "]";
      out.note = s.status == SolveStatus::infeasible ? "band infeasible:" + bands : "node limit without incumbent";
      return out;
    }
    if (s.status == SolveStatus::iteration_limit) {
      out.note = "iteration limit";
      return out;
    }
    const auto b = s.binary();
    auto cuts = cycle_cuts(vars_, b);
    if (!cuts.empty()) {
      ++out.cut_rounds;
      p.constraints.insert(p.constraints.end(), cuts.begin(), cuts.end());
      continue;
    }
    out.feasible = true;
    out.optimal = s.status == SolveStatus::optimal;
    if (!out.optimal) out.note = "node limit, best incumbent";
    out.assignment = b;
    out.objective = s.objective;
    out.leaf_cluster = extract_clusters(vars_, b);
    for (std::size_t i = 0; i < leaves_.size(); ++i) out.labels.push_back(paint(*leaves_[i], out.leaf_cluster[i]));
    return out;
  }
}

LevelSolution cocluster(std::span<const FrameInput> frames, const Level& level, const PipelineConfig& config) {
  return multiresolution(frames, std::span<const Level>(&level, 1), config).front();
}

std::vector<LevelSolution> multiresolution(std::span<const FrameInput> frames, std::span<const Level> schedule,
                                           const PipelineConfig& config) {
  if (frames.empty()) throw Error(ErrorKind::input, kModule, "multiresolution", "no frames");
  for (std::size_t r = 1; r < schedule.size(); ++r)
    if (!(schedule[r].t < schedule[r - 1].t))
      throw Error(ErrorKind::config, kModule, "multiresolution", "schedule must be strictly decreasing in T");
  const auto hier = hierarchies_of(frames);
  std::vector<const Image*> images;
  std::vector<const LabelMap*> leaves;
  std::vector<const Hierarchy*> hs;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    images.push_back(&frames[i].image);
    leaves.push_back(&frames[i].leaves);
    hs.push_back(&hier[i]);
  }
  const CoClusterProblem problem(images, leaves, hs, config);
  std::vector<LevelSolution> out;
  for (const auto& level : schedule) out.push_back(problem.solve(level));
  return out;
}

VideoSolution video_segment(std::span<const FrameInput> frames, std::span<const Level> schedule,
                            const PipelineConfig& config, const VideoObserver& observer) {
  if (frames.size() < 2) throw Error(ErrorKind::input, kModule, "video_segment", "need at least 2 frames");
  if (schedule.empty()) throw Error(ErrorKind::config, kModule, "video_segment", "empty schedule");
  const auto hier = hierarchies_of(frames);
  const auto levels = schedule.size();
  const auto n = frames.size();

  VideoSolution vs;
  vs.schedule.assign(schedule.begin(), schedule.end());
  vs.labels.assign(n, std::vector<LabelGrid>(levels));
  vs.leaf_cluster.assign(n, std::vector<std::vector<int>>(levels));
  vs.notes.assign(n, std::vector<std::string>(levels));
  std::vector<int> next_id(levels, 0);

  {
    const std::array<const Image*, 2> images{&frames[0].image, &frames[1].image};
    const std::array<const LabelMap*, 2> leaves{&frames[0].leaves, &frames[1].leaves};
    const std::array<const Hierarchy*, 2> hs{&hier[0], &hier[1]};
    const CoClusterProblem joint(images, leaves, hs, config);
    for (std::size_t r = 0; r < levels; ++r) {
      const LevelSolution sol = joint.solve(schedule[r]);
      if (observer.solved) observer.solved(1, static_cast<int>(r), joint, sol);
      if (!sol.feasible) {
        vs.notes[0][r] = vs.notes[1][r] = sol.note;
        continue;
      }
      for (std::size_t f = 0; f < 2; ++f) {
        vs.leaf_cluster[f][r] = sol.leaf_cluster[f];
        vs.labels[f][r] = sol.labels[f];
      }
      for (const auto& lc : sol.leaf_cluster)
        for (const int id : lc) next_id[r] = std::max(next_id[r], id + 1);
    }
    if (observer.published) {
      observer.published(0, vs);
      observer.published(1, vs);
    }
  }

  for (std::size_t i = 2; i < n; ++i) {
    for (std::size_t r = 0; r < levels; ++r) {
      const LabelGrid& older = vs.labels[i - 2][r];
      if (older.size() == 0 || vs.labels[i - 1][r].size() == 0) {
        vs.notes[i][r] = "previous frames missing at this level";
        continue;
      }
      // Clusters of frame i-2 enter as their 4-connected pieces.
      const LabelMap pieces = LabelMap::from_grid(older);
      std::vector<int> piece_label(static_cast<std::size_t>(pieces.region_count()), -1);
      for (int y = 0; y < pieces.height(); ++y)
        for (int x = 0; x < pieces.width(); ++x) piece_label[static_cast<std::size_t>(pieces(x, y))] = older(y, x);

      const std::array<const Image*, 3> images{&frames[i - 2].image, &frames[i - 1].image, &frames[i].image};
      const std::array<const LabelMap*, 3> leaves{&pieces, &frames[i - 1].leaves, &frames[i].leaves};
      const std::array<const Hierarchy*, 3> hs{nullptr, nullptr, &hier[i]};
      CoClusterProblem step(images, leaves, hs, config);
      const std::array<FrozenImage, 2> frozen{FrozenImage{0, piece_label}, FrozenImage{1, vs.leaf_cluster[i - 1][r]}};
      step.add_constraints(freeze_constraints(step.variables(), frozen));
      const std::array<int, 1> band_on{2};
      const LevelSolution sol = step.solve(schedule[r], band_on);
      if (observer.solved) observer.solved(static_cast<int>(i), static_cast<int>(r), step, sol);
      if (!sol.feasible) {
        vs.notes[i][r] = sol.note;
        continue;
      }
      // A component keeps the label of its smallest frozen member; the rest
      // draw fresh ids in component order.
      const int components = [&] {
        int k = 0;
        for (const auto& lc : sol.leaf_cluster)
          for (const int id : lc) k = std::max(k, id + 1);
        return k;
      }();
      std::vector<int> global(static_cast<std::size_t>(components), -1);
      for (int img = 0; img < 2; ++img) {
        const auto& labels = img == 0 ? piece_label : vs.leaf_cluster[i - 1][r];
        const auto& lc = sol.leaf_cluster[static_cast<std::size_t>(img)];
        for (std::size_t k = 0; k < lc.size(); ++k)
          if (global[static_cast<std::size_t>(lc[k])] < 0) global[static_cast<std::size_t>(lc[k])] = labels[k];
      }
      for (auto& g : global)
        if (g < 0) g = next_id[r]++;
      auto& mine = vs.leaf_cluster[i][r];
      mine.clear();
      for (const int c : sol.leaf_cluster[2]) mine.push_back(global[static_cast<std::size_t>(c)]);
      vs.labels[i][r] = paint(frames[i].leaves, mine);
    }
    if (observer.published) observer.published(static_cast<int>(i), vs);
  }
  return vs;
}

}  // namespace mhc
