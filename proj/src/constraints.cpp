#include "mhc/constraints.hpp"

#include <algorithm>
#include <cmath>

#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr const char* kModule = "constraints";

LinearConstraint make(ConstraintKind kind, std::vector<Term> terms, std::int64_t rhs, Provenance tag) {
  return LinearConstraint{kind, std::move(terms), rhs, tag};
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::intra_equal: return "intra-equal";
    case Provenance::intra_subtree: return "intra-subtree";
    case Provenance::triangle: return "triangle";
    case Provenance::band_lo: return "band-lo";
    case Provenance::band_hi: return "band-hi";
    case Provenance::freeze_sep: return "freeze-sep";
    case Provenance::freeze_merge: return "freeze-merge";
    case Provenance::cycle: return "cycle";
    case Provenance::other: return "other";
  }
  return "other";
}

std::int64_t LinearConstraint::activity(std::span<const std::uint8_t> b) const {
  std::int64_t s = 0;
  for (const auto& t : terms) s += t.coef * b[static_cast<std::size_t>(t.var)];
  return s;
}

bool LinearConstraint::satisfied(std::span<const std::uint8_t> b) const {
  const auto a = activity(b);
  return kind == ConstraintKind::equal ? a == rhs : a <= rhs;
}

std::vector<LinearConstraint> intra_constraints(const Hierarchy& h, const BoundaryVariableSet& vars, int image) {
  if (image < 0 || image >= vars.image_count())
    throw Error(ErrorKind::input, kModule, "intra_constraints", "image index out of range");
  if (vars.region_count(image) != h.leaf_count())
    throw Error(ErrorKind::input, kModule, "intra_constraints", "variables were built on a different leave partition");

  const auto nodes = static_cast<std::size_t>(h.node_count());
  std::vector<int> depth(nodes, 0);
  for (int n = h.root() - 1; n >= 0; --n) depth[static_cast<std::size_t>(n)] = depth[static_cast<std::size_t>(h.parent(n))] + 1;

  // Cross variables per node, then inner = everything crossing strictly below.
  std::vector<std::vector<int>> cross(nodes);
  for (const int id : vars.intra_ids(image)) {
    int a = vars[id].a.region, b = vars[id].b.region;
    while (a != b) {
      if (depth[static_cast<std::size_t>(a)] >= depth[static_cast<std::size_t>(b)])
        a = h.parent(a);
      else
        b = h.parent(b);
    }
    cross[static_cast<std::size_t>(a)].push_back(id);
  }
  std::vector<std::vector<int>> below(nodes);
  std::vector<LinearConstraint> out;
  for (const auto& m : h.merges()) {
    auto& inner = below[static_cast<std::size_t>(m.parent)];
    for (const int child : {m.child_a, m.child_b}) {
      auto& c = below[static_cast<std::size_t>(child)];
      inner.insert(inner.end(), c.begin(), c.end());
      const auto& cc = cross[static_cast<std::size_t>(child)];
      inner.insert(inner.end(), cc.begin(), cc.end());
      std::vector<int>().swap(c);
    }
    std::sort(inner.begin(), inner.end());

    auto xs = cross[static_cast<std::size_t>(m.parent)];
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 1; k < xs.size(); ++k)
      out.push_back(make(ConstraintKind::equal, {{xs[k - 1], 1}, {xs[k], -1}}, 0, Provenance::intra_equal));
    if (!inner.empty() && !xs.empty()) {
      std::vector<Term> terms;
      terms.reserve(inner.size() + 1);
      for (const int v : inner) terms.push_back({v, 1});
      terms.push_back({xs.front(), -static_cast<std::int64_t>(inner.size())});
      out.push_back(make(ConstraintKind::less_equal, std::move(terms), 0, Provenance::intra_subtree));
    }
  }
  return out;
}

std::vector<LinearConstraint> triangle_constraints(const BoundaryVariableSet& vars) {
  const int n = vars.node_count();
  // Higher neighbors of every global node, with the connecting variable.
  std::vector<std::vector<std::pair<int, int>>> up(static_cast<std::size_t>(n));
  for (int id = 0; id < vars.size(); ++id) {
    const int u = vars.global_node(vars[id].a), v = vars.global_node(vars[id].b);
    up[static_cast<std::size_t>(std::min(u, v))].push_back({std::max(u, v), id});
  }
  for (auto& l : up) std::sort(l.begin(), l.end());

  std::vector<LinearConstraint> out;
  for (int x = 0; x < n; ++x) {
    const auto& nx = up[static_cast<std::size_t>(x)];
    for (std::size_t i = 0; i < nx.size(); ++i) {
      const auto [y, xy] = nx[i];
      const auto& ny = up[static_cast<std::size_t>(y)];
      // z > y adjacent to both x and y: merge the two sorted lists.
      auto p = nx.begin() + static_cast<std::ptrdiff_t>(i) + 1;
      auto q = ny.begin();
      while (p != nx.end() && q != ny.end()) {
        if (p->first < q->first) {
          ++p;
        } else if (q->first < p->first) {
          ++q;
        } else {
          const int z = p->first, xz = p->second, yz = q->second;
          const int ix = vars.node(x).image;
          if (vars.node(y).image != ix || vars.node(z).image != ix) {
            out.push_back(make(ConstraintKind::less_equal, {{xy, 1}, {xz, -1}, {yz, -1}}, 0, Provenance::triangle));
            out.push_back(make(ConstraintKind::less_equal, {{xy, -1}, {xz, 1}, {yz, -1}}, 0, Provenance::triangle));
            out.push_back(make(ConstraintKind::less_equal, {{xy, -1}, {xz, -1}, {yz, 1}}, 0, Provenance::triangle));
          }
          ++p;
          ++q;
        }
      }
    }
  }
  return out;
}

Band band_limits(const BoundaryVariableSet& vars, int image, double t, double beta, BandWeighting weighting) {
  if (image < 0 || image >= vars.image_count())
    throw Error(ErrorKind::input, kModule, "band_constraints", "image index out of range");
  if (!(t > 0.0 && t <= 1.0) || !(beta >= 0.0 && beta <= t))
    throw Error(ErrorKind::config, kModule, "band_constraints", "require 0 < T <= 1 and 0 <= beta <= T");
  const auto ids = vars.intra_ids(image);
  if (ids.empty()) throw Error(ErrorKind::input, kModule, "band_constraints", "image has no intra variables");
  Band band;
  for (const int id : ids) band.total += weighting == BandWeighting::length ? vars[id].alpha : 1;
  const double nb = static_cast<double>(band.total);
  // The epsilon absorbs products like 0.3 * 100 = 30.000000000000004.
  band.lo = static_cast<std::int64_t>(std::ceil((t - beta) * nb - 1e-9));
  band.hi = static_cast<std::int64_t>(std::floor(t * nb + 1e-9));
  return band;
}

std::vector<LinearConstraint> band_constraints(const BoundaryVariableSet& vars, int image, double t, double beta,
                                               BandWeighting weighting) {
  const Band band = band_limits(vars, image, t, beta, weighting);
  std::vector<Term> lo, hi;
  for (const int id : vars.intra_ids(image)) {
    const std::int64_t w = weighting == BandWeighting::length ? vars[id].alpha : 1;
    if (w == 0) continue;
    lo.push_back({id, -w});
    hi.push_back({id, w});
  }
  std::vector<LinearConstraint> out;
  out.push_back(make(ConstraintKind::less_equal, std::move(lo), -band.lo, Provenance::band_lo));
  out.push_back(make(ConstraintKind::less_equal, std::move(hi), band.hi, Provenance::band_hi));
  return out;
}

std::vector<LinearConstraint> freeze_constraints(const BoundaryVariableSet& vars, std::span<const FrozenImage> frozen) {
  std::vector<const std::vector<int>*> labels(static_cast<std::size_t>(vars.image_count()), nullptr);
  for (const auto& f : frozen) {
    if (f.image < 0 || f.image >= vars.image_count())
      throw Error(ErrorKind::input, kModule, "freeze_constraints", "frozen image index out of range");
    if (static_cast<int>(f.cluster.size()) != vars.region_count(f.image))
      throw Error(ErrorKind::input, kModule, "freeze_constraints",
                  "labels of image " + std::to_string(f.image) + " do not cover all regions");
    labels[static_cast<std::size_t>(f.image)] = &f.cluster;
  }
  std::vector<LinearConstraint> out;
  for (int id = 0; id < vars.size(); ++id) {
    const auto& v = vars[id];
    const auto* la = labels[static_cast<std::size_t>(v.a.image)];
    const auto* lb = labels[static_cast<std::size_t>(v.b.image)];
    if (!la || !lb) continue;
    const bool separate = (*la)[static_cast<std::size_t>(v.a.region)] != (*lb)[static_cast<std::size_t>(v.b.region)];
    out.push_back(make(ConstraintKind::equal, {{id, 1}}, separate ? 1 : 0,
                       separate ? Provenance::freeze_sep : Provenance::freeze_merge));
  }
  return out;
}

void sort_by_provenance(std::vector<LinearConstraint>& constraints) {
  std::stable_sort(constraints.begin(), constraints.end(),
                   [](const LinearConstraint& a, const LinearConstraint& b) { return a.tag < b.tag; });
}

}  // namespace mhc
