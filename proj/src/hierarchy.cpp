#include "mhc/hierarchy.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "mhc/error.hpp"
#include "mhc/histogram.hpp"

namespace mhc {

namespace {

constexpr const char* kModule = "hierarchy";

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent_[static_cast<std::size_t>(find(a))] = find(b); }

 private:
  std::vector<int> parent_;
};

void check_image(const Hierarchy& h, const BoundaryVariableSet& vars, int image, const char* op) {
  if (image < 0 || image >= vars.image_count())
    throw Error(ErrorKind::input, kModule, op, "image index out of range");
  if (vars.region_count(image) != h.leaf_count())
    throw Error(ErrorKind::input, kModule, op, "variables were built on a different leave partition");
}

// Per internal node: the intra variables (as positions into intra_ids)
// whose endpoints lie in different children.
std::vector<std::vector<int>> cross_variables(const Hierarchy& h, const BoundaryVariableSet& vars, int image) {
  std::vector<int> depth(static_cast<std::size_t>(h.node_count()), 0);
  for (int n = h.root() - 1; n >= 0; --n) depth[static_cast<std::size_t>(n)] = depth[static_cast<std::size_t>(h.parent(n))] + 1;
  std::vector<std::vector<int>> cross(static_cast<std::size_t>(h.node_count()));
  const auto ids = vars.intra_ids(image);
  for (int k = 0; k < static_cast<int>(ids.size()); ++k) {
    const auto& v = vars[ids[static_cast<std::size_t>(k)]];
    int a = v.a.region, b = v.b.region;
    while (a != b) {
      if (depth[static_cast<std::size_t>(a)] >= depth[static_cast<std::size_t>(b)])
        a = h.parent(a);
      else
        b = h.parent(b);
    }
    cross[static_cast<std::size_t>(a)].push_back(k);
  }
  return cross;
}

}  // namespace

Hierarchy::Hierarchy(int leaf_count, std::vector<Merge> merges)
    : leaf_count_(leaf_count), merges_(std::move(merges)) {
  if (leaf_count_ < 1) throw Error(ErrorKind::input, kModule, "hierarchy", "leaf_count must be >= 1");
  if (static_cast<int>(merges_.size()) != leaf_count_ - 1)
    throw Error(ErrorKind::input, kModule, "hierarchy",
                "expected " + std::to_string(leaf_count_ - 1) + " merges, got " + std::to_string(merges_.size()));
  parent_.assign(static_cast<std::size_t>(node_count()), -1);
  leaves_.resize(static_cast<std::size_t>(node_count()));
  for (int l = 0; l < leaf_count_; ++l) leaves_[static_cast<std::size_t>(l)] = {l};
  for (std::size_t k = 0; k < merges_.size(); ++k) {
    const Merge& m = merges_[k];
    const int expected = leaf_count_ + static_cast<int>(k);
    if (m.parent != expected)
      throw Error(ErrorKind::input, kModule, "hierarchy",
                  "merge " + std::to_string(k) + " parent must be " + std::to_string(expected));
    for (const int c : {m.child_a, m.child_b}) {
      if (c < 0 || c >= m.parent)
        throw Error(ErrorKind::input, kModule, "hierarchy", "merge " + std::to_string(k) + " child out of range");
      if (parent_[static_cast<std::size_t>(c)] != -1)
        throw Error(ErrorKind::input, kModule, "hierarchy", "node " + std::to_string(c) + " has two parents");
      parent_[static_cast<std::size_t>(c)] = m.parent;
    }
    if (m.child_a == m.child_b)
      throw Error(ErrorKind::input, kModule, "hierarchy", "merge " + std::to_string(k) + " repeats a child");
    auto& l = leaves_[static_cast<std::size_t>(m.parent)];
    const auto& la = leaves_[static_cast<std::size_t>(m.child_a)];
    const auto& lb = leaves_[static_cast<std::size_t>(m.child_b)];
    l.reserve(la.size() + lb.size());
    std::merge(la.begin(), la.end(), lb.begin(), lb.end(), std::back_inserter(l));
  }
}

std::array<int, 2> Hierarchy::children(int node) const {
  if (is_leaf(node)) throw Error(ErrorKind::input, kModule, "children", "leaf has no children");
  const Merge& m = merges_[static_cast<std::size_t>(node - leaf_count_)];
  return {m.child_a, m.child_b};
}

Hierarchy build_bpt(const Image& image, const LabelMap& leaves) {
  if (image.width() != leaves.width() || image.height() != leaves.height())
    throw Error(ErrorKind::input, kModule, "build_bpt", "image and leaves have different dimensions");
  constexpr int bins = 8;
  const int n = leaves.region_count();
  const auto sizes = leaves.region_sizes();
  std::vector<Histogram> hist = region_histograms(image, leaves, bins);
  std::vector<double> mass(sizes.begin(), sizes.end());
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  for (const auto& e : build_graph(leaves).edges) {
    adj[static_cast<std::size_t>(e.a)].insert(e.b);
    adj[static_cast<std::size_t>(e.b)].insert(e.a);
  }
  // Similarity quantized to 1e-12 so near-equal coefficients compare as
  // ties and fall through to the id order.
  auto key = [&](int a, int b) {
    return std::llround(bhattacharyya_coefficient(hist[static_cast<std::size_t>(a)], hist[static_cast<std::size_t>(b)]) * 1e12);
  };
  using Candidate = std::tuple<long long, int, int>;  // (-similarity, min id, max id)
  std::set<Candidate> queue;
  for (int a = 0; a < n; ++a)
    for (const int b : adj[static_cast<std::size_t>(a)])
      if (a < b) queue.emplace(-key(a, b), a, b);

  std::vector<Merge> merges;
  merges.reserve(static_cast<std::size_t>(std::max(n - 1, 0)));
  for (int step = 0; step + 1 < n; ++step) {
    if (queue.empty())
      throw Error(ErrorKind::internal, kModule, "build_bpt", "region adjacency graph is disconnected");
    const auto [neg, a, b] = *queue.begin();
    const int p = n + step;
    merges.push_back({a, b, p});
    hist.push_back((hist[static_cast<std::size_t>(a)] * mass[static_cast<std::size_t>(a)] +
                    hist[static_cast<std::size_t>(b)] * mass[static_cast<std::size_t>(b)]));
    hist.back() /= hist.back().sum();
    mass.push_back(mass[static_cast<std::size_t>(a)] + mass[static_cast<std::size_t>(b)]);
    std::set<int> neighbours;
    for (const int x : {a, b})
      for (const int y : adj[static_cast<std::size_t>(x)]) {
        queue.erase({-key(std::min(x, y), std::max(x, y)), std::min(x, y), std::max(x, y)});
        if (y != a && y != b) {
          neighbours.insert(y);
          adj[static_cast<std::size_t>(y)].erase(x);
        }
      }
    adj[static_cast<std::size_t>(a)].clear();
    adj[static_cast<std::size_t>(b)].clear();
    adj.emplace_back();
    for (const int y : neighbours) {
      adj[static_cast<std::size_t>(p)].insert(y);
      adj[static_cast<std::size_t>(y)].insert(p);
      queue.emplace(-key(y, p), y, p);
    }
  }
  return Hierarchy(n, std::move(merges));
}

Encoding merging_step_encoding(const Hierarchy& h, const BoundaryVariableSet& vars, int image, int step) {
  check_image(h, vars, image, "merging_step_encoding");
  if (step < 0 || step > h.leaf_count() - 1)
    throw Error(ErrorKind::input, kModule, "merging_step_encoding",
                "step " + std::to_string(step) + " outside [0, " + std::to_string(h.leaf_count() - 1) + "]");
  UnionFind uf(h.node_count());
  for (int k = 0; k < step; ++k) {
    const Merge& m = h.merges()[static_cast<std::size_t>(k)];
    uf.unite(m.child_a, m.parent);
    uf.unite(m.child_b, m.parent);
  }
  Encoding out;
  for (const int id : vars.intra_ids(image)) {
    const auto& v = vars[id];
    out.push_back(uf.find(v.a.region) == uf.find(v.b.region) ? 0 : 1);
  }
  return out;
}

bool is_valid_cut(const Hierarchy& h, const TreeCut& cut) {
  std::vector<int> covered(static_cast<std::size_t>(h.leaf_count()), 0);
  for (const int node : cut.nodes) {
    if (node < 0 || node >= h.node_count()) return false;
    for (const int l : h.leaves_under(node)) ++covered[static_cast<std::size_t>(l)];
  }
  return std::all_of(covered.begin(), covered.end(), [](int c) { return c == 1; });
}

Encoding cut_to_encoding(const Hierarchy& h, const BoundaryVariableSet& vars, int image, const TreeCut& cut) {
  check_image(h, vars, image, "cut_to_encoding");
  if (!is_valid_cut(h, cut))
    throw Error(ErrorKind::input, kModule, "cut_to_encoding", "nodes do not partition the leaves");
  std::vector<int> owner(static_cast<std::size_t>(h.leaf_count()), -1);
  for (const int node : cut.nodes)
    for (const int l : h.leaves_under(node)) owner[static_cast<std::size_t>(l)] = node;
  Encoding out;
  for (const int id : vars.intra_ids(image)) {
    const auto& v = vars[id];
    out.push_back(owner[static_cast<std::size_t>(v.a.region)] == owner[static_cast<std::size_t>(v.b.region)] ? 0 : 1);
  }
  return out;
}

CutDecoding encoding_to_cut(const Hierarchy& h, const BoundaryVariableSet& vars, int image,
                            std::span<const std::uint8_t> assignment) {
  check_image(h, vars, image, "encoding_to_cut");
  if (assignment.size() != vars.intra_ids(image).size())
    throw Error(ErrorKind::input, kModule, "encoding_to_cut", "assignment length does not match the intra variables");
  const auto cross = cross_variables(h, vars, image);
  // all_zero[p]: every variable inside the leaves of p is 0.
  std::vector<char> all_zero(static_cast<std::size_t>(h.node_count()), 1);
  CutDecoding result;
  for (const Merge& m : h.merges()) {
    const auto& c = cross[static_cast<std::size_t>(m.parent)];
    bool equal = true;
    for (const int k : c) equal = equal && assignment[static_cast<std::size_t>(k)] == assignment[static_cast<std::size_t>(c.front())];
    const bool children_zero = all_zero[static_cast<std::size_t>(m.child_a)] && all_zero[static_cast<std::size_t>(m.child_b)];
    const bool cross_zero = !c.empty() && assignment[static_cast<std::size_t>(c.front())] == 0;
    if (!equal || (cross_zero && !children_zero)) {
      result.witness = m.parent;
      return result;
    }
    all_zero[static_cast<std::size_t>(m.parent)] = children_zero && (c.empty() || cross_zero);
  }
  std::vector<int> stack{h.root()};
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    if (all_zero[static_cast<std::size_t>(node)]) {
      result.cut.nodes.push_back(node);
    } else {
      const auto ch = h.children(node);
      stack.push_back(ch[0]);
      stack.push_back(ch[1]);
    }
  }
  std::sort(result.cut.nodes.begin(), result.cut.nodes.end());
  const Encoding back = cut_to_encoding(h, vars, image, result.cut);
  if (!std::equal(back.begin(), back.end(), assignment.begin(), assignment.end()))
    throw Error(ErrorKind::internal, kModule, "encoding_to_cut", "decoded cut does not reproduce the assignment");
  result.accepted = true;
  return result;
}

nlohmann::json hierarchy_to_json(const Hierarchy& h) {
  nlohmann::json merges = nlohmann::json::array();
  for (const Merge& m : h.merges()) merges.push_back({m.child_a, m.child_b, m.parent});
  return {{"leaf_count", h.leaf_count()}, {"merges", merges}};
}

Hierarchy hierarchy_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& cause) { return FormatError(kModule, "import", cause); };
  if (!j.is_object() || !j.contains("leaf_count") || !j.contains("merges"))
    throw fail("expected object with 'leaf_count' and 'merges'");
  if (!j["leaf_count"].is_number_integer()) throw fail("leaf_count must be an integer");
  const int n = j["leaf_count"].get<int>();
  if (n < 1) throw fail("leaf_count must be >= 1");
  if (!j["merges"].is_array()) throw fail("merges must be an array");
  std::map<long long, int> ids;
  for (int l = 0; l < n; ++l) ids[l] = l;
  std::vector<Merge> merges;
  for (const auto& entry : j["merges"]) {
    if (!entry.is_array() || entry.size() < 3) throw fail("each merge needs at least two children and a parent");
    std::vector<int> children;
    for (std::size_t k = 0; k + 1 < entry.size(); ++k) {
      if (!entry[k].is_number_integer()) throw fail("node ids must be integers");
      const auto it = ids.find(entry[k].get<long long>());
      if (it == ids.end()) throw fail("child " + entry[k].dump() + " used before it is defined");
      children.push_back(it->second);
    }
    if (!entry.back().is_number_integer()) throw fail("node ids must be integers");
    const long long parent = entry.back().get<long long>();
    if (ids.count(parent)) throw fail("parent id " + std::to_string(parent) + " already in use");
    int acc = children.front();
    for (std::size_t k = 1; k < children.size(); ++k) {
      const int node = n + static_cast<int>(merges.size());
      merges.push_back({acc, children[k], node});
      acc = node;
    }
    ids[parent] = acc;
  }
  return Hierarchy(n, std::move(merges));
}

Hierarchy load_hierarchy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::input, kModule, "import", "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(kModule, "import", e.what());
  }
  return hierarchy_from_json(j);
}

void save_hierarchy(const Hierarchy& h, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::input, kModule, "export", "cannot write '" + path.string() + "'");
  out << hierarchy_to_json(h).dump() << '\n';
}

}  // namespace mhc
